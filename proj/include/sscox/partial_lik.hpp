#pragma once

#include "sscox/dataset.hpp"
#include "sscox/spline.hpp"
#include "sscox/types.hpp"

namespace sscox {

// Binds a dataset to its risk sets. All likelihood routines are pure
// functions of (ctx, parameters) and safe for parallel use.
struct LikelihoodContext {
  const SurvivalDataset* ds = nullptr;
  const RiskSet* rs = nullptr;

  int n() const { return ds->n(); }
  int n_failures() const { return rs->n_failures(); }
};

// Positive, unnormalized log partial likelihood
//   pl(lp) = sum_p { lp_{i_p} - log sum_{k in R_p} exp(lp_k) },
// evaluated with a global max subtraction so exp never overflows. Risk sets
// are suffixes of the time-sorted order, so one descending sweep suffices.
// The (RiskSet, lp) forms exist because the same sweeps serve the KL module,
// which has no dataset at hand.
double pl_value(const RiskSet& rs, const Vector& lp);
double pl_value(const LikelihoodContext& ctx, const Vector& lp);

// d pl / d lp, an n-vector.
Vector pl_grad(const RiskSet& rs, const Vector& lp);
Vector pl_grad(const LikelihoodContext& ctx, const Vector& lp);

// X' H X where H = -d^2 pl / d lp^2 (positive semidefinite).
Matrix pl_hess_quad(const RiskSet& rs, const Vector& lp, const Matrix& x);
Matrix pl_hess_quad(const LikelihoodContext& ctx, const Vector& lp, const Matrix& x);

// Risk-set averages of X at each subject's own failure time:
// row i is x_i - xbar(R at X_i) for failures, zero otherwise.
Matrix pl_score_residuals(const LikelihoodContext& ctx, const Vector& lp, const Matrix& x);

// -(1/n) pl at lp = U beta + eta_vals.
double neg_log_pl(const LikelihoodContext& ctx, const Vector& beta, const Vector& eta_vals);

// Derivatives of the profile log partial likelihood in beta with eta fixed.
struct BetaDerivs {
  double value;  // pl at (beta, eta)
  Vector grad;   // d pl / d beta
  Matrix info;   // -d^2 pl / d beta^2, positive semidefinite
};
BetaDerivs grad_hess_beta(const LikelihoodContext& ctx, const Vector& beta,
                          const Vector& eta_vals);

// Penalized objective for the eta problem,
//   f(c) = -(1/n) pl(U beta + Psi c) + lambda c'Rc + ridge ||c||^2.
// The tiny ridge makes f strictly convex so the optimum is unique.
struct EtaObjective {
  double value;
  Vector grad;
  Matrix hess;
};

// Precomputed pieces of the eta problem, reused across Newton iterations and
// lambda grid points.
struct EtaProblem {
  LikelihoodContext ctx;
  Matrix psi;      // n x m design at the data rows
  Matrix rpen;     // m x m penalty Gram
  Vector offset;   // U beta
  double ridge = 1e-10;

  EtaObjective eval(const Vector& coef, double lambda, bool with_derivs) const;
  double value_only(const Vector& coef, double lambda) const;
};

EtaProblem make_eta_problem(const LikelihoodContext& ctx, const SplineBasis& basis,
                            const Vector& beta);

EtaObjective penalized_eta_objective(const LikelihoodContext& ctx, const SplineBasis& basis,
                                     const Vector& beta, const Vector& coef, double lambda);

}  // namespace sscox
