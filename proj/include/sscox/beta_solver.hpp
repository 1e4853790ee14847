#pragma once

#include "sscox/partial_lik.hpp"

namespace sscox {

enum class PenaltyKind { Scad, AdaptiveLasso, None };

std::string penalty_kind_label(PenaltyKind kind);
PenaltyKind parse_penalty_kind(const std::string& s);

// Per-coefficient penalty specification. For SCAD all thetas share one grid
// value; the adaptive LASSO carries reciprocal-magnitude weights and may hold
// +inf to force a coefficient to zero.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::Scad;
  double a = 3.7;  // SCAD shape, > 2
  Vector thetas;

  double deriv(int j, double t) const;  // p'_{theta_j}(t), t >= 0
  double value(int j, double t) const;  // p_{theta_j}(t)
};

// SCAD derivative p'_theta(t) = theta[ I(t<=theta) + (a theta - t)_+ /((a-1)theta) I(t>theta) ]
double scad_deriv(double theta, double a, double t);
double scad_value(double theta, double a, double t);

// Exact solution of  min_b 1/2 ||y - V b||^2 + scale_n * sum_j weights_j |b_j|
// by the LARS-lasso homotopy after rescaling columns to a uniform penalty.
// Inactive coordinates are bit-zero.
Vector lars_weighted_lasso(const Vector& y, const Matrix& v, const Vector& weights,
                           double scale_n);

// One-step estimate of beta given eta. The sets A (unpenalized) and B
// (penalized) partition the coordinates by p' at `beta_prev`; `active_set`
// below stores A. AIC uses the count of nonzero coefficients, which is a
// different set.
struct BetaFit {
  Vector beta;             // exact zeros for dropped coefficients
  IntVector active_set;    // A = {j : p'(|beta_prev_j|) = 0}
  IntVector penalized_set; // B = {j : p'(|beta_prev_j|) > 0}
  PenaltySpec spec;
  double theta = 0.0;      // scalar grid value behind spec.thetas, if any
  double profile_loglik = 0.0;  // l_p at the one-step estimate
  double refit_loglik = 0.0;    // l_p maximized over the nonzero subset
  double aic = 0.0;             // -2 refit_loglik + 2 #nonzero

  int nonzero_count() const;
};

struct OneStepOptions {
  // expansion point for the quadratic approximation: the unpenalized profile
  // maximizer by default, the previous iterate when strict = true
  bool strict_expansion = false;
  double zero_snap = 1e-10;
};

// Unpenalized profile maximizer of the log partial likelihood in beta with
// eta fixed (Newton with step halving; ridge fallback on failure). The
// (RiskSet, U) form runs on an arbitrary design, e.g. a column subset.
struct ProfileMax {
  Vector beta;
  Matrix info;  // -hessian at beta
  double value = 0.0;
  bool converged = false;
  bool ridged = false;
};
ProfileMax profile_maximizer(const RiskSet& rs, const Matrix& u, const Vector& eta_vals,
                             const Vector& start);
ProfileMax profile_maximizer(const LikelihoodContext& ctx, const Vector& eta_vals,
                             const Vector& start);

BetaFit one_step_update(const LikelihoodContext& ctx, const Vector& eta_vals,
                        const Vector& beta_prev, const PenaltySpec& spec,
                        const OneStepOptions& options = {});

// theta_j = theta0 / |beta_init_j|; zero initial estimates map to +inf
// (forced exclusion).
Vector adaptive_lasso_thetas(const Vector& beta_init, double theta0);

// Minimizes AIC = -2 l_p(beta) + 2 #nonzero over the theta grid. One shared
// theta for SCAD; adaptive LASSO rescales per-coefficient weights built from
// the unpenalized profile maximizer. Ties prefer the sparser model, then the
// larger theta.
struct ThetaSelection {
  double theta;
  BetaFit fit;
};
ThetaSelection aic_select_theta(const LikelihoodContext& ctx, const Vector& eta_vals,
                                const Vector& beta_prev, PenaltyKind kind, double scad_a,
                                const std::vector<double>& theta_grid,
                                const OneStepOptions& options = {});

// 30 log-spaced points on [1e-3, 1]; scaled by sqrt(log(d)/n) at fit time.
std::vector<double> default_theta_grid();
std::vector<double> scaled_theta_grid(const std::vector<double>& base, int d, int n);

}  // namespace sscox
