#pragma once

#include "sscox/partial_lik.hpp"

namespace sscox {

// Biased-sampling weights over the empirical domain W_n, one weight vector
// per failure: a_p(W_k) = Y_k(X_{i_p}) exp(U_k' beta). Stored implicitly
// through U'beta and the risk sets.
struct BiasedWeights {
  Vector u_beta;  // U'beta, length n
  RiskSet rs;

  int n() const { return static_cast<int>(u_beta.size()); }
  int n_failures() const { return rs.n_failures(); }
  // explicit weight, for oracles and diagnostics
  double a(int p, int k) const;
};

BiasedWeights biased_weights(const SurvivalDataset& ds, const RiskSet& rs, const Vector& beta);

// Kullback-Leibler distance between two log-density estimates over W_n under
// the biased-sampling weights; both arguments are value vectors at the data
// rows. Invariant to adding a constant to either argument.
double kl_distance(const Vector& eta1, const Vector& eta2, const BiasedWeights& weights);

// KL projection of eta_hat onto the span of the given design columns
// (sub-columns of the full basis). Newton on the convex projection objective.
struct KlProjection {
  Vector coef;        // coefficients on the reduced columns
  Vector eta_tilde;   // projected values at the data rows
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

KlProjection kl_project(const Vector& eta_hat, const Matrix& psi_reduced,
                        const BiasedWeights& weights);

// Feasibility report for one candidate reduced structure.
struct KLReport {
  AnovaStructure candidate;
  double kl_full_reduced;    // KL(eta_hat, eta_tilde)
  double kl_reduced_const;   // KL(eta_tilde, eta_c)
  double kl_full_const;      // KL(eta_hat, eta_c)
  double ratio;              // KL(eta_hat, eta_tilde) / KL(eta_hat, eta_c)
  bool feasible;             // ratio below the threshold
  double pythagoras_defect;  // |KL(h,c) - KL(h,t) - KL(t,c)|
};

// One report per candidate; every candidate must be nested in the fitted
// structure. The constant model eta_c is the zero function (the distance is
// shift-invariant, so the constant's level is immaterial).
std::vector<KLReport> kl_ratio_report(const Vector& eta_hat, const SplineBasis& basis,
                                      const Matrix& psi_full,
                                      const std::vector<AnovaStructure>& candidates,
                                      const BiasedWeights& weights, double threshold = 0.05);

}  // namespace sscox
