#pragma once

#include "sscox/backfit.hpp"

namespace sscox {

// Sandwich covariance for the nonzero coefficients,
//   {d2 l_p - n Sigma_theta}^{-1} cov{d l_p} {d2 l_p - n Sigma_theta}^{-1},
// with cov{d l_p} estimated by summing per-subject score-residual outer
// products. Zero coefficients carry no standard error.
struct SandwichCov {
  IntVector active;          // coefficient indices with beta != 0
  Matrix cov;                // |active| x |active|
  Vector se;                 // sqrt of the diagonal
  Vector sigma_theta_diag;   // p'(|beta_j|)/|beta_j| over the active set
};

SandwichCov sandwich_cov(const LikelihoodContext& ctx, const Vector& beta,
                         const Vector& eta_vals, const PenaltySpec& spec);

SandwichCov sandwich_cov(const SurvivalDataset& ds, const RiskSet& rs, const FitResult& fit);

}  // namespace sscox
