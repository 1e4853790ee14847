#pragma once

#include "sscox/beta_solver.hpp"
#include "sscox/eta_solver.hpp"

namespace sscox {

struct FitConfig {
  PenaltyKind penalty = PenaltyKind::Scad;
  double scad_a = 3.7;
  AnovaStructure structure = AnovaStructure::univariate();
  std::vector<double> lambda_grid = default_lambda_grid();
  std::vector<double> theta_base_grid = default_theta_grid();  // scaled by sqrt(log d / n)
  std::uint64_t seed = 1;
  int max_outer = 20;
  double tol = 1e-4;
  bool strict_expansion = false;
  EtaFitOptions eta_options;
};

struct IterationTrace {
  double dbeta;      // sup-norm change of beta
  double deta;       // sup-norm change of the fitted eta values
  double objective;  // profile log PL minus n*lambda*J(eta) at the iterate
};

struct FitResult {
  BetaFit beta_fit;
  EtaFit eta_fit;
  SplineBasis basis;
  Vector beta_initial;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationTrace> trace;
};

// Unpenalized Cox partial-likelihood maximizer on U alone (eta = 0), the
// starting point of the alternation.
struct InitialBeta {
  Vector beta;
  bool converged;
  bool ridged;
};
InitialBeta initial_beta(const LikelihoodContext& ctx);

// Alternates the eta fit (lambda selected on the first pass, then frozen) and
// the one-step beta update (theta reselected by AIC each pass) until the
// sup-norm changes fall below tol.
FitResult fit(const SurvivalDataset& ds, const RiskSet& rs, const FitConfig& config);
FitResult fit(const SurvivalDataset& ds, const FitConfig& config);

}  // namespace sscox
