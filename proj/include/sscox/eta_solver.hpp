#pragma once

#include <optional>

#include "sscox/partial_lik.hpp"

namespace sscox {

struct EtaFitOptions {
  int max_iter = 50;
  double grad_tol = 1e-8;
  int max_halvings = 30;
  double ridge = 1e-10;
};

// Minimizer of the penalized partial likelihood for eta at a fixed beta.
// `fitted` holds eta at the data rows recentered to mean zero; the discarded
// constant is kept in `center` (fitted = evaluate(...) - center). `hessian`
// is the curvature of the per-subject-scale objective at the optimum; the
// cross-validation score uses it directly and the pointwise bands use the
// full-sample version n * hessian.
struct EtaFit {
  Vector coef;
  double lambda = 0.0;
  Vector fitted;
  double center = 0.0;
  Matrix hessian;              // curvature of the per-subject-scale objective
  Matrix posterior_curvature;  // full-sample curvature behind the bands
  int n_obs = 0;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  double objective = 0.0;
};

EtaFit fit_eta(const EtaProblem& prob, double lambda,
               const std::optional<Vector>& warm_start = std::nullopt,
               const EtaFitOptions& options = {});

EtaFit fit_eta(const LikelihoodContext& ctx, const SplineBasis& basis, const Vector& beta,
               double lambda, const std::optional<Vector>& warm_start = std::nullopt,
               const EtaFitOptions& options = {});

// Delete-one cross-validation proxy for the relative Kullback-Leibler
// distance of the fit; lambda is chosen to minimize it.
double rkl_score(const EtaProblem& prob, const SplineBasis& basis, const EtaFit& fit);

// Minimizes the score over the grid; ties break toward the larger (smoother)
// lambda. Fits are warm-started from the neighboring grid point.
struct LambdaSelection {
  double lambda;
  EtaFit fit;
  std::vector<double> scores;  // parallel to the grid
};
LambdaSelection select_lambda(const LikelihoodContext& ctx, const SplineBasis& basis,
                              const Vector& beta, const std::vector<double>& grid,
                              const EtaFitOptions& options = {});

std::vector<double> default_lambda_grid();

// Pointwise interval eta(w) +- z * sqrt(psi(w)' H^{-1} psi(w)) from the
// approximate posterior covariance of the coefficients.
struct EtaBand {
  Vector estimate;
  Vector lower;
  Vector upper;
};
EtaBand eta_band(const EtaFit& fit, const SplineBasis& basis, const Matrix& grid,
                 double level = 0.95);

// Band for a single ANOVA component (zero-padded basis columns).
EtaBand eta_term_band(const EtaFit& fit, const SplineBasis& basis, AnovaTerm term,
                      const Matrix& grid, double level = 0.95);

}  // namespace sscox
