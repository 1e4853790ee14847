#include "sscox/backfit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sscox {

InitialBeta initial_beta(const LikelihoodContext& ctx) {
  const int d = ctx.ds->dim_u();
  if (d < 1) throw std::invalid_argument("initial_beta needs at least one parametric covariate");
  const ProfileMax prof =
      profile_maximizer(ctx, Vector::Zero(ctx.n()), Vector::Zero(d));
  return {prof.beta, prof.converged, prof.ridged};
}

FitResult fit(const SurvivalDataset& ds, const RiskSet& rs, const FitConfig& config) {
  LikelihoodContext ctx{&ds, &rs};
  const int d = ds.dim_u();
  config.structure.check_valid(ds.dim_w());

  FitResult result;
  result.basis = build_basis(ds, select_knots(ds, config.seed), config.structure);

  Vector beta = Vector::Zero(d);
  if (d > 0) beta = initial_beta(ctx).beta;
  result.beta_initial = beta;

  // lambda chosen once against the initial beta, then frozen
  LambdaSelection lsel =
      select_lambda(ctx, result.basis, beta, config.lambda_grid, config.eta_options);
  result.lambda = lsel.lambda;
  result.eta_fit = std::move(lsel.fit);

  if (d == 0) {
    result.beta_fit.beta = Vector();
    result.beta_fit.spec.kind = PenaltyKind::None;
    result.beta_fit.profile_loglik = pl_value(ctx, result.eta_fit.fitted);
    result.beta_fit.refit_loglik = result.beta_fit.profile_loglik;
    result.beta_fit.aic = -2.0 * result.beta_fit.refit_loglik;
    result.iterations = 1;
    result.converged = result.eta_fit.converged;
    return result;
  }

  const Matrix rpen = result.basis.penalty();
  const std::vector<double> theta_grid =
      scaled_theta_grid(config.theta_base_grid, d, ds.n());
  OneStepOptions step_options;
  step_options.strict_expansion = config.strict_expansion;

  Vector prev_fitted = result.eta_fit.fitted;
  bool have_prev_eta = false;
  for (int k = 1; k <= config.max_outer; ++k) {
    if (k > 1) {
      result.eta_fit = fit_eta(ctx, result.basis, beta, result.lambda,
                               result.eta_fit.coef, config.eta_options);
    }
    const double deta = have_prev_eta
                            ? (result.eta_fit.fitted - prev_fitted).lpNorm<Eigen::Infinity>()
                            : std::numeric_limits<double>::infinity();
    prev_fitted = result.eta_fit.fitted;
    have_prev_eta = true;

    BetaFit beta_fit;
    if (config.penalty == PenaltyKind::None) {
      const ProfileMax prof = profile_maximizer(ctx, result.eta_fit.fitted, beta);
      beta_fit.beta = prof.beta;
      beta_fit.spec.kind = PenaltyKind::None;
      beta_fit.spec.thetas = Vector::Zero(d);
      for (int j = 0; j < d; ++j) beta_fit.active_set.push_back(j);
      beta_fit.profile_loglik = prof.value;
      beta_fit.refit_loglik = prof.value;
      beta_fit.aic = -2.0 * prof.value + 2.0 * d;
    } else {
      ThetaSelection sel = aic_select_theta(ctx, result.eta_fit.fitted, beta, config.penalty,
                                            config.scad_a, theta_grid, step_options);
      beta_fit = std::move(sel.fit);
    }

    const double dbeta = (beta_fit.beta - beta).lpNorm<Eigen::Infinity>();
    beta = beta_fit.beta;
    result.beta_fit = std::move(beta_fit);
    result.iterations = k;

    const double jpen = result.eta_fit.coef.dot(rpen * result.eta_fit.coef);
    result.trace.push_back({dbeta, deta,
                            result.beta_fit.profile_loglik - ds.n() * result.lambda * jpen});

    if (std::max(dbeta, deta) < config.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

FitResult fit(const SurvivalDataset& ds, const FitConfig& config) {
  const RiskSet rs = build_risk_sets(ds);
  return fit(ds, rs, config);
}

}  // namespace sscox
