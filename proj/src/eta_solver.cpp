#include "sscox/eta_solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sscox/numeric.hpp"

namespace sscox {

EtaFit fit_eta(const EtaProblem& prob, double lambda,
               const std::optional<Vector>& warm_start, const EtaFitOptions& options) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const int m = static_cast<int>(prob.psi.cols());
  const double n = static_cast<double>(prob.ctx.n());

  Vector coef = warm_start ? *warm_start : Vector(Vector::Zero(m));
  if (coef.size() != m) throw std::invalid_argument("warm start has wrong length");

  EtaObjective cur = prob.eval(coef, lambda, true);
  EtaFit fit;
  fit.lambda = lambda;
  fit.iterations = 0;
  for (int it = 0; it < options.max_iter; ++it) {
    fit.grad_norm = cur.grad.norm();
    if (fit.grad_norm < options.grad_tol) {
      fit.converged = true;
      break;
    }
    Eigen::LDLT<Matrix> ldlt(cur.hess);
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("eta Hessian factorization failed; lambda too small or collinear basis");
    }
    const Vector step = ldlt.solve(-cur.grad);
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h) {
      const Vector trial = coef + alpha * step;
      const double f = prob.value_only(trial, lambda);
      if (std::isfinite(f) && f <= cur.value) {
        coef = trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    fit.iterations = it + 1;
    if (!accepted) break;  // no descent left at the smallest step
    cur = prob.eval(coef, lambda, true);
  }
  fit.grad_norm = cur.grad.norm();
  if (fit.grad_norm < options.grad_tol) fit.converged = true;

  fit.coef = coef;
  fit.objective = cur.value;
  const Vector raw = prob.psi * coef;
  fit.center = raw.mean();
  fit.fitted = raw.array() - fit.center;
  fit.hessian = cur.hess;
  // posterior curvature under the Gaussian-process prior exp(-(n lambda/2) J):
  // likelihood curvature plus n lambda R
  fit.posterior_curvature = n * (cur.hess - lambda * prob.rpen);
  fit.n_obs = static_cast<int>(n);
  return fit;
}

EtaFit fit_eta(const LikelihoodContext& ctx, const SplineBasis& basis, const Vector& beta,
               double lambda, const std::optional<Vector>& warm_start,
               const EtaFitOptions& options) {
  EtaProblem prob = make_eta_problem(ctx, basis, beta);
  prob.ridge = options.ridge;
  return fit_eta(prob, lambda, warm_start, options);
}

double rkl_score(const EtaProblem& prob, const SplineBasis& basis, const EtaFit& fit) {
  const auto& ctx = prob.ctx;
  const auto& rs = *ctx.rs;
  const int n = ctx.n();
  const int nf = rs.n_failures();

  // -(1/N) sum_p { eta(W_{i_p}) - log int a_p e^eta dPn }, with
  // a_p(W_k) = Y_k(X_{i_p}) exp(U_k' beta), so the integrand exponent is the
  // full linear predictor.
  const Vector eta = fit.fitted;
  const Vector lp = prob.offset + eta;
  const double lp_max = lp.maxCoeff();
  Vector s0(n);
  {
    double acc = 0.0;
    for (int pos = n - 1; pos >= 0; --pos) {
      acc += std::exp(lp[rs.order[pos]] - lp_max);
      s0[pos] = acc;
    }
  }
  double first = 0.0;
  for (int p = 0; p < nf; ++p) {
    const double log_int = std::log(s0[rs.failure_start[p]]) + lp_max - std::log(double(n));
    first -= eta[rs.failure_subject[p]] - log_int;
  }
  first /= static_cast<double>(nf);

  // tr(P1 Q' H^{-1} Q P1) / (N(N-1)) with Q the basis columns at the failures
  if (nf < 2) throw std::runtime_error("cross-validation score needs at least two failures");
  Matrix wf(nf, basis.q);
  for (int p = 0; p < nf; ++p) wf.row(p) = ctx.ds->w.row(rs.failure_subject[p]);
  Matrix q = basis.design(wf).transpose();  // m x N
  const Vector mean_col = q.rowwise().mean();
  q.colwise() -= mean_col;
  Eigen::LDLT<Matrix> ldlt(fit.hessian);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("singular curvature in rkl_score");
  const Matrix solved = ldlt.solve(q);
  const double trace = (q.array() * solved.array()).sum();
  return first + trace / (static_cast<double>(nf) * static_cast<double>(nf - 1));
}

LambdaSelection select_lambda(const LikelihoodContext& ctx, const SplineBasis& basis,
                              const Vector& beta, const std::vector<double>& grid,
                              const EtaFitOptions& options) {
  if (grid.empty()) throw std::invalid_argument("empty lambda grid");
  EtaProblem prob = make_eta_problem(ctx, basis, beta);
  prob.ridge = options.ridge;

  LambdaSelection sel;
  sel.scores.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  double best = std::numeric_limits<double>::infinity();
  std::optional<Vector> warm;
  bool any = false;
  // largest lambda first: warm starts stay smooth, ties keep the smoother fit
  for (int i = static_cast<int>(grid.size()) - 1; i >= 0; --i) {
    EtaFit fit;
    double score;
    try {
      fit = fit_eta(prob, grid[i], warm, options);
      warm = fit.coef;
      score = rkl_score(prob, basis, fit);
    } catch (const std::exception&) {
      continue;
    }
    sel.scores[i] = score;
    if (std::isfinite(score) && score < best) {
      best = score;
      sel.lambda = grid[i];
      sel.fit = std::move(fit);
      any = true;
    }
  }
  if (!any) throw std::runtime_error("no lambda on the grid produced a usable fit");
  return sel;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid(20);
  const double lo = std::log(1e-7), hi = std::log(1.0);
  for (int i = 0; i < 20; ++i) grid[i] = std::exp(lo + (hi - lo) * i / 19.0);
  return grid;
}

namespace {

EtaBand band_from_design(const EtaFit& fit, const Matrix& psi, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0,1)");
  Eigen::LDLT<Matrix> ldlt(fit.posterior_curvature);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("singular curvature in eta_band");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const Matrix solved = ldlt.solve(psi.transpose());
  EtaBand band;
  band.estimate = psi * fit.coef;
  band.lower.resize(psi.rows());
  band.upper.resize(psi.rows());
  for (int i = 0; i < psi.rows(); ++i) {
    const double var = psi.row(i).dot(solved.col(i));
    const double hw = z * std::sqrt(std::max(var, 0.0));
    band.lower[i] = band.estimate[i] - hw;
    band.upper[i] = band.estimate[i] + hw;
  }
  return band;
}

}  // namespace

EtaBand eta_band(const EtaFit& fit, const SplineBasis& basis, const Matrix& grid, double level) {
  return band_from_design(fit, basis.design(grid), level);
}

EtaBand eta_term_band(const EtaFit& fit, const SplineBasis& basis, AnovaTerm term,
                      const Matrix& grid, double level) {
  return band_from_design(fit, basis.design_term_padded(grid, term), level);
}

}  // namespace sscox
