#include "sscox/beta_solver.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sscox {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string penalty_kind_label(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Scad: return "scad";
    case PenaltyKind::AdaptiveLasso: return "alasso";
    case PenaltyKind::None: return "none";
  }
  throw std::logic_error("unknown penalty kind");
}

PenaltyKind parse_penalty_kind(const std::string& s) {
  if (s == "scad") return PenaltyKind::Scad;
  if (s == "alasso") return PenaltyKind::AdaptiveLasso;
  if (s == "none") return PenaltyKind::None;
  throw std::invalid_argument("unknown penalty: " + s + " (expected scad|alasso|none)");
}

double scad_deriv(double theta, double a, double t) {
  if (!(a > 2.0)) throw std::invalid_argument("SCAD shape must exceed 2");
  if (theta < 0.0 || t < 0.0) throw std::invalid_argument("scad_deriv needs theta, t >= 0");
  if (theta == 0.0) return 0.0;
  if (t <= theta) return theta;
  return std::max(a * theta - t, 0.0) / (a - 1.0);
}

double scad_value(double theta, double a, double t) {
  if (!(a > 2.0)) throw std::invalid_argument("SCAD shape must exceed 2");
  if (theta < 0.0 || t < 0.0) throw std::invalid_argument("scad_value needs theta, t >= 0");
  if (t <= theta) return theta * t;
  if (t <= a * theta) {
    return (2.0 * a * theta * t - t * t - theta * theta) / (2.0 * (a - 1.0));
  }
  return theta * theta * (a + 1.0) / 2.0;
}

double PenaltySpec::deriv(int j, double t) const {
  switch (kind) {
    case PenaltyKind::Scad: return scad_deriv(thetas[j], a, t);
    case PenaltyKind::AdaptiveLasso: return thetas[j];
    case PenaltyKind::None: return 0.0;
  }
  throw std::logic_error("unknown penalty kind");
}

double PenaltySpec::value(int j, double t) const {
  switch (kind) {
    case PenaltyKind::Scad: return scad_value(thetas[j], a, t);
    case PenaltyKind::AdaptiveLasso: return thetas[j] * t;
    case PenaltyKind::None: return 0.0;
  }
  throw std::logic_error("unknown penalty kind");
}

Vector lars_weighted_lasso(const Vector& y, const Matrix& v, const Vector& weights,
                           double scale_n) {
  const int m = static_cast<int>(v.cols());
  if (weights.size() != m) throw std::invalid_argument("one weight per column required");
  if (!v.allFinite() || !y.allFinite()) throw std::invalid_argument("nonfinite lasso inputs");
  for (int j = 0; j < m; ++j) {
    if (!(weights[j] > 0.0)) throw std::invalid_argument("lasso weights must be positive");
  }
  Vector gamma = Vector::Zero(m);
  if (m == 0) return gamma;

  // rescale to a uniform penalty: columns x_j = v_j / w_j, coefficients
  // gamma_j = w_j b_j, penalty level lambda_t = scale_n
  Matrix x(v.rows(), m);
  for (int j = 0; j < m; ++j) {
    x.col(j) = std::isinf(weights[j]) ? Vector(Vector::Zero(v.rows()))
                                      : Vector(v.col(j) / weights[j]);
  }
  const double lambda_t = scale_n;

  std::vector<int> active;
  std::vector<double> sign;
  const int max_steps = 10 * m + 50;
  for (int step = 0; step < max_steps; ++step) {
    const Vector r = y - x * gamma;
    const Vector c = x.transpose() * r;

    double lambda = 0.0;
    if (active.empty()) {
      int jmax = -1;
      for (int j = 0; j < m; ++j) {
        if (std::abs(c[j]) > lambda) {
          lambda = std::abs(c[j]);
          jmax = j;
        }
      }
      if (lambda <= lambda_t + 1e-14 || jmax < 0) break;
      active.push_back(jmax);
      sign.push_back(c[jmax] > 0 ? 1.0 : -1.0);
    } else {
      for (int idx : active) lambda = std::max(lambda, std::abs(c[idx]));
    }
    if (lambda <= lambda_t + 1e-14) break;

    const int na = static_cast<int>(active.size());
    Matrix xa(x.rows(), na);
    Vector s(na);
    for (int i = 0; i < na; ++i) {
      xa.col(i) = x.col(active[i]);
      s[i] = sign[i];
    }
    // equiangular direction; minimum-norm solve covers rank-deficient designs
    Matrix gram = xa.transpose() * xa;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(gram);
    const Vector d = cod.solve(s);
    const Vector xd = xa * d;
    const Vector a_all = x.transpose() * xd;

    // largest decrease of lambda before the target, a join, or a drop
    double t_best = lambda - lambda_t;
    int join = -1, drop = -1;
    for (int j = 0; j < m; ++j) {
      if (std::find(active.begin(), active.end(), j) != active.end()) continue;
      const double cj = c[j], aj = a_all[j];
      for (const double tj : {(lambda - cj) / (1.0 - aj), (lambda + cj) / (1.0 + aj)}) {
        if (tj > 1e-12 && tj < t_best - 1e-14) {
          t_best = tj;
          join = j;
          drop = -1;
        }
      }
    }
    for (int i = 0; i < na; ++i) {
      if (std::abs(d[i]) < 1e-300) continue;
      const double ti = -gamma[active[i]] / d[i];
      if (ti > 1e-12 && ti < t_best - 1e-14) {
        t_best = ti;
        drop = i;
        join = -1;
      }
    }
    if (!(t_best > 0.0)) break;

    for (int i = 0; i < na; ++i) gamma[active[i]] += t_best * d[i];
    if (drop >= 0) {
      gamma[active[drop]] = 0.0;
      active.erase(active.begin() + drop);
      sign.erase(sign.begin() + drop);
    } else if (join >= 0) {
      const double cj = (x.col(join).transpose() * (y - x * gamma))(0);
      active.push_back(join);
      sign.push_back(cj > 0 ? 1.0 : -1.0);
    } else {
      break;  // reached the target penalty level
    }
  }

  Vector b = Vector::Zero(m);
  for (std::size_t i = 0; i < active.size(); ++i) {
    b[active[i]] = gamma[active[i]] / weights[active[i]];
  }
  return b;
}

ProfileMax profile_maximizer(const RiskSet& rs, const Matrix& u, const Vector& eta_vals,
                             const Vector& start) {
  const int d = static_cast<int>(u.cols());
  auto derivs = [&](const Vector& beta) {
    const Vector lp = u * beta + eta_vals;
    BetaDerivs out;
    out.value = pl_value(rs, lp);
    out.grad = u.transpose() * pl_grad(rs, lp);
    out.info = pl_hess_quad(rs, lp, u);
    return out;
  };
  ProfileMax out;
  out.beta = start.size() == d ? start : Vector(Vector::Zero(d));
  if (d == 0) {
    out.converged = true;
    out.value = pl_value(rs, eta_vals);
    out.info.resize(0, 0);
    return out;
  }

  for (double ridge : {0.0, 1e-6, 1e-3, 1e-1}) {
    Vector beta = ridge == 0.0 ? out.beta : Vector(Vector::Zero(d));
    BetaDerivs cur = derivs(beta);
    bool ok = true;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      Vector grad = cur.grad - ridge * beta;
      Matrix info = cur.info;
      info.diagonal().array() += ridge;
      if (grad.norm() < 1e-8) {
        converged = true;
        break;
      }
      Eigen::LDLT<Matrix> ldlt(info);
      if (ldlt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      const Vector step = ldlt.solve(grad);
      // Newton decrement: the predicted improvement. Once it falls below the
      // floating-point resolution of the objective the optimum is reached even
      // when the gradient norm cannot shrink further.
      if (grad.dot(step) < 1e-10) {
        converged = true;
        break;
      }
      double alpha = 1.0;
      bool accepted = false;
      const double f0 = cur.value - 0.5 * ridge * beta.squaredNorm();
      for (int h = 0; h <= 40; ++h) {
        const Vector trial = beta + alpha * step;
        const double lt = pl_value(rs, u * trial + eta_vals) -
                          0.5 * ridge * trial.squaredNorm();
        if (std::isfinite(lt) && lt >= f0) {
          beta = trial;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        converged = grad.dot(step) < 1e-8;
        break;
      }
      cur = derivs(beta);
      if (!cur.grad.allFinite() || beta.lpNorm<Eigen::Infinity>() > 1e4) {
        ok = false;  // separation-style divergence
        break;
      }
    }
    if (ok && converged) {
      out.beta = beta;
      out.info = cur.info;
      out.value = cur.value;
      out.converged = true;
      out.ridged = ridge != 0.0;
      return out;
    }
  }
  // hand back the best ridge-stabilized iterate, flagged
  BetaDerivs cur = derivs(out.beta);
  out.info = cur.info;
  out.value = cur.value;
  out.converged = false;
  out.ridged = true;
  return out;
}

ProfileMax profile_maximizer(const LikelihoodContext& ctx, const Vector& eta_vals,
                             const Vector& start) {
  return profile_maximizer(*ctx.rs, ctx.ds->u, eta_vals, start);
}

int BetaFit::nonzero_count() const {
  int k = 0;
  for (int j = 0; j < beta.size(); ++j) k += beta[j] != 0.0;
  return k;
}

namespace {

// Maximized log profile partial likelihood over the nonzero subset of
// beta_hat; memoized per active pattern when selecting theta along a grid.
double subset_refit_value(const LikelihoodContext& ctx, const Vector& eta_vals,
                          const Vector& beta_hat,
                          std::map<std::uint64_t, double>* cache) {
  std::uint64_t mask = 0;
  IntVector nz;
  for (int j = 0; j < beta_hat.size(); ++j) {
    if (beta_hat[j] != 0.0) {
      mask |= std::uint64_t{1} << j;
      nz.push_back(j);
    }
  }
  if (cache) {
    const auto it = cache->find(mask);
    if (it != cache->end()) return it->second;
  }
  Matrix u_nz(ctx.n(), nz.size());
  Vector start(static_cast<int>(nz.size()));
  for (std::size_t i = 0; i < nz.size(); ++i) {
    u_nz.col(static_cast<int>(i)) = ctx.ds->u.col(nz[i]);
    start[static_cast<int>(i)] = beta_hat[nz[i]];
  }
  const ProfileMax prof = profile_maximizer(*ctx.rs, u_nz, eta_vals, start);
  if (cache) (*cache)[mask] = prof.value;
  return prof.value;
}

// Steps after the expansion point is fixed: Cholesky transform, the
// unpenalized/penalized split, projection, LARS, back-substitution.
BetaFit one_step_with_expansion(const LikelihoodContext& ctx, const Vector& eta_vals,
                                const Vector& beta_prev, const PenaltySpec& spec,
                                const Vector& expansion, const Matrix& info,
                                const OneStepOptions& options,
                                std::map<std::uint64_t, double>* refit_cache = nullptr) {
  const int d = ctx.ds->dim_u();
  const int n = ctx.n();

  BetaFit fit;
  fit.spec = spec;
  fit.beta = Vector::Zero(d);
  if (d == 0) {
    fit.profile_loglik = pl_value(ctx, eta_vals);
    fit.refit_loglik = fit.profile_loglik;
    fit.aic = -2.0 * fit.refit_loglik;
    return fit;
  }

  Vector pder(d);
  for (int j = 0; j < d; ++j) pder[j] = spec.deriv(j, std::abs(beta_prev[j]));
  IntVector a_set, b_set, forced;
  for (int j = 0; j < d; ++j) {
    if (pder[j] == 0.0) {
      a_set.push_back(j);
    } else if (std::isinf(pder[j])) {
      forced.push_back(j);
    } else {
      b_set.push_back(j);
    }
  }
  fit.active_set = a_set;
  fit.penalized_set = b_set;
  for (int j : forced) fit.penalized_set.push_back(j);
  std::sort(fit.penalized_set.begin(), fit.penalized_set.end());

  // Cholesky of the information, ridge retry when it is not PD
  Matrix info_r = info;
  Eigen::LLT<Matrix> llt(info_r);
  double ridge = 1e-10 * std::max(1.0, info.trace() / d);
  while (llt.info() != Eigen::Success) {
    info_r.diagonal().array() += ridge;
    ridge *= 10.0;
    llt.compute(info_r);
    if (ridge > 1e6) throw std::runtime_error("information matrix could not be stabilized");
  }
  const Matrix v = llt.matrixU();
  const Vector y = v * expansion;

  const int na = static_cast<int>(a_set.size());
  const int nb = static_cast<int>(b_set.size());
  Matrix va(d, na), vb(d, nb);
  Vector theta_b(nb), scale_b(nb);
  for (int i = 0; i < na; ++i) va.col(i) = v.col(a_set[i]);
  for (int i = 0; i < nb; ++i) {
    const int j = b_set[i];
    scale_b[i] = spec.thetas[j] / pder[j];
    vb.col(i) = v.col(j) * scale_b[i];
    theta_b[i] = spec.thetas[j];
  }

  Vector y_star = y;
  Matrix vb_star = vb;
  Eigen::ColPivHouseholderQR<Matrix> qr_a;
  if (na > 0) {
    qr_a.compute(va);
    y_star -= va * qr_a.solve(y);
    if (nb > 0) vb_star -= va * qr_a.solve(vb);
  }

  Vector beta_b = Vector::Zero(nb);
  if (nb > 0) beta_b = lars_weighted_lasso(y_star, vb_star, theta_b, static_cast<double>(n));

  Vector beta_a(na);
  if (na > 0) beta_a = qr_a.solve(y - vb * beta_b);

  for (int i = 0; i < na; ++i) fit.beta[a_set[i]] = beta_a[i];
  for (int i = 0; i < nb; ++i) {
    const double bj = beta_b[i] * scale_b[i];
    fit.beta[b_set[i]] = std::abs(bj) < options.zero_snap ? 0.0 : bj;
  }

  fit.profile_loglik = pl_value(ctx, ctx.ds->u * fit.beta + eta_vals);
  fit.refit_loglik = subset_refit_value(ctx, eta_vals, fit.beta, refit_cache);
  // SCAD leaves retained signals unpenalized, so the subset-maximized
  // likelihood is the right fit measure; the adaptive LASSO shrinks every
  // retained coefficient, and scoring the refit would hide that cost and
  // drive the selection toward over-shrunk estimates.
  const double fit_term =
      spec.kind == PenaltyKind::AdaptiveLasso ? fit.profile_loglik : fit.refit_loglik;
  fit.aic = -2.0 * fit_term + 2.0 * fit.nonzero_count();
  return fit;
}

}  // namespace

BetaFit one_step_update(const LikelihoodContext& ctx, const Vector& eta_vals,
                        const Vector& beta_prev, const PenaltySpec& spec,
                        const OneStepOptions& options) {
  if (spec.thetas.size() != ctx.ds->dim_u()) {
    throw std::invalid_argument("one theta per coefficient required");
  }
  Vector expansion;
  Matrix info;
  if (options.strict_expansion) {
    expansion = beta_prev;
    info = grad_hess_beta(ctx, beta_prev, eta_vals).info;
  } else {
    const ProfileMax prof = profile_maximizer(ctx, eta_vals, beta_prev);
    expansion = prof.beta;
    info = prof.info;
  }
  return one_step_with_expansion(ctx, eta_vals, beta_prev, spec, expansion, info, options);
}

Vector adaptive_lasso_thetas(const Vector& beta_init, double theta0) {
  Vector thetas(beta_init.size());
  for (int j = 0; j < beta_init.size(); ++j) {
    thetas[j] = beta_init[j] == 0.0 ? kInf : theta0 / std::abs(beta_init[j]);
  }
  return thetas;
}

ThetaSelection aic_select_theta(const LikelihoodContext& ctx, const Vector& eta_vals,
                                const Vector& beta_prev, PenaltyKind kind, double scad_a,
                                const std::vector<double>& theta_grid,
                                const OneStepOptions& options) {
  if (theta_grid.empty()) throw std::invalid_argument("empty theta grid");
  const int d = ctx.ds->dim_u();

  Vector expansion;
  Matrix info;
  if (options.strict_expansion) {
    expansion = beta_prev;
    info = grad_hess_beta(ctx, beta_prev, eta_vals).info;
  } else {
    const ProfileMax prof = profile_maximizer(ctx, eta_vals, beta_prev);
    expansion = prof.beta;
    info = prof.info;
  }

  ThetaSelection sel;
  bool have = false;
  std::map<std::uint64_t, double> refit_cache;
  for (double theta : theta_grid) {
    PenaltySpec spec;
    spec.kind = kind;
    spec.a = scad_a;
    spec.thetas = kind == PenaltyKind::AdaptiveLasso
                      ? adaptive_lasso_thetas(expansion, theta)
                      : Vector(Vector::Constant(d, theta));
    BetaFit fit = one_step_with_expansion(ctx, eta_vals, beta_prev, spec, expansion, info,
                                          options, &refit_cache);
    fit.theta = theta;
    const bool better =
        !have || fit.aic < sel.fit.aic ||
        (fit.aic == sel.fit.aic && (fit.nonzero_count() < sel.fit.nonzero_count() ||
                                    (fit.nonzero_count() == sel.fit.nonzero_count() &&
                                     theta > sel.theta)));
    if (better) {
      sel.theta = theta;
      sel.fit = std::move(fit);
      have = true;
    }
  }
  return sel;
}

std::vector<double> default_theta_grid() {
  std::vector<double> grid(30);
  const double lo = std::log(1e-3), hi = std::log(1.0);
  for (int i = 0; i < 30; ++i) grid[i] = std::exp(lo + (hi - lo) * i / 29.0);
  return grid;
}

std::vector<double> scaled_theta_grid(const std::vector<double>& base, int d, int n) {
  const double scale = std::sqrt(std::log(std::max(d, 2)) / static_cast<double>(n));
  std::vector<double> grid(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) grid[i] = base[i] * scale;
  return grid;
}

}  // namespace sscox
