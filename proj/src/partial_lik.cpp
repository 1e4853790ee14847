#include "sscox/partial_lik.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sscox {

namespace {

void check_lp(const RiskSet& rs, const Vector& lp) {
  if (lp.size() != static_cast<int>(rs.order.size())) {
    throw std::invalid_argument("linear predictor length mismatch");
  }
}

// exp(lp - max) in time-sorted order plus the suffix sums S0 at each position.
struct SuffixExp {
  double lp_max;
  Vector e_sorted;   // exp(lp - max), indexed by sorted position
  Vector s0;         // s0[pos] = sum_{j >= pos} e_sorted[j]
};

SuffixExp suffix_exp(const RiskSet& rs, const Vector& lp) {
  const int n = static_cast<int>(rs.order.size());
  SuffixExp s;
  s.lp_max = lp.maxCoeff();
  s.e_sorted.resize(n);
  s.s0.resize(n);
  double acc = 0.0;
  for (int pos = n - 1; pos >= 0; --pos) {
    s.e_sorted[pos] = std::exp(lp[rs.order[pos]] - s.lp_max);
    acc += s.e_sorted[pos];
    s.s0[pos] = acc;
  }
  return s;
}

}  // namespace

double pl_value(const RiskSet& rs, const Vector& lp) {
  check_lp(rs, lp);
  const int n = static_cast<int>(rs.order.size());
  // running-max log-sum-exp over the suffixes: exact for arbitrary spreads,
  // unlike a single global max subtraction
  Vector log_s0(n);
  double m = -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (int pos = n - 1; pos >= 0; --pos) {
    const double v = lp[rs.order[pos]];
    if (v > m) {
      acc = acc * std::exp(m - v) + 1.0;
      m = v;
    } else {
      acc += std::exp(v - m);
    }
    log_s0[pos] = m + std::log(acc);
  }
  double value = 0.0;
  for (int p = 0; p < rs.n_failures(); ++p) {
    value += lp[rs.failure_subject[p]] - log_s0[rs.failure_start[p]];
  }
  return value;
}

Vector pl_grad(const RiskSet& rs, const Vector& lp) {
  check_lp(rs, lp);
  const int n = static_cast<int>(rs.order.size());
  const SuffixExp s = suffix_exp(rs, lp);
  // cumulative 1/S0 over failures whose risk set contains each position
  Vector cum = Vector::Zero(n + 1);
  for (int p = 0; p < rs.n_failures(); ++p) cum[rs.failure_start[p]] += 1.0 / s.s0[rs.failure_start[p]];
  for (int pos = 1; pos <= n; ++pos) cum[pos] += cum[pos - 1];
  Vector g = Vector::Zero(n);
  for (int pos = 0; pos < n; ++pos) {
    const int k = rs.order[pos];
    g[k] = -s.e_sorted[pos] * cum[pos];
  }
  for (int p = 0; p < rs.n_failures(); ++p) g[rs.failure_subject[p]] += 1.0;
  return g;
}

Matrix pl_hess_quad(const RiskSet& rs, const Vector& lp, const Matrix& x) {
  check_lp(rs, lp);
  const int n = static_cast<int>(rs.order.size());
  if (x.rows() != n) throw std::invalid_argument("design row count mismatch");
  const int m = static_cast<int>(x.cols());
  const SuffixExp s = suffix_exp(rs, lp);
  const int nf = rs.n_failures();

  // sum_p diag(pi_p) collapses to e_k * cumhaz(position of k)
  Vector cum = Vector::Zero(n + 1);
  for (int p = 0; p < nf; ++p) cum[rs.failure_start[p]] += 1.0 / s.s0[rs.failure_start[p]];
  for (int pos = 1; pos <= n; ++pos) cum[pos] += cum[pos - 1];
  Vector wdiag(n);  // in sorted position order
  for (int pos = 0; pos < n; ++pos) wdiag[pos] = s.e_sorted[pos] * cum[pos];

  Matrix h = Matrix::Zero(m, m);
  {
    Matrix xs(n, m);
    for (int pos = 0; pos < n; ++pos) {
      xs.row(pos) = x.row(rs.order[pos]) * std::sqrt(wdiag[pos]);
    }
    h.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose());
  }

  // sum_p (X' pi_p)(X' pi_p)': suffix sums of e_k x_k snapshotted per failure
  Matrix g(m, nf);
  {
    Vector acc = Vector::Zero(m);
    int p = nf - 1;
    for (int pos = n - 1; pos >= 0 && p >= 0; --pos) {
      acc += s.e_sorted[pos] * x.row(rs.order[pos]).transpose();
      while (p >= 0 && rs.failure_start[p] == pos) {
        g.col(p) = acc / s.s0[pos];
        --p;
      }
    }
  }
  h.selfadjointView<Eigen::Lower>().rankUpdate(g, -1.0);
  Matrix out = h.selfadjointView<Eigen::Lower>();
  return out;
}

double pl_value(const LikelihoodContext& ctx, const Vector& lp) { return pl_value(*ctx.rs, lp); }

Vector pl_grad(const LikelihoodContext& ctx, const Vector& lp) { return pl_grad(*ctx.rs, lp); }

Matrix pl_hess_quad(const LikelihoodContext& ctx, const Vector& lp, const Matrix& x) {
  return pl_hess_quad(*ctx.rs, lp, x);
}

Matrix pl_score_residuals(const LikelihoodContext& ctx, const Vector& lp, const Matrix& x) {
  const auto& rs = *ctx.rs;
  check_lp(rs, lp);
  const int n = ctx.n();
  const int m = static_cast<int>(x.cols());
  const SuffixExp s = suffix_exp(rs, lp);
  Matrix out = Matrix::Zero(n, m);
  Vector acc = Vector::Zero(m);
  int p = rs.n_failures() - 1;
  for (int pos = n - 1; pos >= 0 && p >= 0; --pos) {
    acc += s.e_sorted[pos] * x.row(rs.order[pos]).transpose();
    while (p >= 0 && rs.failure_start[p] == pos) {
      const int subject = rs.failure_subject[p];
      out.row(subject) = x.row(subject) - acc.transpose() / s.s0[pos];
      --p;
    }
  }
  return out;
}

double neg_log_pl(const LikelihoodContext& ctx, const Vector& beta, const Vector& eta_vals) {
  if (eta_vals.size() != ctx.n()) throw std::invalid_argument("eta length mismatch");
  if (beta.size() != ctx.ds->dim_u()) throw std::invalid_argument("beta length mismatch");
  const Vector lp = ctx.ds->u * beta + eta_vals;
  return -pl_value(ctx, lp) / static_cast<double>(ctx.n());
}

BetaDerivs grad_hess_beta(const LikelihoodContext& ctx, const Vector& beta,
                          const Vector& eta_vals) {
  if (beta.size() != ctx.ds->dim_u()) throw std::invalid_argument("beta length mismatch");
  const Vector lp = ctx.ds->u * beta + eta_vals;
  BetaDerivs out;
  out.value = pl_value(ctx, lp);
  out.grad = ctx.ds->u.transpose() * pl_grad(ctx, lp);
  out.info = pl_hess_quad(ctx, lp, ctx.ds->u);
  return out;
}

EtaObjective EtaProblem::eval(const Vector& coef, double lambda, bool with_derivs) const {
  if (coef.size() != psi.cols()) throw std::invalid_argument("coefficient length mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const double n = static_cast<double>(ctx.n());
  const Vector lp = offset + psi * coef;
  const Vector rc = rpen * coef;
  EtaObjective out;
  out.value = -pl_value(ctx, lp) / n + lambda * coef.dot(rc) + ridge * coef.squaredNorm();
  if (with_derivs) {
    out.grad = -(psi.transpose() * pl_grad(ctx, lp)) / n + 2.0 * lambda * rc + 2.0 * ridge * coef;
    out.hess = pl_hess_quad(ctx, lp, psi) / n + 2.0 * lambda * rpen;
    out.hess.diagonal().array() += 2.0 * ridge;
  }
  return out;
}

double EtaProblem::value_only(const Vector& coef, double lambda) const {
  const Vector lp = offset + psi * coef;
  return -pl_value(ctx, lp) / static_cast<double>(ctx.n()) +
         lambda * coef.dot(rpen * coef) + ridge * coef.squaredNorm();
}

EtaProblem make_eta_problem(const LikelihoodContext& ctx, const SplineBasis& basis,
                            const Vector& beta) {
  EtaProblem prob;
  prob.ctx = ctx;
  prob.psi = basis.design(ctx.ds->w);
  prob.rpen = basis.penalty();
  prob.offset = ctx.ds->dim_u() > 0 ? Vector(ctx.ds->u * beta) : Vector(Vector::Zero(ctx.n()));
  return prob;
}

EtaObjective penalized_eta_objective(const LikelihoodContext& ctx, const SplineBasis& basis,
                                     const Vector& beta, const Vector& coef, double lambda) {
  return make_eta_problem(ctx, basis, beta).eval(coef, lambda, true);
}

}  // namespace sscox
