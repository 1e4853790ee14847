#include "sscox/kl_select.hpp"

#include <cmath>
#include <stdexcept>

namespace sscox {

double BiasedWeights::a(int p, int k) const {
  if (rs.position[k] < rs.failure_start[p]) return 0.0;
  return std::exp(u_beta[k]);
}

BiasedWeights biased_weights(const SurvivalDataset& ds, const RiskSet& rs, const Vector& beta) {
  if (beta.size() != ds.dim_u()) throw std::invalid_argument("beta length mismatch");
  BiasedWeights w;
  w.u_beta = ds.dim_u() > 0 ? Vector(ds.u * beta) : Vector(Vector::Zero(ds.n()));
  w.rs = rs;
  return w;
}

namespace {

// Per failure: log( (1/n) sum_k a_p(W_k) e^{eta_k} ) and the weighted mean of
// f under those weights, in one descending sweep over the time order.
struct WeightedSums {
  Vector log_int;
  Vector mean_f;
};

WeightedSums weighted_sums(const Vector& eta, const Vector& f, const BiasedWeights& w) {
  const int n = w.n();
  const int nf = w.n_failures();
  const auto& rs = w.rs;
  const Vector x = w.u_beta + eta;
  const double x_max = x.maxCoeff();
  WeightedSums out;
  out.log_int.resize(nf);
  out.mean_f.resize(nf);
  double s0 = 0.0, s1 = 0.0;
  int p = nf - 1;
  for (int pos = n - 1; pos >= 0 && p >= 0; --pos) {
    const int k = rs.order[pos];
    const double e = std::exp(x[k] - x_max);
    s0 += e;
    s1 += e * f[k];
    while (p >= 0 && rs.failure_start[p] == pos) {
      out.log_int[p] = std::log(s0) + x_max - std::log(static_cast<double>(n));
      out.mean_f[p] = s1 / s0;
      --p;
    }
  }
  return out;
}

// sum over failures of the normalized weight vectors under eta: the gradient
// building block of the projection objective.
Vector pi_sum(const Vector& eta, const BiasedWeights& w) {
  Vector delta = Vector::Zero(w.n());
  for (int p = 0; p < w.n_failures(); ++p) delta[w.rs.failure_subject[p]] += 1.0;
  return delta - pl_grad(w.rs, w.u_beta + eta);
}

}  // namespace

double kl_distance(const Vector& eta1, const Vector& eta2, const BiasedWeights& weights) {
  if (eta1.size() != weights.n() || eta2.size() != weights.n()) {
    throw std::invalid_argument("eta length mismatch");
  }
  const Vector diff = eta1 - eta2;
  const WeightedSums s1 = weighted_sums(eta1, diff, weights);
  const WeightedSums s2 = weighted_sums(eta2, diff, weights);
  double total = 0.0;
  for (int p = 0; p < weights.n_failures(); ++p) {
    total += s1.mean_f[p] - s1.log_int[p] + s2.log_int[p];
  }
  return total / static_cast<double>(weights.n_failures());
}

KlProjection kl_project(const Vector& eta_hat, const Matrix& psi_reduced,
                        const BiasedWeights& weights) {
  const int n = weights.n();
  const int nf = weights.n_failures();
  const int m = static_cast<int>(psi_reduced.cols());
  if (eta_hat.size() != n || psi_reduced.rows() != n) {
    throw std::invalid_argument("projection inputs disagree on n");
  }

  KlProjection proj;
  proj.coef = Vector::Zero(m);
  if (m == 0) {  // constant model: the zero function
    proj.eta_tilde = Vector::Zero(n);
    proj.converged = true;
    return proj;
  }

  // The reduced design usually carries a numerical null space (collinear
  // kernel columns). Optimize over an orthonormal basis of its column space;
  // null directions never move the fitted values, and iterating through them
  // amplifies rounding noise until Newton stalls.
  Eigen::BDCSVD<Matrix> svd(psi_reduced, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double sigma_max = svd.singularValues()[0];
  int rank = 0;
  while (rank < svd.singularValues().size() &&
         svd.singularValues()[rank] > 1e-10 * sigma_max) {
    ++rank;
  }
  const Matrix basis = svd.matrixU().leftCols(rank);  // orthonormal columns

  // stationarity target: weighted means of the directions under eta_hat
  const Vector g0 = basis.transpose() * pi_sum(eta_hat, weights) / static_cast<double>(nf);

  auto objective = [&](const Vector& gamma) {
    const WeightedSums s = weighted_sums(basis * gamma, Vector::Zero(n), weights);
    return s.log_int.sum() / static_cast<double>(nf) - g0.dot(gamma);
  };

  Vector gamma = Vector::Zero(rank);
  double f = objective(gamma);
  for (int it = 0; it < 100; ++it) {
    const Vector eta = basis * gamma;
    const Vector grad = basis.transpose() * pi_sum(eta, weights) / static_cast<double>(nf) - g0;
    proj.grad_norm = grad.norm();
    proj.iterations = it;
    if (proj.grad_norm < 1e-11) break;
    Matrix hess = pl_hess_quad(weights.rs, weights.u_beta + eta, basis) / static_cast<double>(nf);
    hess.diagonal().array() += 1e-10 * std::max(1.0, hess.trace() / rank);
    Eigen::LDLT<Matrix> ldlt(hess);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("projection Hessian failed");
    const Vector step = ldlt.solve(-grad);
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 40; ++h) {
      const Vector trial = gamma + alpha * step;
      const double ft = objective(trial);
      if (std::isfinite(ft) && ft <= f) {
        gamma = trial;
        f = ft;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  proj.eta_tilde = basis * gamma;
  proj.grad_norm =
      (basis.transpose() * pi_sum(proj.eta_tilde, weights) / static_cast<double>(nf) - g0).norm();
  proj.converged = proj.grad_norm < 1e-8;
  // minimum-norm coefficients on the original columns
  proj.coef = svd.matrixV().leftCols(rank) *
              (svd.singularValues().head(rank).asDiagonal().inverse() * gamma);
  return proj;
}

std::vector<KLReport> kl_ratio_report(const Vector& eta_hat, const SplineBasis& basis,
                                      const Matrix& psi_full,
                                      const std::vector<AnovaStructure>& candidates,
                                      const BiasedWeights& weights, double threshold) {
  const Vector eta_c = Vector::Zero(weights.n());
  const double kl_full_const = kl_distance(eta_hat, eta_c, weights);

  std::vector<KLReport> reports;
  reports.reserve(candidates.size());
  for (const auto& candidate : candidates) {
    const IntVector cols = basis.columns_for(candidate);  // throws when not nested
    Matrix psi_reduced(psi_full.rows(), static_cast<int>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      psi_reduced.col(static_cast<int>(j)) = psi_full.col(cols[j]);
    }
    const KlProjection proj = kl_project(eta_hat, psi_reduced, weights);
    if (!proj.converged) {
      throw std::runtime_error("KL projection did not converge for " + candidate.label());
    }
    KLReport rep;
    rep.candidate = candidate;
    rep.kl_full_reduced = kl_distance(eta_hat, proj.eta_tilde, weights);
    rep.kl_reduced_const = kl_distance(proj.eta_tilde, eta_c, weights);
    rep.kl_full_const = kl_full_const;
    rep.ratio = rep.kl_full_reduced / rep.kl_full_const;
    rep.feasible = rep.ratio < threshold;
    rep.pythagoras_defect =
        std::abs(rep.kl_full_const - rep.kl_full_reduced - rep.kl_reduced_const);
    reports.push_back(rep);
  }
  return reports;
}

}  // namespace sscox
