#include "sscox/inference.hpp"

#include <cmath>
#include <stdexcept>

namespace sscox {

SandwichCov sandwich_cov(const LikelihoodContext& ctx, const Vector& beta,
                         const Vector& eta_vals, const PenaltySpec& spec) {
  SandwichCov out;
  for (int j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) out.active.push_back(j);
  }
  if (out.active.empty()) throw std::invalid_argument("sandwich needs a nonempty active set");

  const int na = static_cast<int>(out.active.size());
  Matrix ua(ctx.n(), na);
  for (int i = 0; i < na; ++i) ua.col(i) = ctx.ds->u.col(out.active[i]);
  const Vector lp = ctx.ds->u * beta + eta_vals;

  out.sigma_theta_diag.resize(na);
  for (int i = 0; i < na; ++i) {
    const int j = out.active[i];
    const double b = std::abs(beta[j]);
    out.sigma_theta_diag[i] =
        spec.kind == PenaltyKind::None ? 0.0 : spec.deriv(j, b) / b;
  }

  Matrix bread = pl_hess_quad(ctx, lp, ua);  // -d2 l_p over the active block
  bread.diagonal() += static_cast<double>(ctx.n()) * out.sigma_theta_diag;
  Eigen::LDLT<Matrix> ldlt(bread);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("singular bread matrix");

  const Matrix resid = pl_score_residuals(ctx, lp, ua);
  Matrix meat = Matrix::Zero(na, na);
  meat.selfadjointView<Eigen::Lower>().rankUpdate(resid.transpose());
  const Matrix meat_s = meat.selfadjointView<Eigen::Lower>();

  const Matrix half = ldlt.solve(meat_s);
  Matrix cov = ldlt.solve(half.transpose());
  out.cov = 0.5 * (cov + cov.transpose());
  out.se.resize(na);
  for (int i = 0; i < na; ++i) out.se[i] = std::sqrt(std::max(out.cov(i, i), 0.0));
  return out;
}

SandwichCov sandwich_cov(const SurvivalDataset& ds, const RiskSet& rs, const FitResult& fit) {
  LikelihoodContext ctx{&ds, &rs};
  return sandwich_cov(ctx, fit.beta_fit.beta, fit.eta_fit.fitted, fit.beta_fit.spec);
}

}  // namespace sscox
