#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sscox/beta_solver.hpp"
#include "test_util.hpp"

using namespace sscox;

namespace {

// weighted-lasso objective evaluated directly, for grid-search oracles
double lasso_objective(const Vector& y, const Matrix& v, const Vector& b, const Vector& w,
                       double n) {
  double pen = 0.0;
  for (int j = 0; j < b.size(); ++j) pen += w[j] * std::abs(b[j]);
  return 0.5 * (y - v * b).squaredNorm() + n * pen;
}

}  // namespace

TEST_CASE("SCAD derivative values") {
  CHECK(scad_deriv(0.3, 3.7, 0.0) == doctest::Approx(0.3));
  CHECK(scad_deriv(0.2, 3.7, 1.0) == 0.0);
  CHECK(scad_deriv(0.2, 3.7, 0.4) == doctest::Approx(0.34 / 2.7).epsilon(1e-12));
  // continuity across the joints
  CHECK(scad_deriv(0.2, 3.7, 0.2 - 1e-9) == doctest::Approx(scad_deriv(0.2, 3.7, 0.2 + 1e-9))
                                                .epsilon(1e-6));
  CHECK_THROWS_AS(scad_deriv(0.2, 1.5, 0.1), std::invalid_argument);
}

TEST_CASE("SCAD value is continuous and levels off") {
  const double theta = 0.25, a = 3.7;
  CHECK(scad_value(theta, a, theta) == doctest::Approx(theta * theta));
  CHECK(scad_value(theta, a, a * theta) ==
        doctest::Approx(theta * theta * (a + 1.0) / 2.0).epsilon(1e-12));
  CHECK(scad_value(theta, a, 10.0) == scad_value(theta, a, 5.0));
}

TEST_CASE("orthonormal design reduces to soft thresholding") {
  Rng rng(11);
  const int n = 40, p = 4;
  Matrix raw(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) raw(i, j) = rng.normal();
  }
  const Matrix v = Eigen::HouseholderQR<Matrix>(raw).householderQ() * Matrix::Identity(n, p);
  Vector y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal() * 3.0;
  const double theta = 0.02, scale_n = 30.0;
  const Vector b = lars_weighted_lasso(y, v, Vector::Constant(p, theta), scale_n);
  const Vector z = v.transpose() * y;
  for (int j = 0; j < p; ++j) {
    const double soft = std::copysign(std::max(std::abs(z[j]) - scale_n * theta, 0.0), z[j]);
    CHECK(b[j] == doctest::Approx(soft).epsilon(1e-9));
  }
}

TEST_CASE("two-column problems match a brute-force grid search") {
  for (std::uint64_t seed : {21, 22, 23}) {
    Rng rng(seed);
    const int n = 30;
    Matrix v(n, 2);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      v(i, 0) = rng.normal();
      v(i, 1) = 0.6 * v(i, 0) + 0.8 * rng.normal();
      y[i] = 1.2 * v(i, 0) - 0.4 * v(i, 1) + 0.5 * rng.normal();
    }
    Vector w(2);
    w << 0.02 + 0.02 * rng.uniform(), 0.02 + 0.02 * rng.uniform();
    const double scale_n = n;
    const Vector b = lars_weighted_lasso(y, v, w, scale_n);

    Vector best(2);
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = -400; i <= 400; ++i) {
      for (int j = -400; j <= 400; ++j) {
        Vector cand(2);
        cand << i * 0.005, j * 0.005;
        const double val = lasso_objective(y, v, cand, w, scale_n);
        if (val < best_val) {
          best_val = val;
          best = cand;
        }
      }
    }
    CHECK(std::abs(b[0] - best[0]) <= 0.005);
    CHECK(std::abs(b[1] - best[1]) <= 0.005);
  }
}

TEST_CASE("vanishing and saturating penalties") {
  Rng rng(31);
  const int n = 25, p = 3;
  Matrix v(n, p);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) v(i, j) = rng.normal();
    y[i] = rng.normal();
  }
  const Vector ls = (v.transpose() * v).ldlt().solve(v.transpose() * y);
  const Vector b_tiny = lars_weighted_lasso(y, v, Vector::Constant(p, 1e-10), n);
  CHECK((b_tiny - ls).lpNorm<Eigen::Infinity>() < 1e-6);

  const double big = (v.transpose() * y).lpNorm<Eigen::Infinity>() / n + 1.0;
  const Vector b_zero = lars_weighted_lasso(y, v, Vector::Constant(p, big), n);
  CHECK(b_zero.norm() == 0.0);
  for (int j = 0; j < p; ++j) CHECK(b_zero[j] == 0.0);  // bit-zero
}

TEST_CASE("KKT conditions hold on random problems") {
  for (std::uint64_t seed : {41, 42, 43, 44}) {
    Rng rng(seed);
    const int n = 50;
    const int p = 3 + static_cast<int>(rng.below(6));
    Matrix v(n, p);
    Vector y(n), w(p);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) v(i, j) = rng.normal();
      y[i] = rng.normal() * 2.0;
    }
    for (int j = 0; j < p; ++j) w[j] = 0.005 + 0.05 * rng.uniform();
    const Vector b = lars_weighted_lasso(y, v, w, n);
    const Vector corr = v.transpose() * (y - v * b);
    for (int j = 0; j < p; ++j) {
      CHECK(std::abs(corr[j]) <= n * w[j] + 1e-8);
      if (b[j] != 0.0) {
        CHECK(std::abs(corr[j] - std::copysign(n * w[j], b[j])) <= 1e-8);
      }
    }
  }
}

TEST_CASE("one-step update with no active penalty returns the profile maximizer") {
  const SurvivalDataset ds = test::random_dataset(80, 3, 1, 51, 0.2);
  const RiskSet rs = build_risk_sets(ds);
  LikelihoodContext ctx{&ds, &rs};
  const Vector eta = Vector::Zero(80);
  const ProfileMax prof = profile_maximizer(ctx, eta, Vector::Zero(3));
  REQUIRE(prof.converged);

  PenaltySpec spec;
  spec.kind = PenaltyKind::Scad;
  spec.a = 3.7;
  spec.thetas = Vector::Constant(3, 1e-4);
  // previous estimate far beyond a*theta: p' = 0 for every coordinate
  const Vector beta_prev = Vector::Constant(3, 1.0);
  const BetaFit fit = one_step_update(ctx, eta, beta_prev, spec);
  CHECK(fit.active_set.size() == 3);
  CHECK((fit.beta - prof.beta).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("huge thetas shrink everything to exact zero") {
  const SurvivalDataset ds = test::random_dataset(60, 4, 1, 52, 0.2);
  const RiskSet rs = build_risk_sets(ds);
  LikelihoodContext ctx{&ds, &rs};
  PenaltySpec spec;
  spec.thetas = Vector::Constant(4, 50.0);
  const BetaFit fit = one_step_update(ctx, Vector::Zero(60), Vector::Zero(4), spec);
  for (int j = 0; j < 4; ++j) CHECK(fit.beta[j] == 0.0);
  CHECK(fit.nonzero_count() == 0);
}

TEST_CASE("penalty disabled reproduces the unpenalized optimum") {
  const SurvivalDataset ds = test::random_dataset(70, 3, 1, 53, 0.25);
  const RiskSet rs = build_risk_sets(ds);
  LikelihoodContext ctx{&ds, &rs};
  PenaltySpec spec;
  spec.kind = PenaltyKind::None;
  spec.thetas = Vector::Zero(3);
  const BetaFit fit = one_step_update(ctx, Vector::Zero(70), Vector::Zero(3), spec);
  const ProfileMax prof = profile_maximizer(ctx, Vector::Zero(70), Vector::Zero(3));
  CHECK((fit.beta - prof.beta).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("column permutation permutes the solution") {
  const SurvivalDataset ds = test::random_dataset(90, 4, 1, 54, 0.2);
  const RiskSet rs = build_risk_sets(ds);
  LikelihoodContext ctx{&ds, &rs};
  PenaltySpec spec;
  spec.thetas = Vector::Constant(4, 0.05);
  const Vector beta_prev = Vector::Zero(4);
  const BetaFit fit = one_step_update(ctx, Vector::Zero(90), beta_prev, spec);

  const IntVector perm{2, 0, 3, 1};
  Matrix u_perm(ds.n(), 4);
  for (int j = 0; j < 4; ++j) u_perm.col(j) = ds.u.col(perm[j]);
  const SurvivalDataset ds_p = make_dataset(ds.times, ds.events, u_perm, ds.w, false);
  const RiskSet rs_p = build_risk_sets(ds_p);
  LikelihoodContext ctx_p{&ds_p, &rs_p};
  const BetaFit fit_p = one_step_update(ctx_p, Vector::Zero(90), beta_prev, spec);
  for (int j = 0; j < 4; ++j) {
    CHECK(fit_p.beta[j] == doctest::Approx(fit.beta[perm[j]]).epsilon(1e-10));
  }
}

TEST_CASE("adaptive lasso weights") {
  Vector init(2);
  init << 2.0, 0.5;
  const Vector thetas = adaptive_lasso_thetas(init, 0.1);
  CHECK(thetas[0] == doctest::Approx(0.05));
  CHECK(thetas[1] == doctest::Approx(0.2));

  Vector with_zero(2);
  with_zero << 0.0, 1.0;
  const Vector t2 = adaptive_lasso_thetas(with_zero, 0.1);
  CHECK(std::isinf(t2[0]));

  // a zero initial estimate keeps the coefficient out of the model
  const SurvivalDataset ds = test::random_dataset(60, 2, 1, 55, 0.2);
  const RiskSet rs = build_risk_sets(ds);
  LikelihoodContext ctx{&ds, &rs};
  PenaltySpec spec;
  spec.kind = PenaltyKind::AdaptiveLasso;
  spec.thetas = t2;
  const BetaFit fit = one_step_update(ctx, Vector::Zero(60), Vector::Zero(2), spec);
  CHECK(fit.beta[0] == 0.0);
}

TEST_CASE("theta selection by AIC") {
  const SurvivalDataset ds = test::random_dataset(100, 3, 1, 56, 0.2);
  const RiskSet rs = build_risk_sets(ds);
  LikelihoodContext ctx{&ds, &rs};
  const Vector eta = Vector::Zero(100);
  const Vector beta_prev = Vector::Zero(3);

  const ThetaSelection single =
      aic_select_theta(ctx, eta, beta_prev, PenaltyKind::Scad, 3.7, {0.07});
  CHECK(single.theta == 0.07);

  const ThetaSelection sel = aic_select_theta(ctx, eta, beta_prev, PenaltyKind::Scad, 3.7,
                                              scaled_theta_grid(default_theta_grid(), 3, 100));
  CHECK(sel.fit.aic == doctest::Approx(-2.0 * sel.fit.refit_loglik +
                                       2.0 * sel.fit.nonzero_count()));
  CHECK(sel.fit.refit_loglik >= sel.fit.profile_loglik - 1e-9);
  // selected theta minimizes the criterion across the grid
  for (double theta : scaled_theta_grid(default_theta_grid(), 3, 100)) {
    const ThetaSelection other =
        aic_select_theta(ctx, eta, beta_prev, PenaltyKind::Scad, 3.7, {theta});
    CHECK(sel.fit.aic <= other.fit.aic + 1e-12);
  }
}
