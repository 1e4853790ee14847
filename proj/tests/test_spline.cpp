#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>

#include "sscox/kernel.hpp"
#include "sscox/spline.hpp"
#include "test_util.hpp"

using namespace sscox;

namespace {

// composite Simpson with explicit split points, exact enough for the
// piecewise-quartic kernels
double integrate(const std::function<double(double)>& f, std::vector<double> splits) {
  splits.insert(splits.begin(), 0.0);
  splits.push_back(1.0);
  std::sort(splits.begin(), splits.end());
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < splits.size(); ++s) {
    const double a = splits[s], b = splits[s + 1];
    if (b - a < 1e-14) continue;
    const int m = 200;
    const double h = (b - a) / m;
    double acc = f(a) + f(b);
    for (int i = 1; i < m; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    total += acc * h / 3.0;
  }
  return total;
}

}  // namespace

TEST_CASE("knot counts") {
  CHECK(knot_count(877, 877) == 151);
  CHECK(knot_count(150, 150) == 75);
  CHECK(knot_count(5, 5) == 5);
  CHECK(knot_count(10, 4) == 4);  // capped at the distinct rows
}

TEST_CASE("kernel point values and symmetry") {
  CHECK(cubic_kernel(0.0, 0.0) == doctest::Approx(1.0 / 120.0).epsilon(1e-12));
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(), y = rng.uniform();
    CHECK(cubic_kernel(x, y) == doctest::Approx(cubic_kernel(y, x)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(cubic_kernel(-0.1, 0.5), std::domain_error);
}

TEST_CASE("kernel matrix is positive semidefinite") {
  Rng rng(9);
  const int m = 20;
  Matrix k(m, m);
  Vector pts(m);
  for (int i = 0; i < m; ++i) pts[i] = rng.uniform();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) k(i, j) = cubic_kernel(pts[i], pts[j]);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(k);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("design dimensions") {
  const SurvivalDataset ds1 = test::random_dataset(10, 0, 1, 21);
  const SplineBasis b1 = build_basis(ds1, {0, 2, 4, 6, 8}, AnovaStructure::univariate());
  CHECK(b1.null_dim() == 1);
  CHECK(b1.cols() == 6);
  CHECK(b1.design(ds1.w).cols() == 6);

  const SurvivalDataset ds2 = test::random_dataset(12, 0, 2, 22);
  const SplineBasis b2 = build_basis(ds2, {0, 1, 2, 3}, AnovaStructure::additive());
  CHECK(b2.null_dim() == 2);
  CHECK(b2.cols() == 2 + 2 * 4);

  const SplineBasis b3 = build_basis(ds2, {0, 1, 2, 3}, AnovaStructure::full());
  CHECK(b3.null_dim() == 3);
  CHECK(b3.cols() == 3 + 3 * 4);
}

TEST_CASE("invalid structures") {
  const SurvivalDataset ds = test::random_dataset(10, 0, 1, 23);
  CHECK_THROWS_AS(build_basis(ds, {0, 1}, AnovaStructure::additive()), std::invalid_argument);
  AnovaStructure bad;
  bad.main_w1 = true;
  bad.interaction = true;
  CHECK_THROWS_AS(bad.check_valid(2), std::invalid_argument);
}

TEST_CASE("every univariate basis column integrates to zero") {
  const SurvivalDataset ds = test::random_dataset(15, 0, 1, 31);
  const SplineBasis basis = build_basis(ds, select_knots(ds, 5), AnovaStructure::univariate());
  for (int col = 0; col < basis.cols(); col += 7) {
    auto f = [&](double w) {
      Matrix pt(1, 1);
      pt(0, 0) = w;
      return basis.design(pt)(0, col);
    };
    std::vector<double> splits;
    for (int l = 0; l < basis.n_knots(); ++l) splits.push_back(basis.knots(l, 0));
    CHECK(std::abs(integrate(f, splits)) < 1e-8);
  }
}

TEST_CASE("bivariate interaction columns integrate to zero over the square") {
  const SurvivalDataset ds = test::random_dataset(9, 0, 2, 33);
  const SplineBasis basis = build_basis(ds, {0, 3, 6}, AnovaStructure::full());
  // a null column and one kernel column per term
  for (int col : {0, 2, basis.null_dim(), basis.null_dim() + basis.n_knots(),
                  basis.null_dim() + 2 * basis.n_knots() + 1}) {
    auto f2 = [&](double w1, double w2) {
      Matrix pt(1, 2);
      pt << w1, w2;
      return basis.design(pt)(0, col);
    };
    auto outer = [&](double w1) {
      auto inner = [&](double w2) { return f2(w1, w2); };
      std::vector<double> splits2;
      for (int l = 0; l < basis.n_knots(); ++l) splits2.push_back(basis.knots(l, 1));
      return integrate(inner, splits2);
    };
    std::vector<double> splits1;
    for (int l = 0; l < basis.n_knots(); ++l) splits1.push_back(basis.knots(l, 0));
    CHECK(std::abs(integrate(outer, splits1)) < 1e-8);
  }
}

TEST_CASE("penalty vanishes exactly on the null space") {
  const SurvivalDataset ds = test::random_dataset(12, 0, 2, 41);
  const SplineBasis basis = build_basis(ds, {0, 2, 4}, AnovaStructure::additive());
  const Matrix r = basis.penalty();
  Vector c = Vector::Zero(basis.cols());
  c[0] = 1.3;
  c[1] = -0.4;
  CHECK(c.dot(r * c) == 0.0);
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    for (int j = 0; j < c.size(); ++j) c[j] = rng.normal();
    CHECK(c.dot(r * c) >= -1e-10);
  }
}

TEST_CASE("evaluate is linear and consistent with the design matrix") {
  const SurvivalDataset ds = test::random_dataset(14, 0, 1, 51);
  const SplineBasis basis = build_basis(ds, select_knots(ds, 7), AnovaStructure::univariate());
  const Vector zero = Vector::Zero(basis.cols());
  Matrix grid(101, 1);
  for (int i = 0; i <= 100; ++i) grid(i, 0) = i / 100.0;
  CHECK(evaluate(basis, zero, grid).norm() == 0.0);
  CHECK(evaluate(basis, zero, grid).size() == 101);

  Rng rng(4);
  Vector c(basis.cols());
  for (int j = 0; j < c.size(); ++j) c[j] = rng.normal();
  const Vector at_data = evaluate(basis, c, ds.w);
  const Vector via_design = basis.design(ds.w) * c;
  CHECK((at_data - via_design).norm() == 0.0);
  CHECK_THROWS_AS(evaluate(basis, Vector::Zero(basis.cols() + 1), grid), std::invalid_argument);
}

TEST_CASE("knot selection is seeded and permutation-invariant by value") {
  const SurvivalDataset ds = test::random_dataset(40, 0, 1, 61);
  const IntVector k1 = select_knots(ds, 99);
  const IntVector k2 = select_knots(ds, 99);
  CHECK(k1 == k2);
  CHECK(static_cast<int>(k1.size()) == knot_count(40, 40));

  // permute rows; selected knot values must not change
  std::vector<int> perm(ds.n());
  for (int i = 0; i < ds.n(); ++i) perm[i] = (i * 7 + 3) % ds.n();
  Vector times(ds.n());
  Eigen::VectorXi events(ds.n());
  Matrix u(ds.n(), ds.dim_u()), w(ds.n(), ds.dim_w());
  for (int i = 0; i < ds.n(); ++i) {
    times[i] = ds.times[perm[i]];
    events[i] = ds.events[perm[i]];
    u.row(i) = ds.u.row(perm[i]);
    w.row(i) = ds.w.row(perm[i]);
  }
  const SurvivalDataset ds_p = make_dataset(times, events, u, w, false);
  const IntVector kp = select_knots(ds_p, 99);
  REQUIRE(kp.size() == k1.size());
  for (std::size_t l = 0; l < k1.size(); ++l) {
    CHECK(ds_p.w(kp[l], 0) == ds.w(k1[l], 0));
  }
}
