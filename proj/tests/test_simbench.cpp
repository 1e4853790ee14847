#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sscox/simbench.hpp"

using namespace sscox;

TEST_CASE("truth functions") {
  CHECK(eta0a(0.25) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eta0a(0.5) == doctest::Approx(1.5).epsilon(1e-12));
  // both truths integrate to (almost) zero
  for (auto f : {eta0a, eta0b}) {
    const int m = 4000;
    double acc = f(0.0) + f(1.0);
    for (int i = 1; i < m; ++i) acc += f(i / double(m)) * (i % 2 == 1 ? 4.0 : 2.0);
    CHECK(std::abs(acc / (3.0 * m)) < 1e-3);
  }
}

TEST_CASE("censoring calibration is monotone and accurate") {
  Scenario sc;
  sc.seed = 2;
  const double r23 = calibrate_censoring(sc, 0.23);
  const double r40 = calibrate_censoring(sc, 0.40);
  CHECK(r23 > 0.0);
  CHECK(r40 > r23);
  CHECK(calibrate_censoring(sc, 0.0) == 0.0);

  // empirical rate on a large simulated draw within one point of the target
  for (double target : {0.23, 0.40}) {
    const double rate = calibrate_censoring(sc, target);
    Scenario big = sc;
    big.n = 100000;
    const SurvivalDataset ds = gen_data(big, rate, 77);
    const double censored = 1.0 - ds.events.cast<double>().mean();
    CHECK(std::abs(censored - target) <= 0.01);
  }
}

TEST_CASE("generated data matches the scenario") {
  Scenario sc;
  sc.n = 400;
  sc.q = 2;
  sc.eta0 = TrueEta::Mix73;
  const SurvivalDataset ds = gen_data(sc, 0.5, 11);
  CHECK(ds.n() == 400);
  CHECK(ds.dim_u() == 8);
  CHECK(ds.dim_w() == 2);
  CHECK(ds.w.minCoeff() >= 0.0);
  CHECK(ds.w.maxCoeff() <= 1.0);
  // AR(1) correlation of neighbors is near one half
  double corr = 0.0;
  for (int j = 0; j + 1 < 8; ++j) {
    const auto a = ds.u.col(j).array() - ds.u.col(j).mean();
    const auto b = ds.u.col(j + 1).array() - ds.u.col(j + 1).mean();
    corr += (a * b).sum() / std::sqrt(a.square().sum() * b.square().sum()) / 7.0;
  }
  CHECK(corr == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("model error basics") {
  Scenario sc;
  auto truth = [&](const Matrix& pts) { return true_eta_values(sc.eta0, pts); };
  CHECK(model_error(sc.beta0, truth, sc, 20000, 5) == 0.0);
  Vector off = sc.beta0;
  off[0] += 0.3;
  CHECK(model_error(off, truth, sc, 20000, 5) > 0.0);
}

TEST_CASE("selection classification") {
  Vector beta0(8);
  beta0 << 0.8, 0, 0, 1, 0, 0, 0.6, 0;
  SUBCASE("exact pattern") {
    const SelectionCounts s = classify_fit(beta0, beta0);
    CHECK(s.cc == 3);
    CHECK(s.ic == 0);
    CHECK(s.cls == FitClass::Correct);
  }
  SUBCASE("everything selected") {
    const SelectionCounts s = classify_fit(Vector::Ones(8), beta0);
    CHECK(s.cc == 3);
    CHECK(s.ic == 5);
    CHECK(s.cls == FitClass::Over);
  }
  SUBCASE("nothing selected") {
    const SelectionCounts s = classify_fit(Vector::Zero(8), beta0);
    CHECK(s.cc == 0);
    CHECK(s.cls == FitClass::Under);
  }
}

TEST_CASE("tables are reproducible bit for bit") {
  Scenario sc = preset_scenario("table1-a");
  sc.n = 100;
  sc.seed = 7;
  RunOptions options;
  options.replicates = 2;
  options.mc_size = 5000;
  const std::vector<Procedure> procs{Procedure::M0, Procedure::MC};
  const TableSummary t1 = run_table(sc, procs, options);
  const TableSummary t2 = run_table(sc, procs, options);
  CHECK(summary_csv(t1) == summary_csv(t2));
  CHECK(replicates_csv(t1) == replicates_csv(t2));
  CHECK(t1.summaries[0].median_rme == 1.0);  // the oracle benchmarks itself

  // jobs > 1 reduces to the same table
  RunOptions par = options;
  par.jobs = 3;
  const TableSummary t3 = run_table(sc, procs, par);
  CHECK(summary_csv(t3) == summary_csv(t1));
  CHECK(replicates_csv(t3) == replicates_csv(t1));
}

TEST_CASE("presets cover the benchmark scenarios") {
  CHECK(preset_scenario("table1-a").censor_target == 0.23);
  CHECK(preset_scenario("table1-b").censor_target == 0.40);
  CHECK(preset_scenario("table3-3").q == 2);
  CHECK(preset_scenario("table3-4").eta0 == TrueEta::Sum);
  CHECK_THROWS_AS(preset_scenario("bogus"), std::invalid_argument);
}
