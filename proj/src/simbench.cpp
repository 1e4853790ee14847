#include "sscox/simbench.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sscox/eta_solver.hpp"
#include "sscox/numeric.hpp"
#include "sscox/rng.hpp"

namespace sscox {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = 3.14159265358979323846;
}  // namespace

double eta0a(double w) { return 1.5 * std::sin(2.0 * kPi * w - kPi / 2.0); }

double eta0b(double w) {
  return 4.0 * (w - 0.3) * (w - 0.3) + 4.7 * std::exp(-w) - 3.4643;
}

Vector true_eta_values(TrueEta truth, const Matrix& w) {
  Vector out(w.rows());
  for (int i = 0; i < w.rows(); ++i) {
    switch (truth) {
      case TrueEta::A: out[i] = eta0a(w(i, 0)); break;
      case TrueEta::B: out[i] = eta0b(w(i, 0)); break;
      case TrueEta::Mix73: out[i] = 0.7 * eta0a(w(i, 0)) + 0.3 * eta0b(w(i, 1)); break;
      case TrueEta::Sum: out[i] = eta0a(w(i, 0)) + eta0b(w(i, 1)); break;
    }
  }
  return out;
}

AnovaStructure truth_structure(TrueEta truth, int q) {
  switch (truth) {
    case TrueEta::A:
    case TrueEta::B:
      return AnovaStructure::univariate();
    case TrueEta::Mix73:
    case TrueEta::Sum:
      if (q < 2) throw std::invalid_argument("bivariate truth needs q = 2");
      return AnovaStructure::additive();
  }
  throw std::logic_error("unknown truth");
}

Scenario::Scenario() {
  beta0.resize(8);
  beta0 << 0.8, 0, 0, 1, 0, 0, 0.6, 0;
}

Scenario preset_scenario(const std::string& name) {
  Scenario sc;
  if (name == "table1-a" || name == "table2") {
    sc.eta0 = TrueEta::A;
    sc.q = 1;
    sc.censor_target = 0.23;
  } else if (name == "table1-b") {
    sc.eta0 = TrueEta::B;
    sc.q = 1;
    sc.censor_target = 0.40;
  } else if (name == "table3-1") {
    sc.eta0 = TrueEta::A;
    sc.q = 2;
    sc.censor_target = 0.23;
  } else if (name == "table3-2") {
    sc.eta0 = TrueEta::B;
    sc.q = 2;
    sc.censor_target = 0.40;
  } else if (name == "table3-3") {
    sc.eta0 = TrueEta::Mix73;
    sc.q = 2;
    sc.censor_target = 0.25;
  } else if (name == "table3-4") {
    sc.eta0 = TrueEta::Sum;
    sc.q = 2;
    sc.censor_target = 0.39;
  } else {
    throw std::invalid_argument("unknown scenario: " + name);
  }
  return sc;
}

namespace {

Matrix ar1_cholesky(int d) {
  Matrix sigma(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) sigma(j, k) = std::pow(0.5, std::abs(j - k));
  }
  return sigma.llt().matrixL();
}

// true relative risks exp(U'b0 + eta0(W)) for a fresh covariate sample
Vector draw_risks(const Scenario& sc, int mc_size, Rng& rng) {
  const int d = static_cast<int>(sc.beta0.size());
  const Matrix chol = ar1_cholesky(d);
  Vector risks(mc_size);
  Vector z(d);
  Eigen::RowVectorXd w(sc.q);
  for (int i = 0; i < mc_size; ++i) {
    for (int j = 0; j < d; ++j) z[j] = rng.normal();
    const double ub = sc.beta0.dot(chol * z);
    for (int j = 0; j < sc.q; ++j) w[j] = rng.uniform();
    Matrix wm = w;
    risks[i] = std::exp(ub + true_eta_values(sc.eta0, wm)[0]);
  }
  return risks;
}

}  // namespace

double calibrate_censoring(const Scenario& sc, double target, int mc_size) {
  if (target <= 0.0) return 0.0;
  if (target >= 1.0) throw std::invalid_argument("censoring target must lie in (0,1)");
  Rng rng(mix_seed(sc.seed, 0xCA11B8A7ULL));
  const Vector risks = draw_risks(sc, mc_size, rng);
  // with independent exponentials, P(censored | h) = c / (c + h)
  auto frac = [&](double c) {
    double acc = 0.0;
    for (int i = 0; i < risks.size(); ++i) acc += c / (c + risks[i]);
    return acc / static_cast<double>(risks.size());
  };
  double lo = 0.0, hi = 1.0;
  while (frac(hi) < target) {
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("censoring calibration bracket failure");
  }
  double mid = 0.5 * hi;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = frac(mid);
    if (std::abs(f - target) <= 0.005) break;
    (f < target ? lo : hi) = mid;
  }
  return mid;
}

SurvivalDataset gen_data(const Scenario& sc, double censor_rate, std::uint64_t rep_seed) {
  const int n = sc.n;
  const int d = static_cast<int>(sc.beta0.size());
  Rng rng(rep_seed);
  const Matrix chol = ar1_cholesky(d);

  Matrix u(n, d), w(n, sc.q);
  Vector z(d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z[j] = rng.normal();
    u.row(i) = (chol * z).transpose();
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < sc.q; ++j) w(i, j) = rng.uniform();
  }
  const Vector lp0 = u * sc.beta0 + true_eta_values(sc.eta0, w);

  Vector times(n);
  Eigen::VectorXi events(n);
  for (int i = 0; i < n; ++i) {
    const double t = rng.exponential(1.0) / std::exp(lp0[i]);
    const double u_c = rng.uniform_pos();
    const double c = censor_rate > 0.0 ? -std::log(u_c) / censor_rate
                                       : std::numeric_limits<double>::max();
    times[i] = std::min(t, c);
    events[i] = t <= c ? 1 : 0;
  }
  return make_dataset(times, events, u, w, /*rescale_w=*/false);
}

double model_error(const Vector& beta_hat, const EtaEvaluator& eta_hat, const Scenario& sc,
                   int mc_size, std::uint64_t seed) {
  const int d = static_cast<int>(sc.beta0.size());
  if (beta_hat.size() != d) throw std::invalid_argument("beta_hat must match the full dimension");
  Rng rng(seed);
  const Matrix chol = ar1_cholesky(d);
  Matrix u(mc_size, d), w(mc_size, sc.q);
  Vector z(d);
  for (int i = 0; i < mc_size; ++i) {
    for (int j = 0; j < d; ++j) z[j] = rng.normal();
    u.row(i) = (chol * z).transpose();
  }
  for (int i = 0; i < mc_size; ++i) {
    for (int j = 0; j < sc.q; ++j) w(i, j) = rng.uniform();
  }
  const Vector eta_true = true_eta_values(sc.eta0, w);
  const Vector eta_fit = eta_hat(w);
  const Vector r_true = (-(u * sc.beta0) - eta_true).array().exp();
  const Vector r_fit = (-(u * beta_hat) - eta_fit).array().exp();
  return (r_fit - r_true).array().square().mean();
}

SelectionCounts classify_fit(const Vector& beta_hat, const Vector& beta0) {
  if (beta_hat.size() != beta0.size()) throw std::invalid_argument("length mismatch");
  int cc = 0, ic = 0, n_true = 0;
  for (int j = 0; j < beta0.size(); ++j) {
    const bool truth = beta0[j] != 0.0;
    const bool picked = beta_hat[j] != 0.0;
    n_true += truth;
    cc += truth && picked;
    ic += !truth && picked;
  }
  SelectionCounts out{cc, ic, FitClass::Under};
  if (cc < n_true) {
    out.cls = FitClass::Under;
  } else {
    out.cls = ic == 0 ? FitClass::Correct : FitClass::Over;
  }
  return out;
}

std::string procedure_label(Procedure p) {
  switch (p) {
    case Procedure::M0: return "M0";
    case Procedure::MA: return "MA";
    case Procedure::MB: return "MB";
    case Procedure::MC: return "MC";
    case Procedure::MD: return "MD";
    case Procedure::ETA: return "ETA";
  }
  throw std::logic_error("unknown procedure");
}

Procedure parse_procedure(const std::string& s) {
  if (s == "M0") return Procedure::M0;
  if (s == "MA") return Procedure::MA;
  if (s == "MB") return Procedure::MB;
  if (s == "MC") return Procedure::MC;
  if (s == "MD") return Procedure::MD;
  if (s == "ETA") return Procedure::ETA;
  throw std::invalid_argument("unknown procedure: " + s);
}

Matrix curve_grid() {
  Matrix grid(101, 1);
  for (int i = 0; i <= 100; ++i) grid(i, 0) = i / 100.0;
  return grid;
}

namespace {

IntVector support_of(const Vector& beta0) {
  IntVector idx;
  for (int j = 0; j < beta0.size(); ++j) {
    if (beta0[j] != 0.0) idx.push_back(j);
  }
  return idx;
}

double trapezoid_l2(const Vector& est, const Vector& truth) {
  double acc = 0.0;
  const int m = static_cast<int>(est.size());
  for (int i = 0; i + 1 < m; ++i) {
    const double a = est[i] - truth[i];
    const double b = est[i + 1] - truth[i + 1];
    acc += 0.5 * (a * a + b * b) / (m - 1);
  }
  return acc;
}

// nonparametric structure selection: most parsimonious feasible candidate,
// ties by smaller ratio, full structure when none is feasible
AnovaStructure select_structure(const std::vector<KLReport>& reports,
                                const AnovaStructure& fitted) {
  const KLReport* best = nullptr;
  for (const auto& rep : reports) {
    if (!rep.feasible) continue;
    if (best == nullptr || rep.candidate.n_terms() < best->candidate.n_terms() ||
        (rep.candidate.n_terms() == best->candidate.n_terms() && rep.ratio < best->ratio)) {
      best = &rep;
    }
  }
  return best ? best->candidate : fitted;
}

struct RepContext {
  const Scenario& sc;
  const RunOptions& options;
  double censor_rate;
  Matrix grid;
  Vector grid_truth;  // q = 1 only
};

void fill_curve(ReplicateResult& res, const RepContext& rc, const EtaFit& eta_fit,
                const SplineBasis& basis) {
  if (rc.sc.q != 1 || !rc.options.curves) return;
  const EtaBand band = eta_band(eta_fit, basis, rc.grid);
  res.curve = band.estimate;
  res.curve_lo = band.lower;
  res.curve_hi = band.upper;
  res.eta_l2 = trapezoid_l2(band.estimate, rc.grid_truth);
  res.has_curve = true;
}

ReplicateResult run_procedure(Procedure proc, const RepContext& rc, const SurvivalDataset& ds,
                              const RiskSet& rs, double me0, std::uint64_t me_seed) {
  const Scenario& sc = rc.sc;
  const int d = static_cast<int>(sc.beta0.size());
  LikelihoodContext ctx{&ds, &rs};
  const IntVector support = support_of(sc.beta0);

  ReplicateResult res;
  res.beta_hat = Vector::Zero(d);
  res.se = Vector::Constant(d, kNaN);

  auto spline_evaluator = [](const SplineBasis& basis, Vector coef) {
    return [basis, coef = std::move(coef)](const Matrix& pts) {
      return evaluate(basis, coef, pts);
    };
  };

  switch (proc) {
    case Procedure::M0: {
      Matrix u_sub(ds.n(), support.size());
      for (std::size_t i = 0; i < support.size(); ++i) u_sub.col(i) = ds.u.col(support[i]);
      SurvivalDataset sub = make_dataset(ds.times, ds.events, u_sub, ds.w, false);
      const RiskSet rs_sub = build_risk_sets(sub);
      LikelihoodContext cs{&sub, &rs_sub};
      const Vector offs = true_eta_values(sc.eta0, ds.w);
      const ProfileMax prof =
          profile_maximizer(cs, offs, Vector::Zero(static_cast<int>(support.size())));
      if (!prof.converged) throw std::runtime_error("oracle fit did not converge");
      for (std::size_t i = 0; i < support.size(); ++i) res.beta_hat[support[i]] = prof.beta[i];
      res.me = model_error(
          res.beta_hat, [&](const Matrix& pts) { return true_eta_values(sc.eta0, pts); }, sc,
          rc.options.mc_size, me_seed);
      res.converged = prof.converged;
      break;
    }
    case Procedure::MA: {
      const int ns = static_cast<int>(support.size());
      Matrix u_ma(ds.n(), ns + sc.q);
      for (int i = 0; i < ns; ++i) u_ma.col(i) = ds.u.col(support[i]);
      for (int j = 0; j < sc.q; ++j) u_ma.col(ns + j) = ds.w.col(j);
      SurvivalDataset sub = make_dataset(ds.times, ds.events, u_ma, ds.w, false);
      const RiskSet rs_sub = build_risk_sets(sub);
      LikelihoodContext cs{&sub, &rs_sub};
      const ProfileMax prof =
          profile_maximizer(cs, Vector::Zero(ds.n()), Vector::Zero(ns + sc.q));
      if (!prof.converged) throw std::runtime_error("linear fit did not converge");
      for (int i = 0; i < ns; ++i) res.beta_hat[support[i]] = prof.beta[i];
      const Vector bw = prof.beta.tail(sc.q);
      // linear eta, centered so it integrates to zero like the truth
      auto linear_eta = [bw](const Matrix& pts) {
        Matrix centered = pts;
        centered.array() -= 0.5;
        return Vector(centered * bw);
      };
      res.me = model_error(res.beta_hat, linear_eta, sc, rc.options.mc_size, me_seed);
      res.converged = prof.converged;
      break;
    }
    case Procedure::MB:
    case Procedure::MC:
    case Procedure::MD: {
      FitConfig config = rc.options.fit;
      config.seed = mix_seed(me_seed, 0x5EEDULL);
      config.structure = sc.q == 1 ? AnovaStructure::univariate()
                                   : (sc.eta0 == TrueEta::Mix73 || sc.eta0 == TrueEta::Sum
                                          ? AnovaStructure::full()
                                          : AnovaStructure::additive());
      const SurvivalDataset* fit_ds = &ds;
      const RiskSet* fit_rs = &rs;
      SurvivalDataset sub;
      RiskSet rs_sub;
      if (proc == Procedure::MB) {
        Matrix u_sub(ds.n(), support.size());
        for (std::size_t i = 0; i < support.size(); ++i) u_sub.col(i) = ds.u.col(support[i]);
        sub = make_dataset(ds.times, ds.events, u_sub, ds.w, false);
        rs_sub = build_risk_sets(sub);
        fit_ds = &sub;
        fit_rs = &rs_sub;
        config.penalty = PenaltyKind::None;
      } else {
        config.penalty = proc == Procedure::MC ? PenaltyKind::Scad : PenaltyKind::AdaptiveLasso;
      }
      const FitResult fit_res = fit(*fit_ds, *fit_rs, config);
      res.iterations = fit_res.iterations;
      res.converged = fit_res.converged;

      if (proc == Procedure::MB) {
        for (std::size_t i = 0; i < support.size(); ++i) {
          res.beta_hat[support[i]] = fit_res.beta_fit.beta[static_cast<int>(i)];
        }
      } else {
        res.beta_hat = fit_res.beta_fit.beta;
        const SelectionCounts sel = classify_fit(res.beta_hat, sc.beta0);
        res.cc = sel.cc;
        res.ic = sel.ic;
        res.cls = sel.cls;
        res.has_selection = true;
        if (res.beta_hat.array().abs().sum() > 0.0) {
          LikelihoodContext cf{fit_ds, fit_rs};
          const SandwichCov sw =
              sandwich_cov(cf, fit_res.beta_fit.beta, fit_res.eta_fit.fitted, fit_res.beta_fit.spec);
          for (std::size_t i = 0; i < sw.active.size(); ++i) res.se[sw.active[i]] = sw.se[i];
        }
      }

      res.me = model_error(res.beta_hat,
                           spline_evaluator(fit_res.basis, fit_res.eta_fit.coef), sc,
                           rc.options.mc_size, me_seed);
      fill_curve(res, rc, fit_res.eta_fit, fit_res.basis);

      if (sc.q == 2 && proc != Procedure::MB) {
        const BiasedWeights weights = biased_weights(*fit_ds, *fit_rs, fit_res.beta_fit.beta);
        const Matrix psi_full = fit_res.basis.design(fit_ds->w);
        std::vector<AnovaStructure> candidates;
        if (config.structure.interaction) candidates.push_back(AnovaStructure::additive());
        candidates.push_back(AnovaStructure::univariate());
        candidates.push_back(AnovaStructure{false, true, false});
        const auto reports =
            kl_ratio_report(fit_res.eta_fit.fitted, fit_res.basis, psi_full, candidates,
                            weights, rc.options.feasibility_threshold);
        const AnovaStructure chosen = select_structure(reports, config.structure);
        res.np_valid = true;
        res.sel_w1 = chosen.main_w1;
        res.sel_w2 = chosen.main_w2;
        res.sel_w12 = chosen.interaction;
        const AnovaStructure truth = truth_structure(sc.eta0, sc.q);
        if (!chosen.contains(truth)) {
          res.np_cls = FitClass::Under;
        } else {
          res.np_cls = chosen == truth ? FitClass::Correct : FitClass::Over;
        }
      }
      break;
    }
    case Procedure::ETA: {
      const SplineBasis basis =
          build_basis(ds, select_knots(ds, mix_seed(me_seed, 0x5EEDULL)),
                      sc.q == 1 ? AnovaStructure::univariate() : AnovaStructure::additive());
      LambdaSelection lsel =
          select_lambda(ctx, basis, sc.beta0, rc.options.fit.lambda_grid, rc.options.fit.eta_options);
      res.beta_hat = sc.beta0;
      res.converged = lsel.fit.converged;
      res.me = model_error(res.beta_hat, spline_evaluator(basis, lsel.fit.coef), sc,
                           rc.options.mc_size, me_seed);
      fill_curve(res, rc, lsel.fit, basis);
      break;
    }
  }

  res.rme = me0 / res.me;
  res.ok = true;
  return res;
}

}  // namespace

TableSummary run_table(const Scenario& sc, const std::vector<Procedure>& procedures,
                       const RunOptions& options) {
  if (options.replicates < 1) throw std::invalid_argument("replicates must be positive");
  TableSummary table;
  table.scenario = sc;
  table.procedures = procedures;
  table.censor_rate = calibrate_censoring(sc, sc.censor_target);

  RepContext rc{sc, options, table.censor_rate, curve_grid(), Vector()};
  if (sc.q == 1) rc.grid_truth = true_eta_values(sc.eta0, rc.grid);

  const int np = static_cast<int>(procedures.size());
  const int nr = options.replicates;
  table.replicates.assign(np, std::vector<ReplicateResult>(nr));

  auto worker_body = [&](int r) {
    const std::uint64_t rep_seed = mix_seed(sc.seed, static_cast<std::uint64_t>(r) + 1);
    const std::uint64_t me_seed = mix_seed(rep_seed, 0x4D45ULL);
    SurvivalDataset ds;
    RiskSet rs;
    ReplicateResult m0;
    std::string data_error;
    try {
      ds = gen_data(sc, table.censor_rate, mix_seed(rep_seed, 0xDA7AULL));
      rs = build_risk_sets(ds);
      m0 = run_procedure(Procedure::M0, rc, ds, rs, kNaN, me_seed);
      m0.rme = 1.0;  // benchmark against itself
    } catch (const std::exception& e) {
      data_error = e.what();
    }
    for (int ip = 0; ip < np; ++ip) {
      ReplicateResult& slot = table.replicates[ip][r];
      if (!data_error.empty()) {
        slot.ok = false;
        slot.error = data_error;
        continue;
      }
      if (procedures[ip] == Procedure::M0) {
        slot = m0;
        continue;
      }
      try {
        slot = run_procedure(procedures[ip], rc, ds, rs, m0.me, me_seed);
      } catch (const std::exception& e) {
        slot = ReplicateResult{};
        slot.ok = false;
        slot.error = e.what();
      }
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    for (int r = 0; r < nr; ++r) worker_body(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < nr; r = next.fetch_add(1)) worker_body(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  // reductions, in replicate order
  for (int ip = 0; ip < np; ++ip) {
    const auto& reps = table.replicates[ip];
    ProcedureSummary s;
    s.proc = procedures[ip];
    std::vector<double> rmes;
    double cc = 0, ic = 0, under = 0, correct = 0, over = 0;
    int nsel = 0;
    double w1 = 0, w2 = 0, w12 = 0, nunder = 0, ncorrect = 0, nover = 0;
    int nnp = 0;
    int ncurve = 0;
    for (const auto& rep : reps) {
      if (!rep.ok) {
        ++s.n_fail;
        continue;
      }
      ++s.n_ok;
      if (std::isfinite(rep.rme)) rmes.push_back(rep.rme);
      if (rep.has_selection) {
        ++nsel;
        cc += rep.cc;
        ic += rep.ic;
        under += rep.cls == FitClass::Under;
        correct += rep.cls == FitClass::Correct;
        over += rep.cls == FitClass::Over;
      }
      if (rep.np_valid) {
        ++nnp;
        w1 += rep.sel_w1;
        w2 += rep.sel_w2;
        w12 += rep.sel_w12;
        nunder += rep.np_cls == FitClass::Under;
        ncorrect += rep.np_cls == FitClass::Correct;
        nover += rep.np_cls == FitClass::Over;
      }
      if (rep.has_curve) ++ncurve;
    }
    s.median_rme = rmes.empty() ? kNaN : median(rmes);
    s.has_selection = nsel > 0;
    if (nsel > 0) {
      s.mean_cc = cc / nsel;
      s.mean_ic = ic / nsel;
      s.prop_under = under / nsel;
      s.prop_correct = correct / nsel;
      s.prop_over = over / nsel;
    }
    s.has_np = nnp > 0;
    if (nnp > 0) {
      s.sel_w1 = w1 / nnp;
      s.sel_w2 = w2 / nnp;
      s.sel_w12 = w12 / nnp;
      s.np_under = nunder / nnp;
      s.np_correct = ncorrect / nnp;
      s.np_over = nover / nnp;
    }
    s.has_curve = ncurve > 0;
    if (s.has_curve) {
      const int g = static_cast<int>(rc.grid.rows());
      s.grid_w = rc.grid.col(0);
      s.curve_mean = Vector::Zero(g);
      s.curve_q025 = Vector::Zero(g);
      s.curve_q975 = Vector::Zero(g);
      s.ci_lo_mean = Vector::Zero(g);
      s.ci_hi_mean = Vector::Zero(g);
      s.coverage = Vector::Zero(g);
      for (int i = 0; i < g; ++i) {
        std::vector<double> vals;
        double lo = 0, hi = 0, cov = 0;
        for (const auto& rep : reps) {
          if (!rep.ok || !rep.has_curve) continue;
          vals.push_back(rep.curve[i]);
          lo += rep.curve_lo[i];
          hi += rep.curve_hi[i];
          if (sc.q == 1) {
            cov += rep.curve_lo[i] <= rc.grid_truth[i] && rc.grid_truth[i] <= rep.curve_hi[i];
          }
        }
        s.curve_mean[i] = Eigen::Map<Vector>(vals.data(), vals.size()).mean();
        s.curve_q025[i] = quantile(vals, 0.025);
        s.curve_q975[i] = quantile(vals, 0.975);
        s.ci_lo_mean[i] = lo / ncurve;
        s.ci_hi_mean[i] = hi / ncurve;
        s.coverage[i] = cov / ncurve;
      }
    }
    table.summaries.push_back(std::move(s));
  }
  return table;
}

namespace {

std::string fit_class_label(FitClass c) {
  switch (c) {
    case FitClass::Under: return "under";
    case FitClass::Correct: return "correct";
    case FitClass::Over: return "over";
  }
  return "?";
}

std::string sanitize(std::string s) {
  for (auto& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

}  // namespace

std::string summary_csv(const TableSummary& table) {
  std::ostringstream out;
  out << "procedure,n_ok,n_fail,median_rme,mean_cc,mean_ic,prop_under,prop_correct,prop_over,"
      << "sel_w1,sel_w2,sel_w12,np_under,np_correct,np_over\n";
  for (const auto& s : table.summaries) {
    out << procedure_label(s.proc) << ',' << s.n_ok << ',' << s.n_fail << ','
        << (std::isfinite(s.median_rme) ? format_double(s.median_rme) : "");
    if (s.has_selection) {
      out << ',' << format_double(s.mean_cc) << ',' << format_double(s.mean_ic) << ','
          << format_double(s.prop_under) << ',' << format_double(s.prop_correct) << ','
          << format_double(s.prop_over);
    } else {
      out << ",,,,,";
    }
    if (s.has_np) {
      out << ',' << format_double(s.sel_w1) << ',' << format_double(s.sel_w2) << ','
          << format_double(s.sel_w12) << ',' << format_double(s.np_under) << ','
          << format_double(s.np_correct) << ',' << format_double(s.np_over);
    } else {
      out << ",,,,,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string replicates_csv(const TableSummary& table) {
  const int d = static_cast<int>(table.scenario.beta0.size());
  std::ostringstream out;
  out << "rep,procedure,ok,me,rme,cc,ic,fit_class,sel_w1,sel_w2,sel_w12,np_class,iterations,"
      << "converged";
  for (int j = 0; j < d; ++j) out << ",beta_" << (j + 1);
  for (int j = 0; j < d; ++j) out << ",se_" << (j + 1);
  out << ",error\n";
  for (std::size_t ip = 0; ip < table.replicates.size(); ++ip) {
    const auto& reps = table.replicates[ip];
    for (std::size_t r = 0; r < reps.size(); ++r) {
      const auto& rep = reps[r];
      out << r << ',' << procedure_label(table.procedures[ip]) << ',' << (rep.ok ? 1 : 0) << ',';
      if (rep.ok) {
        out << format_double(rep.me) << ',' << format_double(rep.rme) << ',';
        if (rep.has_selection) {
          out << rep.cc << ',' << rep.ic << ',' << fit_class_label(rep.cls) << ',';
        } else {
          out << ",,,";
        }
        if (rep.np_valid) {
          out << rep.sel_w1 << ',' << rep.sel_w2 << ',' << rep.sel_w12 << ','
              << fit_class_label(rep.np_cls) << ',';
        } else {
          out << ",,,,";
        }
        out << rep.iterations << ',' << (rep.converged ? 1 : 0);
        for (int j = 0; j < d; ++j) {
          out << ',';
          if (rep.beta_hat.size() == d) out << format_double(rep.beta_hat[j]);
        }
        for (int j = 0; j < d; ++j) {
          out << ',';
          if (rep.se.size() == d && std::isfinite(rep.se[j])) out << format_double(rep.se[j]);
        }
        out << ',';
      } else {
        out << ",,,,,,,,,,,";
        for (int j = 0; j < 2 * d; ++j) out << ',';
        out << sanitize(rep.error);
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string eta_grid_csv(const ProcedureSummary& summary) {
  if (!summary.has_curve) throw std::invalid_argument("no curve summary for this procedure");
  std::ostringstream out;
  out << "w,mean,q025,q975,ci_lo,ci_hi\n";
  for (int i = 0; i < summary.grid_w.size(); ++i) {
    out << format_double(summary.grid_w[i]) << ',' << format_double(summary.curve_mean[i]) << ','
        << format_double(summary.curve_q025[i]) << ',' << format_double(summary.curve_q975[i])
        << ',' << format_double(summary.ci_lo_mean[i]) << ','
        << format_double(summary.ci_hi_mean[i]) << '\n';
  }
  return out.str();
}

}  // namespace sscox
