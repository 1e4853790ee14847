#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "sscox/backfit.hpp"
#include "sscox/eta_solver.hpp"
#include "sscox/inference.hpp"
#include "sscox/kl_select.hpp"
#include "sscox/numeric.hpp"
#include "sscox/simbench.hpp"
#include "sscox/version.hpp"

namespace fs = std::filesystem;
using namespace sscox;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// key=value artifact files; insertion order is fixed so identical runs yield
// byte-identical output
class KvWriter {
 public:
  void add(const std::string& key, const std::string& value) {
    lines_.push_back(key + "=" + value);
  }
  void add(const std::string& key, double value) { add(key, format_double(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void add(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }
  void write(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& line : lines_) out << line << '\n';
  }

 private:
  std::vector<std::string> lines_;
};

std::map<std::string, std::string> read_kv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto parts = split_list(spec);
  if (parts.size() != 3) throw CLI::ValidationError("grid must be lo,hi,count");
  const double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
  const int count = std::stoi(parts[2]);
  if (!(lo > 0.0) || !(hi > lo) || count < 1) throw CLI::ValidationError("bad grid range");
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) {
    grid[i] = count == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i /
                                                            (count - 1.0));
  }
  return grid;
}

struct FitFlags {
  std::string data, time_col, status_col;
  std::string parametric, nonparametric;
  std::string penalty = "scad";
  double scad_a = 3.7;
  bool interaction = false;
  bool strict_expansion = false;
  std::string lambda_grid, theta_grid;
  std::uint64_t seed = 1;
  std::string out = ".";
};

std::string joined(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

void write_manifest_common(KvWriter& kv, const std::string& command, std::uint64_t seed) {
  kv.add("tool", "sscox");
  kv.add("version", std::string(kVersion));
  kv.add("command", command);
  kv.add("seed", seed);
}

int run_fit(const FitFlags& flags) {
  ColumnSchema schema;
  schema.time = flags.time_col;
  schema.status = flags.status_col;
  schema.parametric = split_list(flags.parametric);
  schema.nonparametric = split_list(flags.nonparametric);

  const SurvivalDataset ds = load_dataset(flags.data, schema);
  const RiskSet rs = build_risk_sets(ds);

  FitConfig config;
  config.penalty = parse_penalty_kind(flags.penalty);
  config.scad_a = flags.scad_a;
  config.seed = flags.seed;
  config.strict_expansion = flags.strict_expansion;
  config.structure = ds.dim_w() == 2
                         ? (flags.interaction ? AnovaStructure::full() : AnovaStructure::additive())
                         : AnovaStructure::univariate();
  if (!flags.lambda_grid.empty()) config.lambda_grid = parse_grid(flags.lambda_grid);
  if (!flags.theta_grid.empty()) config.theta_base_grid = parse_grid(flags.theta_grid);

  const FitResult res = fit(ds, rs, config);

  const fs::path out_dir(flags.out);
  fs::create_directories(out_dir);

  KvWriter manifest;
  write_manifest_common(manifest, "fit", flags.seed);
  manifest.add("data", flags.data);
  manifest.add("time", flags.time_col);
  manifest.add("status", flags.status_col);
  manifest.add("parametric", joined(schema.parametric));
  manifest.add("nonparametric", joined(schema.nonparametric));
  manifest.add("penalty", flags.penalty);
  manifest.add("scad_a", flags.scad_a);
  manifest.add("structure", config.structure.label());
  manifest.add("strict_expansion", flags.strict_expansion ? 1 : 0);
  manifest.add("lambda_grid_size", static_cast<int>(config.lambda_grid.size()));
  manifest.add("theta_grid_size", static_cast<int>(config.theta_base_grid.size()));
  manifest.write(out_dir / "manifest.kv");

  // standard errors for the nonzero coefficients
  std::map<int, double> se;
  if (ds.dim_u() > 0 && res.beta_fit.nonzero_count() > 0) {
    const SandwichCov sw = sandwich_cov(ds, rs, res);
    for (std::size_t i = 0; i < sw.active.size(); ++i) se[sw.active[i]] = sw.se[i];
  }

  auto uname = [&](int j) {
    return j < static_cast<int>(ds.u_names.size()) ? ds.u_names[j] : "u" + std::to_string(j + 1);
  };

  KvWriter fitkv;
  fitkv.add("n", ds.n());
  fitkv.add("events", ds.n_failures());
  fitkv.add("d", ds.dim_u());
  fitkv.add("q", ds.dim_w());
  fitkv.add("converged", res.converged ? 1 : 0);
  fitkv.add("iterations", res.iterations);
  fitkv.add("lambda", res.lambda);
  fitkv.add("theta", res.beta_fit.theta);
  fitkv.add("loglik", res.beta_fit.profile_loglik);
  fitkv.add("aic", res.beta_fit.aic);
  for (int j = 0; j < ds.dim_u(); ++j) {
    fitkv.add("beta." + uname(j), res.beta_fit.beta[j]);
    fitkv.add("se." + uname(j), se.count(j) ? format_double(se[j]) : "");
    fitkv.add("active." + uname(j), res.beta_fit.beta[j] != 0.0 ? 1 : 0);
  }
  fitkv.write(out_dir / "fit.kv");

  // model dump used by `diagnose`
  KvWriter model;
  model.add("data", flags.data);
  model.add("time", flags.time_col);
  model.add("status", flags.status_col);
  model.add("parametric", joined(schema.parametric));
  model.add("nonparametric", joined(schema.nonparametric));
  model.add("structure", config.structure.label());
  model.add("q", ds.dim_w());
  model.add("n_knots", res.basis.n_knots());
  {
    std::string knots;
    for (int l = 0; l < res.basis.n_knots(); ++l) {
      for (int j = 0; j < ds.dim_w(); ++j) {
        if (!knots.empty()) knots += ",";
        knots += format_double(res.basis.knots(l, j));
      }
    }
    model.add("knots", knots);
    std::string coef;
    for (int j = 0; j < res.eta_fit.coef.size(); ++j) {
      if (!coef.empty()) coef += ",";
      coef += format_double(res.eta_fit.coef[j]);
    }
    model.add("coef", coef);
    std::string beta;
    for (int j = 0; j < res.beta_fit.beta.size(); ++j) {
      if (!beta.empty()) beta += ",";
      beta += format_double(res.beta_fit.beta[j]);
    }
    model.add("beta", beta);
  }
  model.write(out_dir / "model.kv");

  // component curves with pointwise bands, on the original covariate scale
  {
    std::ofstream curve(out_dir / "eta_curve.csv");
    curve << "term,w,estimate,lower,upper\n";
    Matrix grid01 = Matrix::Zero(101, ds.dim_w());
    for (auto term : res.basis.active_terms()) {
      if (term == AnovaTerm::Interaction) continue;
      const int j = term == AnovaTerm::MainW1 ? 0 : 1;
      Matrix pts = Matrix::Constant(101, ds.dim_w(), 0.5);
      for (int i = 0; i <= 100; ++i) pts(i, j) = i / 100.0;
      (void)grid01;
      const EtaBand band = eta_term_band(res.eta_fit, res.basis, term, pts);
      const std::string label =
          j < static_cast<int>(ds.w_names.size()) ? ds.w_names[j] : "w" + std::to_string(j + 1);
      for (int i = 0; i <= 100; ++i) {
        const double w_orig = ds.w_min[j] + (ds.w_max[j] - ds.w_min[j]) * (i / 100.0);
        curve << label << ',' << format_double(w_orig) << ','
              << format_double(band.estimate[i]) << ',' << format_double(band.lower[i]) << ','
              << format_double(band.upper[i]) << '\n';
      }
    }
  }

  // human-readable report
  {
    std::ofstream report(out_dir / "report.txt");
    report << "Semiparametric Cox fit\n";
    report << "  subjects " << ds.n() << ", events " << ds.n_failures() << ", parametric "
           << ds.dim_u() << ", nonparametric " << ds.dim_w() << "\n";
    report << "  penalty " << flags.penalty << ", structure " << config.structure.label()
           << "\n";
    report << "  lambda " << format_double(res.lambda) << ", theta "
           << format_double(res.beta_fit.theta) << ", iterations " << res.iterations
           << (res.converged ? "" : " (not converged)") << "\n\n";
    report << "  coefficient  estimate (se)\n";
    for (int j = 0; j < ds.dim_u(); ++j) {
      report << "  " << uname(j) << "  ";
      if (res.beta_fit.beta[j] == 0.0) {
        report << "0 (-)\n";
      } else {
        report << format_double(res.beta_fit.beta[j]) << " (";
        report << (se.count(j) ? format_double(se[j]) : "-") << ")\n";
      }
    }
    report << "\n  nonparametric curves in eta_curve.csv\n";
  }
  return 0;
}

struct SimFlags {
  std::string scenario;
  std::string scenario_file;
  int n = 0;
  int replicates = 1;
  std::string procedures;
  int jobs = 0;
  int mc_size = 100000;
  double threshold = 0.05;
  std::uint64_t seed = 1;
  std::string out = ".";
};

Scenario scenario_from_file(const std::string& path) {
  const auto kv = read_kv(path);
  Scenario sc;
  if (kv.count("n")) sc.n = std::stoi(kv.at("n"));
  if (kv.count("q")) sc.q = std::stoi(kv.at("q"));
  if (kv.count("censor")) sc.censor_target = std::stod(kv.at("censor"));
  if (kv.count("eta0")) {
    const std::string& e = kv.at("eta0");
    if (e == "a") sc.eta0 = TrueEta::A;
    else if (e == "b") sc.eta0 = TrueEta::B;
    else if (e == "mix73") sc.eta0 = TrueEta::Mix73;
    else if (e == "sum") sc.eta0 = TrueEta::Sum;
    else throw std::runtime_error("unknown eta0 in scenario file: " + e);
  }
  if (kv.count("beta0")) {
    const auto parts = split_list(kv.at("beta0"));
    sc.beta0.resize(static_cast<int>(parts.size()));
    for (std::size_t j = 0; j < parts.size(); ++j) sc.beta0[j] = std::stod(parts[j]);
  }
  return sc;
}

int run_simulate(const SimFlags& flags) {
  Scenario sc = flags.scenario_file.empty() ? preset_scenario(flags.scenario)
                                            : scenario_from_file(flags.scenario_file);
  if (flags.n > 0) sc.n = flags.n;
  sc.seed = flags.seed;

  std::vector<Procedure> procs;
  if (!flags.procedures.empty()) {
    for (const auto& name : split_list(flags.procedures)) procs.push_back(parse_procedure(name));
  } else if (sc.q == 1) {
    procs = {Procedure::M0, Procedure::MA, Procedure::MB, Procedure::MC, Procedure::MD};
  } else {
    procs = {Procedure::MC};
  }

  RunOptions options;
  options.replicates = flags.replicates;
  options.jobs = flags.jobs > 0 ? flags.jobs
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  options.mc_size = flags.mc_size;
  options.feasibility_threshold = flags.threshold;

  const TableSummary table = run_table(sc, procs, options);

  const fs::path out_dir(flags.out);
  fs::create_directories(out_dir);
  KvWriter manifest;
  write_manifest_common(manifest, "simulate", flags.seed);
  manifest.add("scenario", flags.scenario_file.empty() ? flags.scenario : flags.scenario_file);
  manifest.add("n", sc.n);
  manifest.add("q", sc.q);
  manifest.add("censor_target", sc.censor_target);
  manifest.add("censor_rate", table.censor_rate);
  manifest.add("replicates", flags.replicates);
  manifest.add("mc_size", flags.mc_size);
  manifest.add("threshold", flags.threshold);
  {
    std::string names;
    for (auto p : procs) names += (names.empty() ? "" : ",") + procedure_label(p);
    manifest.add("procedures", names);
  }
  manifest.write(out_dir / "manifest.kv");

  std::ofstream(out_dir / "summary.csv") << summary_csv(table);
  std::ofstream(out_dir / "replicates.csv") << replicates_csv(table);
  for (const auto& s : table.summaries) {
    if (s.has_curve) {
      std::ofstream(out_dir / ("eta_grid_" + procedure_label(s.proc) + ".csv"))
          << eta_grid_csv(s);
    }
  }
  return 0;
}

struct DiagnoseFlags {
  std::string fit_dir;
  std::string candidates;
  double threshold = 0.05;
  std::string out;
};

int run_diagnose(const DiagnoseFlags& flags) {
  const fs::path fit_dir(flags.fit_dir);
  const auto model = read_kv(fit_dir / "model.kv");

  ColumnSchema schema;
  schema.time = model.at("time");
  schema.status = model.at("status");
  schema.parametric = split_list(model.at("parametric"));
  schema.nonparametric = split_list(model.at("nonparametric"));
  const SurvivalDataset ds = load_dataset(model.at("data"), schema);
  const RiskSet rs = build_risk_sets(ds);

  const AnovaStructure structure = AnovaStructure::parse(model.at("structure"));
  const int q = std::stoi(model.at("q"));
  const int n_knots = std::stoi(model.at("n_knots"));
  const auto knot_vals = split_list(model.at("knots"));
  if (static_cast<int>(knot_vals.size()) != n_knots * q) {
    throw std::runtime_error("model.kv knot payload is inconsistent");
  }
  Matrix knots(n_knots, q);
  for (int l = 0; l < n_knots; ++l) {
    for (int j = 0; j < q; ++j) knots(l, j) = std::stod(knot_vals[l * q + j]);
  }
  const SplineBasis basis = make_basis(knots, structure);

  const auto coef_vals = split_list(model.at("coef"));
  Vector coef(static_cast<int>(coef_vals.size()));
  for (std::size_t j = 0; j < coef_vals.size(); ++j) coef[j] = std::stod(coef_vals[j]);
  const auto beta_vals = split_list(model.at("beta"));
  Vector beta(static_cast<int>(beta_vals.size()));
  for (std::size_t j = 0; j < beta_vals.size(); ++j) beta[j] = std::stod(beta_vals[j]);

  const Matrix psi_full = basis.design(ds.w);
  const Vector eta_hat = psi_full * coef;

  std::vector<AnovaStructure> candidates;
  if (!flags.candidates.empty()) {
    for (const auto& name : split_list(flags.candidates)) {
      candidates.push_back(AnovaStructure::parse(name));
    }
  } else {
    if (structure.interaction) candidates.push_back(AnovaStructure::additive());
    if (structure.main_w1 && structure.main_w2) {
      candidates.push_back(AnovaStructure::univariate());
      candidates.push_back(AnovaStructure{false, true, false});
    }
    candidates.push_back(AnovaStructure::constant());
  }

  const BiasedWeights weights = biased_weights(ds, rs, beta);
  const auto reports =
      kl_ratio_report(eta_hat, basis, psi_full, candidates, weights, flags.threshold);

  const fs::path out_dir(flags.out.empty() ? fit_dir : fs::path(flags.out));
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "kl_report.csv");
  out << "candidate,kl_full_reduced,kl_reduced_const,kl_full_const,ratio,feasible\n";
  for (const auto& rep : reports) {
    out << rep.candidate.label() << ',' << format_double(rep.kl_full_reduced) << ','
        << format_double(rep.kl_reduced_const) << ',' << format_double(rep.kl_full_const) << ','
        << format_double(rep.ratio) << ',' << (rep.feasible ? 1 : 0) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cox models with semiparametric relative risk: smoothing-spline eta, "
               "one-step SCAD/adaptive-LASSO variable selection, KL model diagnostics"};
  app.require_subcommand(1);

  FitFlags ff;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to a CSV dataset");
  fit_cmd->add_option("--data", ff.data, "CSV file")->required();
  fit_cmd->add_option("--time", ff.time_col, "time column")->required();
  fit_cmd->add_option("--status", ff.status_col, "status column (0/1)")->required();
  fit_cmd->add_option("--parametric", ff.parametric, "comma list of parametric columns");
  fit_cmd->add_option("--nonparametric", ff.nonparametric,
                      "comma list of one or two nonparametric columns")->required();
  fit_cmd->add_option("--penalty", ff.penalty, "scad|alasso|none");
  fit_cmd->add_option("--scad-a", ff.scad_a, "SCAD shape parameter");
  fit_cmd->add_flag("--interaction", ff.interaction, "include the W1:W2 interaction");
  fit_cmd->add_flag("--strict-expansion", ff.strict_expansion,
                    "expand the one-step update at the previous iterate");
  fit_cmd->add_option("--lambda-grid", ff.lambda_grid, "lo,hi,count (log-spaced)");
  fit_cmd->add_option("--theta-grid", ff.theta_grid, "lo,hi,count (log-spaced)");
  fit_cmd->add_option("--seed", ff.seed, "knot-sampling seed");
  fit_cmd->add_option("--out", ff.out, "output directory");

  SimFlags sf;
  auto* sim_cmd = app.add_subcommand("simulate", "run a Monte-Carlo benchmark scenario");
  sim_cmd->add_option("--scenario", sf.scenario,
                      "table1-a|table1-b|table2|table3-1..table3-4");
  sim_cmd->add_option("--scenario-file", sf.scenario_file, "custom scenario (key=value)");
  sim_cmd->add_option("--n", sf.n, "override the sample size");
  sim_cmd->add_option("--replicates", sf.replicates, "number of replicates")
      ->required()
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--procedures", sf.procedures, "comma list of M0,MA,MB,MC,MD,ETA");
  sim_cmd->add_option("--jobs", sf.jobs, "parallel workers (default: cores)");
  sim_cmd->add_option("--mc-size", sf.mc_size, "model-error Monte-Carlo size");
  sim_cmd->add_option("--threshold", sf.threshold, "KL feasibility threshold");
  sim_cmd->add_option("--seed", sf.seed, "base seed");
  sim_cmd->add_option("--out", sf.out, "output directory");

  DiagnoseFlags df;
  auto* diag_cmd = app.add_subcommand("diagnose", "KL feasibility of reduced structures");
  diag_cmd->add_option("--fit", df.fit_dir, "directory produced by `fit`")->required();
  diag_cmd->add_option("--candidates", df.candidates,
                       "comma list of const,w1,w2,additive,full");
  diag_cmd->add_option("--threshold", df.threshold, "feasibility threshold");
  diag_cmd->add_option("--out", df.out, "output directory (default: the fit directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(ff);
    if (sim_cmd->parsed()) {
      if (sf.scenario.empty() == sf.scenario_file.empty()) {
        std::cerr << "simulate needs exactly one of --scenario / --scenario-file\n";
        return 2;
      }
      return run_simulate(sf);
    }
    if (diag_cmd->parsed()) return run_diagnose(df);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
