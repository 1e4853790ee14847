#pragma once

#include <functional>
#include <string>

#include "sscox/backfit.hpp"
#include "sscox/inference.hpp"
#include "sscox/kl_select.hpp"

namespace sscox {

// Nonparametric truths used by the benchmark scenarios. Each integrates to
// (numerically) zero over the unit cube.
enum class TrueEta { A, B, Mix73, Sum };

double eta0a(double w);  // 1.5 sin(2 pi w - pi/2)
double eta0b(double w);  // 4 (w - 0.3)^2 + 4.7 exp(-w) - 3.4643
Vector true_eta_values(TrueEta truth, const Matrix& w);
// smallest ANOVA structure carrying the truth (given q columns are present)
AnovaStructure truth_structure(TrueEta truth, int q);

struct Scenario {
  int n = 150;
  Vector beta0;  // defaults to (0.8,0,0,1,0,0,0.6,0)
  TrueEta eta0 = TrueEta::A;
  int q = 1;
  double censor_target = 0.23;
  std::uint64_t seed = 1;

  Scenario();
};

// Preset scenario names accepted by the CLI: table1-a, table1-b, table2,
// table3-1 ... table3-4.
Scenario preset_scenario(const std::string& name);

// Rate of the exponential censoring distribution hitting the target censoring
// fraction, by bisection over Monte-Carlo draws of the true relative risk.
double calibrate_censoring(const Scenario& sc, double target, int mc_size = 100000);

// One simulated dataset: U multivariate normal with Cov 0.5^{|j-k|}, W
// uniform on [0,1]^q, exponential failure times with hazard exp(U'b0+eta0(W)),
// exponential censoring at `censor_rate` (0 disables censoring).
SurvivalDataset gen_data(const Scenario& sc, double censor_rate, std::uint64_t rep_seed);

// Monte-Carlo model error E[(exp(-U'bhat - etahat(W)) - exp(-U'b0 - eta0(W)))^2]
// over a fresh covariate sample. The evaluator maps W points to eta values.
using EtaEvaluator = std::function<Vector(const Matrix&)>;
double model_error(const Vector& beta_hat, const EtaEvaluator& eta_hat, const Scenario& sc,
                   int mc_size, std::uint64_t seed);

enum class FitClass { Under, Correct, Over };

struct SelectionCounts {
  int cc;  // correctly selected nonzeros
  int ic;  // incorrectly selected nonzeros
  FitClass cls;
};
SelectionCounts classify_fit(const Vector& beta_hat, const Vector& beta0);

// Benchmark procedures. M0 knows the support and the true eta; MA knows the
// support but misspecifies eta as linear; MB knows the support and smooths
// eta; MC / MD run the full pipeline with SCAD / adaptive LASSO; ETA fixes
// beta at the truth and fits eta alone.
enum class Procedure { M0, MA, MB, MC, MD, ETA };

std::string procedure_label(Procedure p);
Procedure parse_procedure(const std::string& s);

struct ReplicateResult {
  bool ok = false;
  std::string error;
  double me = 0.0;
  double rme = 0.0;
  Vector beta_hat;  // embedded in the full coefficient vector
  Vector se;        // NaN where unavailable
  bool has_selection = false;
  int cc = 0, ic = 0;
  FitClass cls = FitClass::Under;
  bool np_valid = false;
  bool sel_w1 = false, sel_w2 = false, sel_w12 = false;
  FitClass np_cls = FitClass::Under;
  bool has_curve = false;
  Vector curve, curve_lo, curve_hi;  // on the 101-point grid, q = 1 only
  double eta_l2 = 0.0;               // integrated squared error vs the truth
  int iterations = 0;
  bool converged = false;
};

struct RunOptions {
  int replicates = 1;
  int jobs = 1;
  int mc_size = 100000;
  double feasibility_threshold = 0.05;
  FitConfig fit;  // grids / tolerances; seed and structure are set per run
  bool curves = true;
};

struct ProcedureSummary {
  Procedure proc;
  int n_ok = 0, n_fail = 0;
  double median_rme = 0.0;
  bool has_selection = false;
  double mean_cc = 0.0, mean_ic = 0.0;
  double prop_under = 0.0, prop_correct = 0.0, prop_over = 0.0;
  bool has_np = false;
  double sel_w1 = 0.0, sel_w2 = 0.0, sel_w12 = 0.0;
  double np_under = 0.0, np_correct = 0.0, np_over = 0.0;
  bool has_curve = false;
  Vector grid_w, curve_mean, curve_q025, curve_q975, ci_lo_mean, ci_hi_mean, coverage;
};

struct TableSummary {
  Scenario scenario;
  double censor_rate = 0.0;
  std::vector<Procedure> procedures;
  std::vector<ProcedureSummary> summaries;
  // replicate results indexed [procedure][replicate]
  std::vector<std::vector<ReplicateResult>> replicates;
};

TableSummary run_table(const Scenario& sc, const std::vector<Procedure>& procedures,
                       const RunOptions& options);

// CSV renderings (also used to check bit-identical reproducibility)
std::string summary_csv(const TableSummary& table);
std::string replicates_csv(const TableSummary& table);
std::string eta_grid_csv(const ProcedureSummary& summary);

// the 101-point evaluation grid 0, 0.01, ..., 1
Matrix curve_grid();

}  // namespace sscox
