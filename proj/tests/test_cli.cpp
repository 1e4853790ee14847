#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SSCOX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// small synthetic dataset with one informative parametric covariate and one
// smooth nonparametric effect
void write_dataset(const fs::path& p) {
  std::ofstream out(p);
  out << "t,s,x1,x2,z\n";
  unsigned state = 12345;
  auto unif = [&] {
    state = state * 1103515245u + 12345u;
    return ((state >> 16) & 0x7fff) / 32768.0;
  };
  for (int i = 0; i < 120; ++i) {
    const double x1 = unif() * 2 - 1;
    const double x2 = unif() * 2 - 1;
    const double z = unif();
    const double lp = 0.9 * x1 + 1.2 * (z - 0.5);
    const double t = -std::log(1 - unif() + 1e-12) / std::exp(lp);
    const int s = unif() < 0.75 ? 1 : 0;
    out << t << ',' << s << ',' << x1 << ',' << x2 << ',' << z << '\n';
  }
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("fit --data /tmp/whatever.csv --status s --nonparametric z") == 2);
  CHECK(run("simulate --scenario table1-a --replicates 0") == 2);
  CHECK(run("bogus-subcommand") == 2);
}

TEST_CASE("data failures exit with code 1") {
  CHECK(run("fit --data /tmp/does-not-exist.csv --time t --status s --nonparametric z") == 1);
  CHECK(run("simulate --scenario no-such-table --replicates 1") == 1);
}

TEST_CASE("fit then diagnose round trip") {
  TempDir dir("sscox_cli_fit");
  const fs::path csv = dir.path / "data.csv";
  write_dataset(csv);
  const std::string out = (dir.path / "fit").string();
  CHECK(run("fit --data " + csv.string() + " --time t --status s --parametric x1,x2 "
            "--nonparametric z --seed 3 --out " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "manifest.kv"));
  CHECK(fs::exists(fs::path(out) / "fit.kv"));
  CHECK(fs::exists(fs::path(out) / "eta_curve.csv"));
  CHECK(fs::exists(fs::path(out) / "report.txt"));

  CHECK(run("diagnose --fit " + out) == 0);
  const std::string report = slurp(fs::path(out) / "kl_report.csv");
  CHECK(report.find("candidate,kl_full_reduced") != std::string::npos);
  CHECK(report.find("const") != std::string::npos);
}

TEST_CASE("identical seeds give byte-identical artifacts") {
  TempDir dir("sscox_cli_det");
  const fs::path csv = dir.path / "data.csv";
  write_dataset(csv);
  const std::string a = (dir.path / "a").string(), b = (dir.path / "b").string();
  const std::string flags = "fit --data " + csv.string() +
                            " --time t --status s --parametric x1,x2 --nonparametric z --seed 9";
  CHECK(run(flags + " --out " + a) == 0);
  CHECK(run(flags + " --out " + b) == 0);
  CHECK(slurp(fs::path(a) / "manifest.kv") == slurp(fs::path(b) / "manifest.kv"));
  CHECK(slurp(fs::path(a) / "fit.kv") == slurp(fs::path(b) / "fit.kv"));
  CHECK(slurp(fs::path(a) / "eta_curve.csv") == slurp(fs::path(b) / "eta_curve.csv"));

  const std::string s1 = (dir.path / "s1").string(), s2 = (dir.path / "s2").string();
  const std::string sim = "simulate --scenario table1-a --n 80 --replicates 2 --seed 5 "
                          "--procedures MC --mc-size 2000";
  CHECK(run(sim + " --out " + s1) == 0);
  CHECK(run(sim + " --out " + s2) == 0);
  CHECK(slurp(fs::path(s1) / "summary.csv") == slurp(fs::path(s2) / "summary.csv"));
  CHECK(slurp(fs::path(s1) / "replicates.csv") == slurp(fs::path(s2) / "replicates.csv"));
  CHECK(slurp(fs::path(s1) / "manifest.kv") == slurp(fs::path(s2) / "manifest.kv"));
}

TEST_CASE("alasso keeps at least as many covariates as scad") {
  TempDir dir("sscox_cli_pen");
  const fs::path csv = dir.path / "data.csv";
  write_dataset(csv);
  const std::string scad = (dir.path / "scad").string();
  const std::string alasso = (dir.path / "alasso").string();
  const std::string base = "fit --data " + csv.string() +
                           " --time t --status s --parametric x1,x2 --nonparametric z --seed 3";
  CHECK(run(base + " --penalty scad --out " + scad) == 0);
  CHECK(run(base + " --penalty alasso --out " + alasso) == 0);
  auto count_active = [&](const std::string& dir_path) {
    const std::string kv = slurp(fs::path(dir_path) / "fit.kv");
    int active = 0;
    std::stringstream ss(kv);
    std::string line;
    while (std::getline(ss, line)) {
      if (line.rfind("active.", 0) == 0 && line.back() == '1') ++active;
    }
    return active;
  };
  CHECK(count_active(alasso) >= count_active(scad));
}
