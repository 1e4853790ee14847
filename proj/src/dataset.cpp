#include "sscox/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include "sscox/csv.hpp"

namespace sscox {

namespace {

void validate(const SurvivalDataset& ds) {
  const int n = ds.n();
  if (n < 2) throw std::invalid_argument("dataset needs at least two subjects");
  if (ds.events.size() != n || ds.u.rows() != n || ds.w.rows() != n) {
    throw std::invalid_argument("dataset fields disagree on the number of subjects");
  }
  const int q = ds.dim_w();
  if (q < 1 || q > 2) throw std::invalid_argument("one or two nonparametric covariates supported");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(ds.times[i]) || ds.times[i] < 0.0) {
      throw std::invalid_argument("times must be finite and nonnegative");
    }
    if (ds.events[i] != 0 && ds.events[i] != 1) {
      throw std::invalid_argument("invalid status: events must be 0 or 1");
    }
  }
  if (!ds.u.allFinite()) throw std::invalid_argument("nonfinite parametric covariate");
  if (!ds.w.allFinite()) throw std::invalid_argument("nonfinite nonparametric covariate");
  if ((ds.w.array() < -1e-12).any() || (ds.w.array() > 1.0 + 1e-12).any()) {
    throw std::invalid_argument("rescaled W outside [0,1]");
  }
}

bool parse_cell(const std::string& cell, double* out) {
  // empty / NA marks a missing value; anything else must parse fully
  if (cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan") {
    return false;
  }
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw std::runtime_error("non-numeric cell: '" + cell + "'");
  }
  if (!std::isfinite(v)) return false;
  *out = v;
  return true;
}

}  // namespace

SurvivalDataset make_dataset(const Vector& times, const Eigen::VectorXi& events,
                             const Matrix& u, const Matrix& w, bool rescale_w) {
  SurvivalDataset ds;
  ds.times = times;
  ds.events = events;
  ds.u = u;
  ds.w = w;
  const int q = static_cast<int>(w.cols());
  ds.w_min = Vector::Zero(q);
  ds.w_max = Vector::Ones(q);
  if (rescale_w) {
    for (int j = 0; j < q; ++j) {
      const double lo = w.col(j).minCoeff();
      const double hi = w.col(j).maxCoeff();
      if (!(hi > lo)) throw std::invalid_argument("constant nonparametric column");
      ds.w_min[j] = lo;
      ds.w_max[j] = hi;
      ds.w.col(j) = (w.col(j).array() - lo) / (hi - lo);
    }
  }
  validate(ds);
  ds.failure_order.clear();
  for (int i = 0; i < ds.n(); ++i) {
    if (ds.events[i] == 1) ds.failure_order.push_back(i);
  }
  std::stable_sort(ds.failure_order.begin(), ds.failure_order.end(),
                   [&](int a, int b) { return ds.times[a] < ds.times[b]; });
  return ds;
}

SurvivalDataset load_dataset(const std::string& path, const ColumnSchema& schema) {
  const CsvTable table = read_csv(path);
  std::set<std::string> seen;
  for (const auto& name : table.header) {
    if (!seen.insert(name).second) throw std::runtime_error("duplicate column name: " + name);
  }
  if (schema.nonparametric.empty() || schema.nonparametric.size() > 2) {
    throw std::runtime_error("schema needs one or two nonparametric columns");
  }

  std::vector<int> cols;
  auto require = [&](const std::string& name) {
    const int j = table.column(name);
    if (j < 0) throw std::runtime_error("missing column: " + name);
    return j;
  };
  const int time_col = require(schema.time);
  const int status_col = require(schema.status);
  std::vector<int> u_cols, w_cols;
  for (const auto& name : schema.parametric) u_cols.push_back(require(name));
  for (const auto& name : schema.nonparametric) w_cols.push_back(require(name));

  const int d = static_cast<int>(u_cols.size());
  const int q = static_cast<int>(w_cols.size());
  std::vector<double> times_v;
  std::vector<int> events_v;
  std::vector<std::vector<double>> u_rows, w_rows;

  for (const auto& row : table.rows) {
    double tv;
    if (!parse_cell(row[time_col], &tv)) continue;  // missing value: drop the row
    double sv;
    if (!parse_cell(row[status_col], &sv)) continue;
    if (sv != 0.0 && sv != 1.0) throw std::runtime_error("invalid status: " + row[status_col]);
    std::vector<double> ur(d), wr(q);
    bool complete = true;
    for (int j = 0; j < d && complete; ++j) complete = parse_cell(row[u_cols[j]], &ur[j]);
    for (int j = 0; j < q && complete; ++j) complete = parse_cell(row[w_cols[j]], &wr[j]);
    if (!complete) continue;
    times_v.push_back(tv);
    events_v.push_back(static_cast<int>(sv));
    u_rows.push_back(std::move(ur));
    w_rows.push_back(std::move(wr));
  }

  const int n = static_cast<int>(times_v.size());
  if (n < 2) throw std::runtime_error("fewer than two complete rows in " + path);
  Vector times(n);
  Eigen::VectorXi events(n);
  Matrix u(n, d), w(n, q);
  for (int i = 0; i < n; ++i) {
    times[i] = times_v[i];
    events[i] = events_v[i];
    for (int j = 0; j < d; ++j) u(i, j) = u_rows[i][j];
    for (int j = 0; j < q; ++j) w(i, j) = w_rows[i][j];
  }
  if (events.sum() == 0) throw std::runtime_error("all-censored data: no failures");

  SurvivalDataset ds = make_dataset(times, events, u, w, /*rescale_w=*/true);
  ds.u_names = schema.parametric;
  ds.w_names = schema.nonparametric;
  return ds;
}

Matrix original_w(const SurvivalDataset& ds) {
  Matrix out = ds.w;
  for (int j = 0; j < ds.dim_w(); ++j) {
    out.col(j) = ds.w.col(j).array() * (ds.w_max[j] - ds.w_min[j]) + ds.w_min[j];
  }
  return out;
}

IntVector RiskSet::members(int p) const {
  IntVector out;
  for (std::size_t pos = failure_start[p]; pos < order.size(); ++pos) {
    out.push_back(order[pos]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

RiskSet build_risk_sets(const SurvivalDataset& ds) {
  if (ds.n_failures() < 1) throw std::invalid_argument("no failures: risk sets undefined");
  const int n = ds.n();
  RiskSet rs;
  rs.order.resize(n);
  for (int i = 0; i < n; ++i) rs.order[i] = i;
  std::stable_sort(rs.order.begin(), rs.order.end(),
                   [&](int a, int b) { return ds.times[a] < ds.times[b]; });
  rs.position.resize(n);
  for (int pos = 0; pos < n; ++pos) rs.position[rs.order[pos]] = pos;

  for (int subject : ds.failure_order) {
    const double t = ds.times[subject];
    // first position with X >= t; ties (including censored ties) stay in
    int lo = 0, hi = n;
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (ds.times[rs.order[mid]] < t) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    rs.failure_start.push_back(lo);
    rs.failure_subject.push_back(subject);
  }
  return rs;
}

}  // namespace sscox
