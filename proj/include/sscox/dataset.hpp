#pragma once

#include <string>
#include <vector>

#include "sscox/types.hpp"

namespace sscox {

// Column roles for CSV ingestion. `parametric` columns become U, the at most
// two `nonparametric` columns become W.
struct ColumnSchema {
  std::string time;
  std::string status;
  std::vector<std::string> parametric;
  std::vector<std::string> nonparametric;
};

// Right-censored survival data. Immutable after construction and safe to
// share across threads. W columns are stored on [0,1]; the original column
// ranges are kept so values can be mapped back.
struct SurvivalDataset {
  Vector times;             // follow-up times X_i >= 0
  Eigen::VectorXi events;   // failure indicators, 0/1
  Matrix u;                 // n x d parametric covariates
  Matrix w;                 // n x q nonparametric covariates, in [0,1]
  Vector w_min, w_max;      // affine rescale: stored = (orig - min) / (max - min)
  IntVector failure_order;  // failed subject indices, nondecreasing in time

  std::vector<std::string> u_names;  // optional, for reports
  std::vector<std::string> w_names;

  int n() const { return static_cast<int>(times.size()); }
  int dim_u() const { return static_cast<int>(u.cols()); }
  int dim_w() const { return static_cast<int>(w.cols()); }
  int n_failures() const { return static_cast<int>(failure_order.size()); }
};

// Validates, rescales W when `rescale_w` is set (otherwise requires values
// already in [0,1] and stores an identity transform), and orders failures.
SurvivalDataset make_dataset(const Vector& times, const Eigen::VectorXi& events,
                             const Matrix& u, const Matrix& w, bool rescale_w = true);

SurvivalDataset load_dataset(const std::string& path, const ColumnSchema& schema);

// Back-transform of the stored W columns to their original scale.
Matrix original_w(const SurvivalDataset& ds);

// Risk sets of the failures, in failure order. Subjects are held sorted by
// time so every risk set {k : X_k >= X_{i_p}} is a suffix of `order`.
struct RiskSet {
  IntVector order;            // all subjects, ascending in time (ties by index)
  IntVector position;         // position of subject k inside `order`
  IntVector failure_start;    // per failure: first position of its risk set
  IntVector failure_subject;  // per failure: subject index i_p

  int n_failures() const { return static_cast<int>(failure_start.size()); }
  // materialized index list, for oracles and diagnostics
  IntVector members(int p) const;
};

RiskSet build_risk_sets(const SurvivalDataset& ds);

}  // namespace sscox
