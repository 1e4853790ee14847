#include "sscox/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sscox/kernel.hpp"
#include "sscox/rng.hpp"

namespace sscox {

namespace {

double term_kernel(AnovaTerm term, const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) {
  switch (term) {
    case AnovaTerm::MainW1:
      return cubic_kernel(x[0], y[0]);
    case AnovaTerm::MainW2:
      return cubic_kernel(x[1], y[1]);
    case AnovaTerm::Interaction: {
      const double r1 = cubic_kernel(x[0], y[0]);
      const double r2 = cubic_kernel(x[1], y[1]);
      const double l1 = bernoulli_k1(x[0]) * bernoulli_k1(y[0]);
      const double l2 = bernoulli_k1(x[1]) * bernoulli_k1(y[1]);
      return l1 * r2 + r1 * l2 + r1 * r2;
    }
  }
  throw std::logic_error("unknown term");
}

double term_null(AnovaTerm term, const Eigen::RowVectorXd& x) {
  switch (term) {
    case AnovaTerm::MainW1:
      return bernoulli_k1(x[0]);
    case AnovaTerm::MainW2:
      return bernoulli_k1(x[1]);
    case AnovaTerm::Interaction:
      return bernoulli_k1(x[0]) * bernoulli_k1(x[1]);
  }
  throw std::logic_error("unknown term");
}

void check_points(const Matrix& points, int q) {
  if (points.cols() != q) throw std::invalid_argument("point dimension mismatch");
  if ((points.array() < -1e-12).any() || (points.array() > 1.0 + 1e-12).any()) {
    throw std::domain_error("evaluation points must lie in [0,1]^q");
  }
}

}  // namespace

bool AnovaStructure::contains(const AnovaStructure& sub) const {
  return (main_w1 || !sub.main_w1) && (main_w2 || !sub.main_w2) &&
         (interaction || !sub.interaction);
}

void AnovaStructure::check_valid(int q) const {
  if (interaction && !(main_w1 && main_w2)) {
    throw std::invalid_argument("interaction requires both main effects");
  }
  if (q == 1 && (main_w2 || interaction)) {
    throw std::invalid_argument("W2 terms requested on a univariate dataset");
  }
}

std::string AnovaStructure::label() const {
  if (interaction) return "full";
  if (main_w1 && main_w2) return "additive";
  if (main_w1) return "w1";
  if (main_w2) return "w2";
  return "const";
}

AnovaStructure AnovaStructure::parse(const std::string& s) {
  if (s == "full") return full();
  if (s == "additive") return additive();
  if (s == "w1") return univariate();
  if (s == "w2") return {false, true, false};
  if (s == "const") return constant();
  throw std::invalid_argument("unknown structure: " + s +
                              " (expected const|w1|w2|additive|full)");
}

std::vector<AnovaTerm> SplineBasis::active_terms() const {
  std::vector<AnovaTerm> terms;
  if (structure.main_w1) terms.push_back(AnovaTerm::MainW1);
  if (structure.main_w2) terms.push_back(AnovaTerm::MainW2);
  if (structure.interaction) terms.push_back(AnovaTerm::Interaction);
  return terms;
}

Matrix SplineBasis::design(const Matrix& points) const {
  check_points(points, q);
  const auto terms = active_terms();
  const int m = static_cast<int>(points.rows());
  Matrix psi(m, cols());
  for (int i = 0; i < m; ++i) {
    const Eigen::RowVectorXd x = points.row(i);
    int col = 0;
    for (auto term : terms) psi(i, col++) = term_null(term, x);
    for (auto term : terms) {
      for (int l = 0; l < n_knots(); ++l) {
        psi(i, col++) = term_kernel(term, x, knots.row(l));
      }
    }
  }
  return psi;
}

Matrix SplineBasis::penalty() const {
  const auto terms = active_terms();
  Matrix r = Matrix::Zero(cols(), cols());
  int offset = null_dim();
  for (auto term : terms) {
    for (int i = 0; i < n_knots(); ++i) {
      for (int j = i; j < n_knots(); ++j) {
        const double v = term_kernel(term, knots.row(i), knots.row(j));
        r(offset + i, offset + j) = v;
        r(offset + j, offset + i) = v;
      }
    }
    offset += n_knots();
  }
  return r;
}

IntVector SplineBasis::columns_for(const AnovaStructure& sub) const {
  if (!structure.contains(sub)) {
    throw std::invalid_argument("structure " + sub.label() + " is not nested in " +
                                structure.label());
  }
  const auto terms = active_terms();
  auto keeps = [&](AnovaTerm t) {
    switch (t) {
      case AnovaTerm::MainW1: return sub.main_w1;
      case AnovaTerm::MainW2: return sub.main_w2;
      case AnovaTerm::Interaction: return sub.interaction;
    }
    return false;
  };
  IntVector cols_out;
  for (int t = 0; t < static_cast<int>(terms.size()); ++t) {
    if (keeps(terms[t])) cols_out.push_back(t);
  }
  for (int t = 0; t < static_cast<int>(terms.size()); ++t) {
    if (!keeps(terms[t])) continue;
    const int start = null_dim() + t * n_knots();
    for (int l = 0; l < n_knots(); ++l) cols_out.push_back(start + l);
  }
  return cols_out;
}

Matrix SplineBasis::design_term_padded(const Matrix& points, AnovaTerm term) const {
  const auto terms = active_terms();
  const int idx = static_cast<int>(std::find(terms.begin(), terms.end(), term) - terms.begin());
  if (idx == static_cast<int>(terms.size())) {
    throw std::invalid_argument("term not active in this basis");
  }
  check_points(points, q);
  const int m = static_cast<int>(points.rows());
  Matrix psi = Matrix::Zero(m, cols());
  for (int i = 0; i < m; ++i) {
    const Eigen::RowVectorXd x = points.row(i);
    psi(i, idx) = term_null(term, x);
    const int start = null_dim() + idx * n_knots();
    for (int l = 0; l < n_knots(); ++l) psi(i, start + l) = term_kernel(term, x, knots.row(l));
  }
  return psi;
}

int knot_count(int n, int n_distinct) {
  const int target = static_cast<int>(std::ceil(10.0 * std::pow(static_cast<double>(n), 0.4)));
  return std::min(target, n_distinct);
}

IntVector select_knots(const SurvivalDataset& ds, std::uint64_t seed) {
  const int n = ds.n();
  const int q = ds.dim_w();
  // canonical list of distinct rows: sorted by value, smallest backing index
  std::vector<int> rows(n);
  for (int i = 0; i < n; ++i) rows[i] = i;
  auto less = [&](int a, int b) {
    for (int j = 0; j < q; ++j) {
      if (ds.w(a, j) != ds.w(b, j)) return ds.w(a, j) < ds.w(b, j);
    }
    return a < b;
  };
  std::sort(rows.begin(), rows.end(), less);
  IntVector distinct;
  for (int i = 0; i < n; ++i) {
    if (!distinct.empty()) {
      const int prev = distinct.back();
      bool equal = true;
      for (int j = 0; j < q; ++j) equal = equal && ds.w(rows[i], j) == ds.w(prev, j);
      if (equal) continue;
    }
    distinct.push_back(rows[i]);
  }

  const int qn = knot_count(n, static_cast<int>(distinct.size()));
  Rng rng(seed);
  for (int i = 0; i < qn; ++i) {
    const auto j = i + static_cast<int>(rng.below(distinct.size() - i));
    std::swap(distinct[i], distinct[j]);
  }
  distinct.resize(qn);
  std::sort(distinct.begin(), distinct.end(), less);
  return distinct;
}

SplineBasis build_basis(const SurvivalDataset& ds, const IntVector& knot_rows,
                        const AnovaStructure& structure) {
  structure.check_valid(ds.dim_w());
  SplineBasis basis;
  basis.q = ds.dim_w();
  basis.structure = structure;
  basis.knot_rows = knot_rows;
  basis.knots.resize(static_cast<int>(knot_rows.size()), basis.q);
  for (std::size_t l = 0; l < knot_rows.size(); ++l) {
    basis.knots.row(static_cast<int>(l)) = ds.w.row(knot_rows[l]);
  }
  return basis;
}

SplineBasis make_basis(const Matrix& knots, const AnovaStructure& structure) {
  const int q = static_cast<int>(knots.cols());
  structure.check_valid(q);
  SplineBasis basis;
  basis.q = q;
  basis.structure = structure;
  basis.knots = knots;
  return basis;
}

Vector evaluate(const SplineBasis& basis, const Vector& coef, const Matrix& points) {
  if (coef.size() != basis.cols()) throw std::invalid_argument("coefficient dimension mismatch");
  return basis.design(points) * coef;
}

}  // namespace sscox
