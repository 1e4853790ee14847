#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sscox/dataset.hpp"
#include "sscox/types.hpp"

namespace sscox {

enum class AnovaTerm { MainW1, MainW2, Interaction };

// Which ANOVA terms of eta(w1[,w2]) are active. The interaction requires both
// main effects.
struct AnovaStructure {
  bool main_w1 = false;
  bool main_w2 = false;
  bool interaction = false;

  int n_terms() const { return int(main_w1) + int(main_w2) + int(interaction); }
  bool contains(const AnovaStructure& sub) const;
  bool operator==(const AnovaStructure& other) const = default;
  void check_valid(int q) const;

  std::string label() const;                       // "const", "w1", "w2", "additive", "full"
  static AnovaStructure parse(const std::string&); // inverse of label()

  static AnovaStructure univariate() { return {true, false, false}; }
  static AnovaStructure additive() { return {true, true, false}; }
  static AnovaStructure full() { return {true, true, true}; }
  static AnovaStructure constant() { return {false, false, false}; }
};

// Finite-dimensional estimation space for eta: per active term one null-space
// column (k1 main effects, bilinear k1*k1 for the interaction) followed by one
// reproducing-kernel block of n_knots columns per active term. Immutable after
// construction; evaluation is reentrant.
struct SplineBasis {
  Matrix knots;        // n_knots x q, rows of W
  IntVector knot_rows; // dataset row backing each knot
  AnovaStructure structure;
  int q = 1;

  int n_knots() const { return static_cast<int>(knots.rows()); }
  int null_dim() const { return structure.n_terms(); }
  int cols() const { return null_dim() + structure.n_terms() * n_knots(); }

  std::vector<AnovaTerm> active_terms() const;

  // design matrix at points (already on the [0,1] scale)
  Matrix design(const Matrix& points) const;
  // block-diagonal penalty Gram matrix, zero on the null-space columns
  Matrix penalty() const;
  // column indices belonging to the terms of a nested substructure
  IntVector columns_for(const AnovaStructure& sub) const;
  // design with every column outside `term` zeroed, for component curves
  Matrix design_term_padded(const Matrix& points, AnovaTerm term) const;
};

// Number of knots: ceil(10 n^{2/5}) capped at the number of distinct W rows.
int knot_count(int n, int n_distinct);

// Seeded sample of distinct W rows; returned indices are in a canonical
// (value-sorted) order so row permutations of the dataset give the same knots.
IntVector select_knots(const SurvivalDataset& ds, std::uint64_t seed);

SplineBasis build_basis(const SurvivalDataset& ds, const IntVector& knot_rows,
                        const AnovaStructure& structure);

// basis from explicit knot locations (e.g. reloaded from a fit artifact)
SplineBasis make_basis(const Matrix& knots, const AnovaStructure& structure);

// eta at the given points; linear in the coefficients.
Vector evaluate(const SplineBasis& basis, const Vector& coef, const Matrix& points);

}  // namespace sscox
