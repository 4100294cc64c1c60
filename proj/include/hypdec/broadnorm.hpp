#pragma once

#include <vector>

#include "hypdec/field.hpp"
#include "hypdec/geom.hpp"

namespace hypdec::broadnorm {

// Values attached to the K x K partition of [-1,1]^2 into squares of side
// 2/K. A collection is A-broad when it has >= A cells whose center
// xi-coordinates are pairwise >= 2/K apart, and likewise in eta; on the
// partition grid that means pairwise distinct rows and columns.
struct BroadInstance {
  int K = 0;
  int A = 1;
  std::vector<double> values;  // row-major K*K

  void validate() const;
  geom::Square cell(int r, int c) const {
    double side = 2.0 / K;
    return {{-1 + (r + 0.5) * side, -1 + (c + 0.5) * side}, side};
  }
  double value(int r, int c) const { return values[static_cast<size_t>(r) * K + c]; }
};

struct BroadCollection {
  std::vector<std::pair<int, int>> cells;  // (row, col), lexicographic
};

enum class BroadMethod { exact, greedy };

struct BroadResult {
  double value = 0;
  BroadCollection witness;
};

// exact: threshold sweep over distinct values; feasibility of selecting A
// cells with distinct rows/columns is a bipartite matching question, decided
// exactly. greedy: value-descending constructive selection; never exceeds
// the exact value. Both break ties toward the lexicographically smallest
// witness.
BroadResult broad_value(const BroadInstance& inst, BroadMethod method);

// Core on a raw value table (no witness), used by pointwise field sweeps.
double broad_value_raw(const double* values, int K, int A, BroadMethod method);

// Pointwise broad value of per-cell component fields on a common grid.
// Exact method for K <= 8, greedy above; max observed exact-greedy gap is
// reported through *gap when non-null (sampled when both are computed).
field::SpatialField broad_field(int K, int A,
                                const std::vector<field::SpatialField>& comps,
                                double* gap = nullptr);

// One point of the three-term pointwise decomposition: the cell-max term,
// the strip-max term, and the broad term.
struct DecomposeTerms {
  double field_abs = 0;   // |Ef(x)|
  double term_cell = 0;   // K^{5 eps} max_cell |Ef_cell(x)|
  double term_strip = 0;  // K^{2 eps} max_strip |Ef_strip(x)|
  double term_broad = 0;  // K^3 Br_{A}(x), A = max(2, round(K^eps))
  int dominating = 0;     // 1, 2, or 3 (first of the max)
  double constant = 0;    // field_abs / (sum of terms)
};
DecomposeTerms broad_narrow_decompose(const field::FreqDensity& f, int K,
                                      double eps, Vec3 x);

// Pigeonholing over a table I_{Q,lambda}: selects a lambda, a dyadic level
// [L', 2L'], and the rows where that level is attained. Requires
// I_Q <= C * sum_lambda I_{Q,lambda} and I_Q within a dyadic band [L, 2L].
struct PigeonholeResult {
  int lambda = -1;
  double level = 0;  // L'
  std::vector<int> selected;
  int bucket_count = 0;
};
PigeonholeResult pigeonhole_select(const std::vector<double>& I,
                                   const std::vector<std::vector<double>>& table,
                                   double C);

}  // namespace hypdec::broadnorm
