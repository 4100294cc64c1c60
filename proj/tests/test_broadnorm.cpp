#include <doctest.h>

#include <functional>

#include "hypdec/broadnorm.hpp"
#include "hypdec/rng.hpp"

using namespace hypdec;
using namespace hypdec::broadnorm;

namespace {

BroadInstance random_instance(int K, int A, uint64_t seed, double zero_frac = 0) {
  BroadInstance inst;
  inst.K = K;
  inst.A = A;
  inst.values.assign(static_cast<size_t>(K) * K, 0.0);
  CounterRng rng(seed, "test-broad", K, A);
  for (auto& v : inst.values)
    v = rng.next_unit() < zero_frac ? 0.0 : rng.next_real(0, 10);
  return inst;
}

// Independent oracle: enumerate A-subsets of active cells directly,
// recursing row by row with pruning on remaining rows.
bool feasible_enum(const std::vector<std::pair<int, int>>& cells, int K, int A) {
  std::vector<std::vector<int>> by_row(K);
  for (auto [r, c] : cells) by_row[r].push_back(c);
  std::vector<uint8_t> used_col(K, 0);
  std::function<bool(int, int)> rec = [&](int row, int need) -> bool {
    if (need == 0) return true;
    if (row >= K || K - row < need) return false;
    if (rec(row + 1, need)) return true;  // skip this row
    for (int c : by_row[row]) {
      if (used_col[c]) continue;
      used_col[c] = 1;
      if (rec(row + 1, need - 1)) {
        used_col[c] = 0;
        return true;
      }
      used_col[c] = 0;
    }
    return false;
  };
  return rec(0, A);
}

double broad_enum(const BroadInstance& inst) {
  std::vector<double> vals = inst.values;
  std::sort(vals.begin(), vals.end(), std::greater<>());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  for (double v : vals) {
    if (v <= 0) break;
    std::vector<std::pair<int, int>> active;
    for (int r = 0; r < inst.K; ++r)
      for (int c = 0; c < inst.K; ++c)
        if (inst.value(r, c) >= v) active.emplace_back(r, c);
    if (feasible_enum(active, inst.K, inst.A)) return v;
  }
  return 0;
}

}  // namespace

TEST_CASE("spec'd 2x2 instance") {
  BroadInstance inst;
  inst.K = 2;
  inst.A = 2;
  // cells (row=xi index, col=eta index): centers at (-.5,-.5), (-.5,.5), ...
  inst.values = {10, 10, 1, 2};
  auto r = broad_value(inst, BroadMethod::exact);
  CHECK(r.value == 2);
  REQUIRE(r.witness.cells.size() == 2);
  CHECK(r.witness.cells[0] == std::pair<int, int>{0, 0});
  CHECK(r.witness.cells[1] == std::pair<int, int>{1, 1});
}

TEST_CASE("flat values achieve themselves; one row achieves zero") {
  BroadInstance flat;
  flat.K = 4;
  flat.A = 2;
  flat.values.assign(16, 3.5);
  CHECK(broad_value(flat, BroadMethod::exact).value == 3.5);
  CHECK(broad_value(flat, BroadMethod::greedy).value == 3.5);

  BroadInstance row;
  row.K = 4;
  row.A = 2;
  row.values.assign(16, 0.0);
  for (int c = 0; c < 4; ++c) row.values[1 * 4 + c] = 7;  // single row
  auto r = broad_value(row, BroadMethod::exact);
  CHECK(r.value == 0);
  CHECK(r.witness.cells.empty());
}

TEST_CASE("exact equals independent enumeration") {
  for (int t = 0; t < 100; ++t) {
    BroadInstance inst = random_instance(4, 2 + t % 3, 100 + t, t % 2 ? 0.5 : 0);
    double a = broad_value(inst, BroadMethod::exact).value;
    CHECK(a == broad_enum(inst));
  }
  for (int t = 0; t < 20; ++t) {
    BroadInstance inst = random_instance(8, 2 + t % 5, 300 + t, 0.3);
    CHECK(broad_value(inst, BroadMethod::exact).value == broad_enum(inst));
  }
}

TEST_CASE("greedy never exceeds exact; equality on spread flat support") {
  for (int t = 0; t < 80; ++t) {
    BroadInstance inst = random_instance(8, 2 + t % 4, 700 + t, 0.4);
    double g = broad_value(inst, BroadMethod::greedy).value;
    double e = broad_value(inst, BroadMethod::exact).value;
    CHECK(g <= e + 1e-15);
  }
  // equal values spread over >= 3(A-1)+1 distinct rows and columns: the
  // constructive selection runs to completion
  int A = 3;
  BroadInstance inst;
  inst.K = 8;
  inst.A = A;
  inst.values.assign(64, 0.0);
  for (int k = 0; k < 3 * (A - 1) + 1; ++k) inst.values[k * 8 + k] = 5;
  CHECK(broad_value(inst, BroadMethod::greedy).value == 5);
  CHECK(broad_value(inst, BroadMethod::exact).value == 5);
}

TEST_CASE("monotone in A, bounded by the max, triangle and bilinear bounds") {
  CounterRng rng(4, "test-broad-props", 0, 0);
  for (int t = 0; t < 60; ++t) {
    BroadInstance inst = random_instance(4, 1, 900 + t, 0.2);
    double prev = 1e300;
    for (int A = 1; A <= 4; ++A) {
      inst.A = A;
      double v = broad_value(inst, BroadMethod::exact).value;
      CHECK(v <= prev + 1e-15);  // non-increasing in A
      prev = v;
      double mx = *std::max_element(inst.values.begin(), inst.values.end());
      CHECK(v <= mx + 1e-15);
    }
    // triangle: split values into two parts, A = A1 + A2
    inst.A = 4;
    BroadInstance p1 = inst, p2 = inst;
    for (size_t i = 0; i < inst.values.size(); ++i) {
      double frac = rng.next_unit();
      p1.values[i] = inst.values[i] * frac;
      p2.values[i] = inst.values[i] * (1 - frac);
    }
    p1.A = 2;
    p2.A = 2;
    double whole = broad_value(inst, BroadMethod::exact).value;
    double parts = broad_value(p1, BroadMethod::exact).value +
                   broad_value(p2, BroadMethod::exact).value;
    CHECK(whole <= parts + 1e-12);
    // bilinear: A >= 2 bounded by the best separated geometric mean
    inst.A = 2;
    double br2 = broad_value(inst, BroadMethod::exact).value;
    double best = 0;
    for (int r1 = 0; r1 < 4; ++r1)
      for (int c1 = 0; c1 < 4; ++c1)
        for (int r2 = 0; r2 < 4; ++r2)
          for (int c2 = 0; c2 < 4; ++c2) {
            if (r1 == r2 || c1 == c2) continue;
            best = std::max(best,
                            std::sqrt(inst.value(r1, c1) * inst.value(r2, c2)));
          }
    CHECK(br2 <= best + 1e-12);
  }
}

TEST_CASE("broad field: single cell vanishes for A >= 2, A = 1 is the max") {
  field::GridSpec grid = field::GridSpec::centered_box({0, 0, 0}, 1.0, 0.5);
  int K = 4;
  std::vector<field::SpatialField> comps(K * K);
  CounterRng rng(17, "test-broad-field", 0, 0);
  for (auto& c : comps) {
    c.grid = grid;
    c.R = 16;
    c.a.assign(static_cast<size_t>(grid.dims[0]) * grid.dims[1] * grid.dims[2],
               cd{0, 0});
  }
  // A >= 2 with only one live cell: identically zero
  for (auto& v : comps[5].a) v = cd{3, 4};
  auto out = broad_field(K, 2, comps);
  for (const cd& v : out.a) CHECK(std::abs(v) == 0);
  // A = 1: pointwise max over cells
  for (auto& v : comps[9].a) v = cd{0, 1};
  out = broad_field(K, 1, comps);
  for (const cd& v : out.a) CHECK(std::abs(v) == doctest::Approx(5));
  // random small instance against per-point enumeration
  for (auto& c : comps)
    for (auto& v : c.a) v = cd{rng.next_real(-1, 1), rng.next_real(-1, 1)};
  out = broad_field(K, 3, comps);
  for (size_t idx = 0; idx < out.a.size(); idx += 7) {
    BroadInstance inst;
    inst.K = K;
    inst.A = 3;
    inst.values.resize(static_cast<size_t>(K) * K);
    for (int c = 0; c < K * K; ++c) inst.values[c] = std::abs(comps[c].a[idx]);
    CHECK(std::abs(out.a[idx]) == doctest::Approx(broad_enum(inst)).epsilon(1e-12));
  }
}

TEST_CASE("pigeonhole selection satisfies the three conclusions") {
  CounterRng rng(23, "test-pigeon", 0, 0);
  for (int t = 0; t < 200; ++t) {
    int nQ = 20, nL = 5;
    double C = 2.0;
    std::vector<std::vector<double>> table(nQ, std::vector<double>(nL));
    std::vector<double> I(nQ);
    double L = rng.next_real(0.5, 2);
    for (int q = 0; q < nQ; ++q) {
      I[q] = L * (1 + rng.next_unit());
      for (int l = 0; l < nL; ++l) table[q][l] = rng.next_real(0.01, 8.0);
      // enforce the domination hypothesis
      double sum = 0;
      for (double v : table[q]) sum += v;
      if (I[q] > C * sum) {
        double scale = C * sum / I[q];
        I[q] *= scale;
      }
    }
    double A = 1e300, B = 0;
    for (auto& row : table)
      for (double v : row) A = std::min(A, v), B = std::max(B, v);
    auto res = pigeonhole_select(I, table, C);
    REQUIRE(res.lambda >= 0);
    REQUIRE(!res.selected.empty());
    // (1) the selected rows sit in the dyadic level [L', 2L']
    for (int q : res.selected) {
      CHECK(table[q][res.lambda] >= res.level * (1 - 1e-12));
      CHECK(table[q][res.lambda] <= 2 * res.level * (1 + 1e-12));
    }
    // (2) the selected set is a 1/(buckets * nL) fraction of all rows
    CHECK(static_cast<int>(res.selected.size()) * res.bucket_count * nL >= nQ);
    // (3) the selected mass dominates the total up to the stated constant
    double total = 0, picked = 0;
    for (double v : I) total += v;
    for (int q : res.selected) picked += table[q][res.lambda];
    CHECK(picked * 2 * C * res.bucket_count * nL * nL >= total);
  }
}

TEST_CASE("pigeonhole degenerate and error cases") {
  // single lambda, constant table: everything selected
  std::vector<double> I(6, 1.0);
  std::vector<std::vector<double>> table(6, std::vector<double>{0.9});
  auto res = pigeonhole_select(I, table, 2.0);
  CHECK(res.lambda == 0);
  CHECK(res.selected.size() == 6);
  // two lambdas, one carries all the mass
  std::vector<std::vector<double>> table2(6, std::vector<double>{1e-9, 3.0});
  res = pigeonhole_select(I, table2, 2.0);
  CHECK(res.lambda == 1);
  // violated domination hypothesis is rejected
  std::vector<std::vector<double>> bad(6, std::vector<double>{1e-9, 1e-9});
  CHECK_THROWS_AS(pigeonhole_select(I, bad, 2.0), std::invalid_argument);
}
