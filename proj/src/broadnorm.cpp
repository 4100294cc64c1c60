#include "hypdec/broadnorm.hpp"

#include <algorithm>
#include <cmath>

namespace hypdec::broadnorm {

void BroadInstance::validate() const {
  if (K < 1 || (K & (K - 1)) != 0)
    throw std::invalid_argument("BroadInstance: K must be a power of 2");
  if (A < 1 || A > K * K)
    throw std::invalid_argument("BroadInstance: need 1 <= A <= K^2");
  if (values.size() != static_cast<size_t>(K) * K)
    throw std::invalid_argument("BroadInstance: bad value table size");
  for (double v : values)
    if (!(v >= 0)) throw std::invalid_argument("BroadInstance: negative value");
}

namespace {

// Maximum matching (rows to columns) over cells with value >= threshold.
// Kuhn's augmenting paths; K <= 32 keeps this trivial.
int matching_size(const double* values, int K, double threshold, int stop_at) {
  std::vector<int> col_of_row(K, -1), row_of_col(K, -1);
  std::vector<uint8_t> seen(K);
  std::function<bool(int)> try_row = [&](int r) -> bool {
    for (int c = 0; c < K; ++c) {
      if (values[static_cast<size_t>(r) * K + c] < threshold || seen[c])
        continue;
      seen[c] = 1;
      if (row_of_col[c] < 0 || try_row(row_of_col[c])) {
        row_of_col[c] = r;
        col_of_row[r] = c;
        return true;
      }
    }
    return false;
  };
  int size = 0;
  for (int r = 0; r < K && size < stop_at; ++r) {
    std::fill(seen.begin(), seen.end(), 0);
    if (try_row(r)) ++size;
  }
  return size;
}

bool feasible(const double* values, int K, int A, double threshold) {
  if (A > K) return false;  // at most K distinct rows
  return matching_size(values, K, threshold, A) >= A;
}

// Lexicographically smallest A-broad collection with all values >= v.
BroadCollection lex_witness(const double* values, int K, int A, double v) {
  BroadCollection w;
  std::vector<double> rest(values, values + static_cast<size_t>(K) * K);
  std::vector<uint8_t> used_row(K, 0), used_col(K, 0);
  int need = A;
  for (int r = 0; r < K && need > 0; ++r) {
    if (used_row[r]) continue;
    for (int c = 0; c < K && need > 0; ++c) {
      if (used_col[c] || values[static_cast<size_t>(r) * K + c] < v) continue;
      // tentatively take (r, c); keep it if the remainder stays feasible
      std::vector<double> masked = rest;
      for (int cc = 0; cc < K; ++cc) masked[static_cast<size_t>(r) * K + cc] = -1;
      for (int rr = 0; rr < K; ++rr) masked[static_cast<size_t>(rr) * K + c] = -1;
      if (need - 1 == 0 || matching_size(masked.data(), K, v, need - 1) >= need - 1) {
        w.cells.emplace_back(r, c);
        used_row[r] = used_col[c] = 1;
        rest = masked;
        --need;
        break;  // row consumed
      }
    }
  }
  return w;
}

}  // namespace

double broad_value_raw(const double* values, int K, int A, BroadMethod method) {
  if (A == 1) {
    double m = 0;
    for (int i = 0; i < K * K; ++i) m = std::max(m, values[i]);
    return m;
  }
  if (A == 2) {
    // descending scan; a new cell completes a row/column-separated pair
    // unless every earlier cell shares its row or its column
    thread_local std::vector<int> order;
    order.resize(static_cast<size_t>(K) * K);
    for (int i = 0; i < K * K; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return values[a] > values[b]; });
    thread_local std::vector<int> row_cnt, col_cnt;
    row_cnt.assign(K, 0);
    col_cnt.assign(K, 0);
    int seen = 0;
    for (int idx : order) {
      double v = values[idx];
      if (v <= 0) break;
      int r = idx / K, c = idx % K;
      if (seen - row_cnt[r] - col_cnt[c] > 0) return v;
      ++row_cnt[r];
      ++col_cnt[c];
      ++seen;
    }
    return 0;
  }
  if (method == BroadMethod::greedy) {
    std::vector<int> order(static_cast<size_t>(K) * K);
    for (int i = 0; i < K * K; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return values[a] > values[b];
    });
    std::vector<uint8_t> used_row(K, 0), used_col(K, 0);
    int taken = 0;
    double last = 0;
    for (int idx : order) {
      if (values[idx] <= 0) break;
      int r = idx / K, c = idx % K;
      if (used_row[r] || used_col[c]) continue;
      used_row[r] = used_col[c] = 1;
      last = values[idx];
      if (++taken == A) return last;
    }
    return 0;
  }
  // exact: descending sweep over distinct positive values
  std::vector<double> vals(values, values + static_cast<size_t>(K) * K);
  std::sort(vals.begin(), vals.end(), std::greater<>());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  for (double v : vals) {
    if (v <= 0) break;
    if (feasible(values, K, A, v)) return v;
  }
  return 0;
}

BroadResult broad_value(const BroadInstance& inst, BroadMethod method) {
  inst.validate();
  BroadResult out;
  out.value = broad_value_raw(inst.values.data(), inst.K, inst.A, method);
  if (out.value <= 0) return out;
  if (method == BroadMethod::exact) {
    out.witness = lex_witness(inst.values.data(), inst.K, inst.A, out.value);
  } else {
    // reconstruct the greedy picks
    std::vector<int> order(static_cast<size_t>(inst.K) * inst.K);
    for (int i = 0; i < inst.K * inst.K; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return inst.values[a] > inst.values[b];
    });
    std::vector<uint8_t> used_row(inst.K, 0), used_col(inst.K, 0);
    for (int idx : order) {
      if (static_cast<int>(out.witness.cells.size()) == inst.A) break;
      int r = idx / inst.K, c = idx % inst.K;
      if (used_row[r] || used_col[c] || inst.values[idx] <= 0) continue;
      used_row[r] = used_col[c] = 1;
      out.witness.cells.emplace_back(r, c);
    }
    std::sort(out.witness.cells.begin(), out.witness.cells.end());
  }
  return out;
}

field::SpatialField broad_field(int K, int A,
                                const std::vector<field::SpatialField>& comps,
                                double* gap) {
  if (comps.size() != static_cast<size_t>(K) * K)
    throw std::invalid_argument("broad_field: need K^2 components");
  for (const auto& c : comps)
    if (c.grid.dims != comps[0].grid.dims || c.grid.h_x != comps[0].grid.h_x)
      throw std::invalid_argument("broad_field: grid mismatch");
  field::SpatialField out = comps[0];
  std::vector<double> vals(static_cast<size_t>(K) * K);
  double worst_gap = 0;
  bool exact = K <= 8;
  for (size_t idx = 0; idx < out.a.size(); ++idx) {
    for (int c = 0; c < K * K; ++c) vals[c] = std::abs(comps[c].a[idx]);
    double v = broad_value_raw(vals.data(), K, A,
                               exact ? BroadMethod::exact : BroadMethod::greedy);
    if (gap && !exact) {
      double e = broad_value_raw(vals.data(), K, A, BroadMethod::exact);
      worst_gap = std::max(worst_gap, e - v);
    }
    out.a[idx] = v;
  }
  if (gap) *gap = worst_gap;
  return out;
}

DecomposeTerms broad_narrow_decompose(const field::FreqDensity& f, int K,
                                      double eps, Vec3 x) {
  if (K < 2 || (K & (K - 1)) != 0)
    throw std::invalid_argument("broad_narrow_decompose: K must be a power of 2");
  // one pass over the grid, accumulating per-cell complex partial sums
  std::vector<cd> cell(static_cast<size_t>(K) * K, cd{0, 0});
  double side = 2.0 / K;
  for (int i = 0; i < f.n; ++i) {
    double u = f.xi(i);
    int r = std::min(K - 1, static_cast<int>((u + 1) / side));
    for (int j = 0; j < f.n; ++j) {
      double v = f.eta(j);
      int c = std::min(K - 1, static_cast<int>((v + 1) / side));
      double ang = x.x * u + x.y * v + x.z * f.phase(u, v);
      cell[static_cast<size_t>(r) * K + c] +=
          f.at(i, j) * cd{std::cos(ang), std::sin(ang)};
    }
  }
  double w = f.h() * f.h();
  cd total{0, 0};
  for (cd& v : cell) {
    v *= w;
    total += v;
  }
  DecomposeTerms t;
  t.field_abs = std::abs(total);
  double max_cell = 0;
  for (const cd& v : cell) max_cell = std::max(max_cell, std::abs(v));
  double max_strip = 0;
  for (int r = 0; r < K; ++r) {
    cd row{0, 0}, col{0, 0};
    for (int c = 0; c < K; ++c) {
      row += cell[static_cast<size_t>(r) * K + c];
      col += cell[static_cast<size_t>(c) * K + r];
    }
    max_strip = std::max({max_strip, std::abs(row), std::abs(col)});
  }
  int A = std::max(2, static_cast<int>(std::lround(std::pow(K, eps))));
  std::vector<double> vals(cell.size());
  for (size_t i = 0; i < cell.size(); ++i) vals[i] = std::abs(cell[i]);
  double br = broad_value_raw(vals.data(), K, A,
                              K <= 8 ? BroadMethod::exact : BroadMethod::greedy);
  t.term_cell = std::pow(K, 5 * eps) * max_cell;
  t.term_strip = std::pow(K, 2 * eps) * max_strip;
  t.term_broad = std::pow(K, 3.0) * br;
  double best = std::max({t.term_cell, t.term_strip, t.term_broad});
  t.dominating = best == t.term_cell ? 1 : (best == t.term_strip ? 2 : 3);
  double denom = t.term_cell + t.term_strip + t.term_broad;
  t.constant = denom > 0 ? t.field_abs / denom : 0;
  return t;
}

PigeonholeResult pigeonhole_select(const std::vector<double>& I,
                                   const std::vector<std::vector<double>>& table,
                                   double C) {
  const int nQ = static_cast<int>(I.size());
  if (nQ == 0 || table.size() != I.size())
    throw std::invalid_argument("pigeonhole_select: shape mismatch");
  const int nL = static_cast<int>(table[0].size());
  double L = *std::min_element(I.begin(), I.end());
  for (double v : I)
    if (v > 2 * L * (1 + 1e-12))
      throw std::invalid_argument("pigeonhole_select: I not in a dyadic band");
  double A = 1e300, B = 0;
  for (int q = 0; q < nQ; ++q) {
    if (static_cast<int>(table[q].size()) != nL)
      throw std::invalid_argument("pigeonhole_select: ragged table");
    double sum = 0;
    for (double v : table[q]) {
      if (!(v > 0)) throw std::invalid_argument("pigeonhole_select: table values must be positive");
      sum += v;
      A = std::min(A, v);
      B = std::max(B, v);
    }
    if (I[q] > C * sum * (1 + 1e-12))
      throw std::invalid_argument("pigeonhole_select: domination hypothesis fails");
  }
  // per row: first lambda carrying at least the average share
  std::vector<int> pick(nQ);
  for (int q = 0; q < nQ; ++q) {
    pick[q] = 0;
    for (int l = 0; l < nL; ++l)
      if (table[q][l] >= I[q] / (C * nL)) {
        pick[q] = l;
        break;
      }
  }
  // majority lambda
  std::vector<int> freq(nL, 0);
  for (int q = 0; q < nQ; ++q) ++freq[pick[q]];
  int lambda = static_cast<int>(std::max_element(freq.begin(), freq.end()) -
                                freq.begin());
  // dyadic level buckets over [A, B]
  int buckets = static_cast<int>(std::floor(std::log2(B / A))) + 1;
  std::vector<std::vector<int>> by_bucket(buckets);
  for (int q = 0; q < nQ; ++q) {
    if (pick[q] != lambda) continue;
    int k = std::min(buckets - 1,
                     static_cast<int>(std::floor(std::log2(table[q][lambda] / A))));
    by_bucket[k].push_back(q);
  }
  int best = 0;
  for (int k = 1; k < buckets; ++k)
    if (by_bucket[k].size() > by_bucket[best].size()) best = k;
  PigeonholeResult out;
  out.lambda = lambda;
  out.level = A * std::ldexp(1.0, best);
  out.selected = by_bucket[best];
  out.bucket_count = buckets;
  return out;
}

}  // namespace hypdec::broadnorm
