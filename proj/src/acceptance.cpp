#include "hypdec/acceptance.hpp"

#include <chrono>
#include <cstdio>
#include <functional>

#include "hypdec/broadnorm.hpp"
#include "hypdec/decouple.hpp"
#include "hypdec/incidence.hpp"
#include "hypdec/parallel.hpp"
#include "hypdec/report.hpp"
#include "hypdec/restriction.hpp"
#include "hypdec/rng.hpp"
#include "hypdec/scenarios.hpp"
#include "hypdec/wavepacket.hpp"

namespace hypdec::acceptance {

using decouple::EnsembleKind;
using field::FreqDensity;

namespace {

constexpr uint64_t kSeed = 20260809;

std::string fmt(const char* pattern, double a, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

FreqDensity gen(EnsembleKind kind, double R, const geom::Square& target,
                const char* stream, int trial, int n = 0) {
  if (n == 0) n = static_cast<int>(std::lround(4 * std::sqrt(R)));
  CounterRng rng(kSeed, stream, static_cast<uint64_t>(R), trial);
  return decouple::generate(kind, R, target, n, rng);
}

// --- criterion 1: exact algebra on the surface ---------------------------

CriterionResult run_algebra() {
  CriterionResult r{1, "surface-maps-exact"};
  CounterRng rng(kSeed, "acc-algebra", 0, 0);
  double worst_surface = 0, worst_roundtrip = 0;
  for (int t = 0; t < 1000; ++t) {
    double c1 = rng.next_real(-0.9, 0.9), c2 = rng.next_real(-0.9, 0.9);
    double d = rng.next_real(0.05, 1.5);
    auto map = geom::hyperbolic_rescale(c1, c2, d);
    auto dil = geom::nonisotropic_dilate(
        rng.next_u64() & 1 ? geom::Axis::horizontal : geom::Axis::vertical,
        rng.next_real(1, 16));
    double xi = rng.next_real(-1, 1), eta = rng.next_real(-1, 1);
    Vec3 p{xi, eta, xi * eta};
    for (const auto& m : {map, dil}) {
      Vec3 q = m.apply(p);
      worst_surface = std::max(worst_surface, std::abs(q.z - q.x * q.y));
      Vec3 back = m.inverse().apply(q);
      worst_roundtrip = std::max(worst_roundtrip, (back - p).norm());
    }
  }
  r.pass = worst_surface <= 1e-12 && worst_roundtrip <= 1e-12;
  r.detail = fmt("surface residual %.2e, roundtrip %.2e", worst_surface,
                 worst_roundtrip);
  return r;
}

// --- criterion 2: extension kernel vs direct quadrature ------------------

CriterionResult run_extend_oracle() {
  CriterionResult r{2, "extension-oracle"};
  FreqDensity f = field::make_zero(33);
  CounterRng rng(kSeed, "acc-extend", 0, 0);
  for (auto& v : f.a) v = cd{rng.next_real(-1, 1), rng.next_real(-1, 1)};
  field::GridSpec grid = field::GridSpec::centered_box({0.4, -1.3, 5.0}, 4.0, 0.5);
  field::SpatialField F = field::extend(f, 64, grid);
  KahanSum num, den;
  for (int k = 0; k < grid.dims[2]; ++k)
    for (int i = 0; i < grid.dims[0]; ++i)
      for (int j = 0; j < grid.dims[1]; ++j) {
        cd direct = field::extend_at(f, F.point(i, j, k));
        num.add(std::norm(F.at(i, j, k) - direct));
        den.add(std::norm(direct));
      }
  double rel = std::sqrt(num.value() / den.value());
  r.pass = rel <= 1e-6;
  r.detail = fmt("relative L2 error %.2e on 33^2 x 17^3", rel);
  return r;
}

// --- criterion 3: wave packet properties ----------------------------------

CriterionResult run_wavepackets() {
  CriterionResult r{3, "wave-packets"};
  geom::Square whole{{0, 0}, 2};
  bool recon_ok = true, sep_ok = true, decay_ok = true;
  std::string detail;
  for (double R : {64.0, 256.0}) {
    int n = 16 * static_cast<int>(std::lround(std::sqrt(R)));
    FreqDensity f = gen(EnsembleKind::random_phase, R, whole, "acc-wp", 0, n);
    auto d = wavepacket::WavePacketDecomp::build(f, R);
    double recon = d.cap_partition_residual();
    double sep = d.direction_separation();
    recon_ok = recon_ok && recon <= 1e-6;
    sep_ok = sep_ok && sep >= 0.5 / std::sqrt(R);
    // single packet decay: worst tail at 4 tube radii relative to the peak,
    // probed on perpendicular rays at several heights
    int block = -1;
    for (int b = 0; b < static_cast<int>(d.blocks().size()); ++b) {
      const auto& blk = d.blocks()[b];
      if (blk.ti == static_cast<int>(std::sqrt(R)) / 2 && blk.tj == blk.ti)
        block = b;
    }
    if (block < 0) block = static_cast<int>(d.blocks().size()) / 2;
    FreqDensity pk = d.packet(block, 0, 0);
    wavepacket::Tube tube = d.tube(block, 0, 0);
    double peak = 0, tail = 0;
    for (double frac : {0.0, 0.25, 0.5, 0.75}) {
      double x3 = frac * R;
      Vec2 ax = tube.axis_at(x3);
      peak = std::max(peak, std::abs(field::extend_at(pk, {ax.x, ax.y, x3})));
      for (Vec2 dir : {Vec2{1, 0}, Vec2{0, 1}, Vec2{0.7071, 0.7071}}) {
        Vec2 p = ax + dir * (4 * tube.radius);
        tail = std::max(tail, std::abs(field::extend_at(pk, {p.x, p.y, x3})));
      }
    }
    double rel = peak > 0 ? tail / peak : 0;
    decay_ok = decay_ok && rel <= std::pow(R, -3.0);
    detail += fmt("R=%.0f recon %.1e sep*sqrtR %.2f tail %.1e | ", R,
                  recon * 1.0, sep * std::sqrt(R), rel);
  }
  r.pass = recon_ok && sep_ok && decay_ok;
  r.detail = detail + (decay_ok ? "" : "(decay exceeds R^-3)");
  return r;
}

// --- criterion 4: planar bilinear estimate --------------------------------

CriterionResult run_restriction2d() {
  CriterionResult r{4, "planar-bilinear"};
  std::vector<double> deltas{16, 64, 256};  // 1/delta
  double worst = 0;
  std::vector<double> xs, ys;
  for (double S : deltas) {
    double delta = 1.0 / S;
    int n = std::min(2048, static_cast<int>(std::lround(4.0 / delta)));
    double mx = 0;
    const int trials = 50;
    std::vector<double> vals(trials, 0.0);
    parallel_for(
        trials,
        [&](int t) {
          CounterRng rng(kSeed, "acc-2d", static_cast<uint64_t>(S), t);
          double a1 = rng.next_real(0, kPi);
          double gap = rng.next_real(kPi / 5, kPi / 2);
          Vec2 n1{std::cos(a1), std::sin(a1)};
          Vec2 n2{std::cos(a1 + gap), std::sin(a1 + gap)};
          auto fill = [&](Vec2 normal, Vec2 center) {
            Vec2 tangent{-normal.y, normal.x};
            FreqDensity f = field::make_zero(n);
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) {
                Vec2 dd = Vec2{f.xi(i), f.eta(j)} - center;
                if (std::abs(dd.dot(normal)) <= delta &&
                    std::abs(dd.dot(tangent)) <= 0.25)
                  f.at(i, j) = rng.next_phase();
              }
            return f;
          };
          FreqDensity f1 =
              fill(n1, {rng.next_real(-0.4, 0.0), rng.next_real(-0.4, 0.0)});
          FreqDensity f2 =
              fill(n2, {rng.next_real(0.0, 0.4), rng.next_real(0.0, 0.4)});
          auto rep = decouple::bilinear_restriction_2d(f1, f2, n1, n2, delta,
                                                       std::sin(kPi / 6));
          vals[t] = rep.degenerate ? 0 : rep.ratio;
        },
        2);
    for (double v : vals) mx = std::max(mx, v);
    worst = std::max(worst, mx);
    xs.push_back(S);
    ys.push_back(mx);
  }
  double slope = report::fit_log2_slope(xs, ys);
  r.pass = worst <= 10.0 && slope <= 0.1;
  r.detail = fmt("max ratio %.3f, slope %.3f", worst, slope);
  return r;
}

// --- criteria 5/6: bilinear decoupling ------------------------------------

double bilinear_max_ratio(double R, double delta, EnsembleKind kind, int trials,
                          const char* stream) {
  geom::Square tau1{{-0.5, -0.5}, delta}, tau2{{0.5, 0.5}, delta};
  int n = static_cast<int>(std::lround(4 * std::sqrt(R)));
  std::vector<double> vals(trials, 0.0);
  parallel_for(trials, [&](int t) {
    CounterRng rng1(kSeed, std::string(stream) + "/1", static_cast<uint64_t>(R),
                    t);
    CounterRng rng2(kSeed, std::string(stream) + "/2", static_cast<uint64_t>(R),
                    t);
    FreqDensity f1 = decouple::generate(kind, R, tau1, n, rng1);
    FreqDensity f2 = decouple::generate(kind, R, tau2, n, rng2);
    auto rep = decouple::bilinear_l2_ratio(f1, f2, tau1, tau2, R);
    vals[t] = rep.degenerate ? 0 : rep.ratio;
  });
  double mx = 0;
  for (double v : vals) mx = std::max(mx, v);
  return mx;
}

CriterionResult run_base_case() {
  CriterionResult r{5, "base-case-scale"};
  std::vector<double> xs, ys;
  for (double R : {256.0, 1024.0, 4096.0}) {
    double delta = std::pow(R, -0.25);
    double mx =
        bilinear_max_ratio(R, delta, EnsembleKind::random_phase, 50, "acc-base");
    xs.push_back(R);
    ys.push_back(mx);
  }
  double slope = report::fit_log2_slope(xs, ys);
  r.pass = slope <= 0.1;
  r.detail = fmt("fitted exponent %.4f (max ratios %.3g..%.3g)", slope,
                 ys.front(), ys.back());
  return r;
}

CriterionResult run_bilinear() {
  CriterionResult r{6, "bilinear-decoupling"};
  r.pass = true;
  for (EnsembleKind kind :
       {EnsembleKind::random_phase, EnsembleKind::focusing,
        EnsembleKind::line_concentrated, EnsembleKind::bush}) {
    std::vector<double> xs, ys;
    for (double R : {64.0, 256.0, 1024.0}) {
      int trials = kind == EnsembleKind::random_phase
                       ? 16
                       : (kind == EnsembleKind::bush ? 6 : 1);
      xs.push_back(R);
      ys.push_back(bilinear_max_ratio(R, 1.0, kind, trials, "acc-bil"));
    }
    double slope = report::fit_log2_slope(xs, ys);
    r.pass = r.pass && slope <= 0.15;
    r.detail += fmt("%.3f ", slope);
  }
  r.detail = "exponents (rp/foc/line/bush): " + r.detail;
  return r;
}

// --- criterion 7: dyadic linear decoupling --------------------------------

CriterionResult run_dyadic() {
  CriterionResult r{7, "dyadic-linear"};
  geom::Square whole{{0, 0}, 2};
  std::vector<double> scales{256, 1024, 4096};
  std::vector<double> xs, ys_dyadic_worst, ys_square_line;
  bool prediction_ok = true;
  double worst_slope = -1e300;
  for (EnsembleKind kind : {EnsembleKind::line_concentrated,
                            EnsembleKind::focusing, EnsembleKind::random_phase}) {
    std::vector<double> ys;
    xs.clear();
    for (double R : scales) {
      int trials = kind == EnsembleKind::random_phase && R <= 1024 ? 2 : 1;
      double mx = 0, mx_square = 0;
      for (int t = 0; t < trials; ++t) {
        FreqDensity f = gen(kind, R, whole, "acc-dyadic", t);
        auto rep = decouple::linear_dyadic_ratio(f, R);
        mx = std::max(mx, rep.ratio);
        double rs = rep.get("rhs_square");
        if (rs > 0) mx_square = std::max(mx_square, rep.lhs / rs);
      }
      xs.push_back(R);
      ys.push_back(mx);
      if (kind == EnsembleKind::line_concentrated) {
        ys_square_line.push_back(mx_square);
        // Dirichlet quadruple-count prediction on the discrete torus
        long long cols = static_cast<long long>(std::lround(4 * std::sqrt(R)));
        auto quad = [](long long N) { return (2.0 * N * N * N + N) / 3.0; };
        double predicted = std::pow(
            quad(cols) / (0.25 * cols * cols * quad(2)), 0.25);
        if (std::abs(mx_square - predicted) > 0.2 * predicted)
          prediction_ok = false;
      }
    }
    worst_slope = std::max(worst_slope, report::fit_log2_slope(xs, ys));
  }
  double line_square_slope = report::fit_log2_slope(scales, ys_square_line);
  r.pass = worst_slope <= 0.15 && line_square_slope >= 0.1 && prediction_ok;
  r.detail = fmt("dyadic slope %.3f, square-only line slope %.3f, ",
                 worst_slope, line_square_slope) +
             (prediction_ok ? "count prediction within 20%"
                            : "count prediction OFF");
  return r;
}

// --- criterion 8: refined bilinear decoupling ------------------------------

CriterionResult run_refined() {
  CriterionResult r{8, "refined-decoupling"};
  config::ExperimentConfig cfg;
  cfg.scenario = "refined";
  cfg.scales = {64, 256, 1024};
  cfg.seed = kSeed;
  cfg.trials = 3;
  cfg.out_dir = "acceptance_out";
  auto res = scenarios::run(cfg);
  double bush_slope = 0, sparse_slope = 0;
  for (const auto& kv : res.summary.extra) {
    if (kv.first == "exponent_bush") bush_slope = kv.second;
    if (kv.first == "exponent_sparse") sparse_slope = kv.second;
  }
  r.pass = bush_slope <= 0.15 && sparse_slope <= 0.15;
  r.detail = fmt("exponents bush %.3f, sparse %.3f", bush_slope, sparse_slope);
  return r;
}

// --- criterion 9: broad norm ------------------------------------------------

bool feasible_enum(const std::vector<std::pair<int, int>>& cells, int K, int A) {
  std::vector<std::vector<int>> by_row(K);
  for (auto [row, col] : cells) by_row[row].push_back(col);
  std::vector<uint8_t> used_col(K, 0);
  std::function<bool(int, int)> rec = [&](int row, int need) -> bool {
    if (need == 0) return true;
    if (row >= K || K - row < need) return false;
    if (rec(row + 1, need)) return true;
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

double broad_enum(const broadnorm::BroadInstance& inst) {
  std::vector<double> vals = inst.values;
  std::sort(vals.begin(), vals.end(), std::greater<>());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  for (double v : vals) {
    if (v <= 0) break;
    std::vector<std::pair<int, int>> active;
    for (int row = 0; row < inst.K; ++row)
      for (int col = 0; col < inst.K; ++col)
        if (inst.value(row, col) >= v) active.emplace_back(row, col);
    if (feasible_enum(active, inst.K, inst.A)) return v;
  }
  return 0;
}

CriterionResult run_broad() {
  CriterionResult r{9, "broad-norm"};
  bool enum_ok = true, triangle_ok = true, bilinear_ok = true;
  auto random_instance = [&](int K, int A, int t) {
    broadnorm::BroadInstance inst;
    inst.K = K;
    inst.A = A;
    inst.values.resize(static_cast<size_t>(K) * K);
    CounterRng rng(kSeed, "acc-broad", K, t);
    for (auto& v : inst.values)
      v = rng.next_unit() < 0.3 ? 0.0 : rng.next_real(0, 10);
    return inst;
  };
  for (int t = 0; t < 100; ++t) {
    auto inst = random_instance(4, 2 + t % 3, t);
    if (broadnorm::broad_value(inst, broadnorm::BroadMethod::exact).value !=
        broad_enum(inst))
      enum_ok = false;
  }
  for (int t = 0; t < 20; ++t) {
    auto inst = random_instance(8, 2 + t % 5, 1000 + t);
    if (broadnorm::broad_value(inst, broadnorm::BroadMethod::exact).value !=
        broad_enum(inst))
      enum_ok = false;
  }
  // triangle and bilinear bounds, exact on every tested instance
  CounterRng rng(kSeed, "acc-broad-props", 0, 0);
  for (int t = 0; t < 50; ++t) {
    auto inst = random_instance(4, 4, 2000 + t);
    auto p1 = inst, p2 = inst;
    for (size_t i = 0; i < inst.values.size(); ++i) {
      double frac = rng.next_unit();
      p1.values[i] = inst.values[i] * frac;
      p2.values[i] = inst.values[i] * (1 - frac);
    }
    p1.A = 2;
    p2.A = 2;
    double whole = broadnorm::broad_value(inst, broadnorm::BroadMethod::exact).value;
    double parts = broadnorm::broad_value(p1, broadnorm::BroadMethod::exact).value +
                   broadnorm::broad_value(p2, broadnorm::BroadMethod::exact).value;
    if (whole > parts + 1e-12) triangle_ok = false;
    inst.A = 2;
    double br2 = broadnorm::broad_value(inst, broadnorm::BroadMethod::exact).value;
    double best = 0;
    for (int r1 = 0; r1 < 4; ++r1)
      for (int c1 = 0; c1 < 4; ++c1)
        for (int r2 = 0; r2 < 4; ++r2)
          for (int c2 = 0; c2 < 4; ++c2)
            if (r1 != r2 && c1 != c2)
              best = std::max(best, std::sqrt(inst.value(r1, c1) *
                                              inst.value(r2, c2)));
    if (br2 > best + 1e-12) bilinear_ok = false;
  }
  // pointwise three-term decomposition on a 9^3 grid
  double R = 256;
  geom::Square whole{{0, 0}, 2};
  FreqDensity f = gen(EnsembleKind::random_phase, R, whole, "acc-broad-nb", 0);
  double worst_constant = 0;
  for (int K : {8, 16}) {
    const int G = 9;
    std::vector<double> consts(G * G * G, 0.0);
    parallel_for(G * G * G, [&](int idx) {
      int i = idx % G, j = (idx / G) % G, k = idx / (G * G);
      Vec3 x{(i - G / 2) * 6.0, (j - G / 2) * 6.0, (k - G / 2) * 6.0};
      consts[idx] = broadnorm::broad_narrow_decompose(f, K, 0.5, x).constant;
    });
    for (double c : consts) worst_constant = std::max(worst_constant, c);
  }
  r.pass = enum_ok && triangle_ok && bilinear_ok && worst_constant <= 100.0;
  r.detail = std::string("enum=") + (enum_ok ? "ok" : "BAD") +
             " identities=" + (triangle_ok && bilinear_ok ? "ok" : "BAD") +
             fmt(" max pointwise constant %.2f", worst_constant);
  return r;
}

// --- criterion 10: pigeonholing --------------------------------------------

CriterionResult run_pigeonhole() {
  CriterionResult r{10, "pigeonholing"};
  bool ok = true;
  for (int t = 0; t < 1000 && ok; ++t) {
    CounterRng rng(kSeed, "acc-pigeon", 0, t);
    int nQ = 5 + static_cast<int>(rng.next_below(40));
    int nL = 2 + static_cast<int>(rng.next_below(8));
    double C = rng.next_real(1.2, 4.0);
    std::vector<double> I(nQ);
    std::vector<std::vector<double>> table(nQ, std::vector<double>(nL));
    double L = rng.next_real(0.1, 5.0);
    for (int q = 0; q < nQ; ++q) {
      I[q] = L * (1 + rng.next_unit());
      double sum = 0;
      for (int l = 0; l < nL; ++l) {
        table[q][l] = rng.next_real(0.01, 10.0);
        sum += table[q][l];
      }
      if (I[q] > C * sum) I[q] = C * sum;
    }
    double A = 1e300, B = 0;
    for (auto& row : table)
      for (double v : row) A = std::min(A, v), B = std::max(B, v);
    auto res = broadnorm::pigeonhole_select(I, table, C);
    if (res.selected.empty()) ok = false;
    for (int q : res.selected)
      if (table[q][res.lambda] < res.level * (1 - 1e-12) ||
          table[q][res.lambda] > 2 * res.level * (1 + 1e-12))
        ok = false;
    if (static_cast<int>(res.selected.size()) * res.bucket_count * nL < nQ)
      ok = false;
    double total = 0, picked = 0;
    for (double v : I) total += v;
    for (int q : res.selected) picked += table[q][res.lambda];
    if (picked * 2 * C * res.bucket_count * nL * nL < total) ok = false;
  }
  r.pass = ok;
  r.detail = ok ? "1000 random tables, all three conclusions verified"
                : "conclusion failed";
  return r;
}

// --- criterion 11: incidence geometry ---------------------------------------

CriterionResult run_incidence() {
  CriterionResult r{11, "incidence"};
  CounterRng rng(kSeed, "acc-incidence", 0, 0);
  const double eps1 = 0.6, eps2 = 0.3, CY = 2.0, eps = 0.05;

  // exhaustive two-ends oracle at delta = 2^{-5}
  bool oracle_ok = true;
  {
    double delta = 1.0 / 32;
    auto fam = incidence::make_random(delta, 24, rng);
    auto y = incidence::make_shading(fam, incidence::ShadingKind::random_half,
                                     rng);
    double seg = std::pow(delta, eps1);
    for (size_t i = 0; i < fam.lines.size(); ++i) {
      auto [lo, hi] = incidence::chord(fam.lines[i], 0);
      for (double t = lo; t + seg <= hi + delta / 2; t += delta / 2) {
        double impl = y.covered_length(static_cast<int>(i), t, t + seg);
        double oracle = 0;
        {
          std::vector<std::pair<double, double>> ivs;
          for (double c : y.centers[i]) {
            double a = std::max(c - delta, t), b = std::min(c + delta, t + seg);
            if (a < b) ivs.emplace_back(a, b);
          }
          std::sort(ivs.begin(), ivs.end());
          double cur_lo = 0, cur_hi = -1e300;
          for (auto [a, b] : ivs) {
            if (a > cur_hi) {
              if (cur_hi > cur_lo) oracle += cur_hi - cur_lo;
              cur_lo = a;
              cur_hi = b;
            } else {
              cur_hi = std::max(cur_hi, b);
            }
          }
          if (cur_hi > cur_lo) oracle += cur_hi - cur_lo;
        }
        if (std::abs(impl - oracle) > 1e-12) oracle_ok = false;
      }
    }
  }

  // furstenberg ratio across generators, scales, and densities
  bool furst_ok = true;
  double worst_c = 1e300;
  for (double S : {32.0, 128.0}) {
    double delta = 1.0 / S;
    int count = S >= 128 ? 2048 : 512;
    for (const char* generator : {"bush", "parallel", "random"}) {
      for (auto kind : {incidence::ShadingKind::full,
                        incidence::ShadingKind::half}) {
        incidence::LineFamily fam =
            std::string(generator) == "bush"
                ? incidence::make_bush(delta, count, rng)
                : (std::string(generator) == "parallel"
                       ? incidence::make_parallel(delta, count, rng)
                       : incidence::make_random(delta, count / 2, rng));
        auto y = incidence::make_shading(fam, kind, rng);
        auto rep = incidence::furstenberg_ratio(fam, y, eps, eps1, eps2, CY);
        worst_c = std::min(worst_c, rep.c);
        furst_ok = furst_ok && rep.pass;
      }
    }
  }

  // pruning: monotone and removes the bush core
  bool prune_ok = true;
  {
    double delta = 1.0 / 32;
    auto fam = incidence::make_bush(delta, 512, rng);
    auto y = incidence::make_shading(fam, incidence::ShadingKind::full, rng);
    auto tight = incidence::prune_multiplicity(fam, y, 1);
    auto loose = incidence::prune_multiplicity(fam, y, 16);
    prune_ok = tight.removed_fraction > 0 &&
               loose.kept_voxels >= tight.kept_voxels &&
               loose.total_voxels == tight.total_voxels;
  }

  r.pass = oracle_ok && furst_ok && prune_ok;
  r.detail = std::string("segment oracle ") + (oracle_ok ? "ok" : "BAD") +
             fmt(", min furstenberg c %.3f", worst_c) + ", pruning " +
             (prune_ok ? "ok" : "BAD");
  return r;
}

// --- criterion 12: restriction ratios ---------------------------------------

CriterionResult run_restriction() {
  CriterionResult r{12, "restriction-22-7"};
  geom::Square whole{{0, 0}, 2};
  const double p = 22.0 / 7.0;
  double worst_slope = -1e300;
  for (EnsembleKind kind :
       {EnsembleKind::focusing, EnsembleKind::random_phase,
        EnsembleKind::line_concentrated, EnsembleKind::bush}) {
    std::vector<double> xs, ys;
    for (double R : {64.0, 256.0, 1024.0}) {
      int trials = kind == EnsembleKind::random_phase
                       ? 6
                       : (kind == EnsembleKind::bush ? 3 : 1);
      std::vector<double> vals(trials, 0.0);
      parallel_for(trials, [&](int t) {
        FreqDensity f = gen(kind, R, whole, "acc-restr", t);
        auto rep = restriction::restriction_ratio(f, R, p);
        vals[t] = rep.degenerate ? 0 : rep.ratio;
      });
      double mx = 0;
      for (double v : vals) mx = std::max(mx, v);
      xs.push_back(R);
      ys.push_back(mx);
    }
    worst_slope = std::max(worst_slope, report::fit_log2_slope(xs, ys));
  }

  double worst_broad_slope = -1e300;
  for (EnsembleKind kind :
       {EnsembleKind::focusing, EnsembleKind::random_phase}) {
    std::vector<double> xs, ys;
    for (double R : {64.0, 256.0, 1024.0}) {
      int trials = kind == EnsembleKind::random_phase ? 2 : 1;
      std::vector<double> vals(trials, 0.0);
      parallel_for(trials, [&](int t) {
        FreqDensity f = gen(kind, R, whole, "acc-broad-restr", t);
        auto rep = restriction::broad_restriction_ratio(f, R, 2, 8, p);
        vals[t] = rep.degenerate ? 0 : rep.ratio;
      });
      double mx = 0;
      for (double v : vals) mx = std::max(mx, v);
      xs.push_back(R);
      ys.push_back(mx);
    }
    worst_broad_slope =
        std::max(worst_broad_slope, report::fit_log2_slope(xs, ys));
  }
  r.pass = worst_slope <= 0.2 && worst_broad_slope <= 0.25;
  r.detail = fmt("exponent %.3f (<= 0.2), broad exponent %.3f (<= 0.25)",
                 worst_slope, worst_broad_slope);
  return r;
}

}  // namespace

std::vector<CriterionResult> run_all(double budget_minutes) {
  using clock = std::chrono::steady_clock;
  auto start = clock::now();
  std::vector<std::function<CriterionResult()>> steps = {
      run_algebra,  run_extend_oracle, run_wavepackets, run_restriction2d,
      run_base_case, run_bilinear,     run_dyadic,      run_refined,
      run_broad,    run_pigeonhole,    run_incidence,   run_restriction};
  std::vector<CriterionResult> out;
  for (size_t i = 0; i < steps.size(); ++i) {
    double elapsed =
        std::chrono::duration<double>(clock::now() - start).count() / 60.0;
    if (elapsed >= budget_minutes) {
      CriterionResult skipped;
      skipped.id = static_cast<int>(i + 1);
      skipped.name = "(budget exhausted)";
      skipped.attempted = false;
      out.push_back(skipped);
      continue;
    }
    auto t0 = clock::now();
    CriterionResult r = steps[i]();
    r.attempted = true;
    r.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    std::printf("[%s] criterion-%02d %-22s %7.1fs  %s\n",
                r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
    out.push_back(std::move(r));
  }
  return out;
}

void print_table(const std::vector<CriterionResult>& results) {
  for (const auto& r : results) {
    const char* tag = !r.attempted ? "SKIP" : (r.pass ? "PASS" : "FAIL");
    std::printf("[%s] criterion-%02d %-22s %7.1fs  %s\n", tag, r.id,
                r.name.c_str(), r.seconds, r.detail.c_str());
  }
  std::fflush(stdout);
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (!r.attempted || !r.pass) return false;
  return true;
}

}  // namespace hypdec::acceptance
