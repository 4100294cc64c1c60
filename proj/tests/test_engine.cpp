#include <doctest.h>

#include "hypdec/engine.hpp"
#include "hypdec/rng.hpp"

using namespace hypdec;
using namespace hypdec::engine;
using field::FreqDensity;

namespace {

FreqDensity random_density(int n, uint64_t seed,
                           field::GridAlign align = field::GridAlign::midpoint) {
  FreqDensity f = field::make_zero(n, field::Surface::hyperbolic, align);
  CounterRng rng(seed, "test-engine", n, 0);
  for (auto& v : f.a) v = cd{rng.next_real(-1, 1), rng.next_real(-1, 1)};
  return f;
}

FreqDensity boxed_density(int n, IndexBox box, uint64_t seed) {
  FreqDensity f = field::make_zero(n);
  CounterRng rng(seed, "test-engine-box", n, 0);
  for (int i = box.i0; i <= box.i1; ++i)
    for (int j = box.j0; j <= box.j1; ++j)
      f.at(i, j) = cd{rng.next_real(-1, 1), rng.next_real(-1, 1)};
  return f;
}

}  // namespace

TEST_CASE("folded slice samples the field exactly") {
  const int n = 16;
  FreqDensity f = random_density(n, 21);
  IndexBox box = full_box(f);
  for (int M : {2 * n, n}) {
    std::vector<cd> buf(static_cast<size_t>(M) * M);
    double x3 = 2.31;
    folded_slice(f, box, x3, M, buf.data());
    double spacing = coarse_spacing(f, M);
    CounterRng rng(3, "probe", M, 0);
    for (int t = 0; t < 12; ++t) {
      int k1 = static_cast<int>(rng.next_below(M));
      int k2 = static_cast<int>(rng.next_below(M));
      cd direct = field::extend_at(f, {k1 * spacing, k2 * spacing, x3});
      CHECK(std::abs(buf[static_cast<size_t>(k1) * M + k2] - direct) <= 1e-10);
    }
  }
}

TEST_CASE("sheared slice carries the field magnitudes") {
  const int n = 32;
  FreqDensity f = boxed_density(n, {4, 9, 12, 17}, 8);
  IndexBox box = support_box(f);
  int M = 16;
  double x3 = -5.5;
  std::vector<cd> buf(static_cast<size_t>(M) * M);
  sheared_slice(f, box, x3, M, buf.data());
  // |H(y, x3)| must equal |Ef(y - x3*grad, x3)| on the coarse grid
  double cx = 0.5 * (f.xi(box.i0) + f.xi(box.i1));
  double cy = 0.5 * (f.eta(box.j0) + f.eta(box.j1));
  Vec2 grad = f.phase_gradient(cx, cy);
  double spacing = coarse_spacing(f, M);
  for (int k1 = 0; k1 < M; k1 += 3)
    for (int k2 = 0; k2 < M; k2 += 3) {
      Vec3 x{k1 * spacing - x3 * grad.x, k2 * spacing - x3 * grad.y, x3};
      cd direct = field::extend_at(f, x);
      CHECK(std::abs(std::abs(buf[static_cast<size_t>(k1) * M + k2]) -
                     std::abs(direct)) <= 1e-10);
    }
}

TEST_CASE("pair integral matches brute-force quadrature") {
  const int n = 16;  // tiny so the direct triple sum stays cheap
  FreqDensity f1 = boxed_density(n, {0, 7, 0, 7}, 31);
  FreqDensity f2 = boxed_density(n, {8, 15, 8, 15}, 32);
  double R = 16;
  PairIntegralOpts opts;
  opts.max_dx3 = 0.45;
  double got = bilinear_l2_integral(f1, f2, R, opts);

  // direct: same x3 trapezoid, x-bar quadrature by dense direct sums
  const int M = 2 * n + 8;
  double spacing = torus_period(f1) / M;
  SlicePlan plan = make_slices(R, 2 * (phase_range(f1, support_box(f1)) +
                                       phase_range(f2, support_box(f2))),
                               0.45);
  KahanSum total;
  for (int k = 0; k < plan.count; ++k) {
    double x3 = plan.x3(k);
    KahanSum s;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        Vec3 x{i * spacing, j * spacing, x3};
        s.add(std::norm(field::extend_at(f1, x) * field::extend_at(f2, x)));
      }
    total.add(s.value() * spacing * spacing * plan.weight(k));
  }
  CHECK(got == doctest::Approx(total.value()).epsilon(1e-9));
}

TEST_CASE("localized norms agree with the full engine") {
  const int n = 16;
  double R = 16;
  FreqDensity f = boxed_density(n, {4, 7, 6, 9}, 17);
  IndexBox box = support_box(f);
  // p = 4 through the sheared path vs the plain power integral
  double a = localized_lp(f, box, R, 4);
  double b = std::pow(power_integral(f, R, 4), 0.25);
  CHECK(a == doctest::Approx(b).epsilon(2e-3));
  // p = 2 closed form vs a dense direct sum
  double c = localized_lp(f, box, R, 2);
  CHECK(c == doctest::Approx(std::sqrt(sq(2 * kPi) * sq(f.l2_norm()) * 2 * R))
                .epsilon(1e-12));
}

TEST_CASE("masked pair integral counts only the balls") {
  const int n = 16;
  double R = 16;
  FreqDensity f1 = boxed_density(n, {0, 7, 0, 7}, 51);
  FreqDensity f2 = boxed_density(n, {8, 15, 8, 15}, 52);
  field::BallUnion X{{{2.0, 3.0, 1.0}, {-4.0, 1.0, 9.0}}, 3.9};
  X.require_disjoint();
  PairIntegralOpts opts;
  opts.mask = &X;
  opts.max_dx3 = 0.45;
  double got = bilinear_l2_integral(f1, f2, R, opts);
  double full = bilinear_l2_integral(f1, f2, R, {nullptr, 0.45, -1});
  CHECK(got > 0);
  CHECK(got < full);
  // oracle on the same slice lattice and coarse grid
  IndexBox b1 = support_box(f1), b2 = support_box(f2);
  int spread = std::max(b1.wx() + b2.wx(), b1.wy() + b2.wy());
  int M = std::min(2 * n, next_pow2(spread + 8));
  double spacing = coarse_spacing(f1, M);
  double period = torus_period(f1);
  SlicePlan plan = make_slices(R, 2 * (phase_range(f1, b1) + phase_range(f2, b2)),
                               0.45);
  KahanSum total;
  for (int k = 0; k < plan.count; ++k) {
    double x3 = plan.x3(k);
    KahanSum s;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        bool inside = false;
        for (const Vec3& c : X.centers) {
          double dx = torus_delta(i * spacing - c.x, period);
          double dy = torus_delta(j * spacing - c.y, period);
          double dz = x3 - c.z;
          if (dx * dx + dy * dy + dz * dz <= sq(X.radius)) inside = true;
        }
        if (!inside) continue;
        Vec3 x{i * spacing, j * spacing, x3};
        s.add(std::norm(field::extend_at(f1, x) * field::extend_at(f2, x)));
      }
    total.add(s.value() * spacing * spacing * plan.weight(k));
  }
  CHECK(got == doctest::Approx(total.value()).epsilon(1e-9));
}

TEST_CASE("plancherel box ratio stays in a fixed window") {
  // int |Ef|^2 over torus x [-R, R] = (2 pi)^2 * 2R * ||f||_2^2
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    FreqDensity f = random_density(32, seed);
    double R = 64;
    double got = power_integral(f, R, 2);
    double expect = sq(2 * kPi) * 2 * R * sq(f.l2_norm());
    CHECK(got == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("modulation shifts the field on the periodized grid") {
  const int n = 16;
  FreqDensity f = random_density(n, 71);
  int M = 2 * n;
  double spacing = coarse_spacing(f, M);
  // integer-cell modulation: a = s * spacing moves |Ef| by s cells
  int s = 5;
  FreqDensity g = f;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double ang = -s * spacing * f.xi(i);
      g.at(i, j) = f.at(i, j) * cd{std::cos(ang), std::sin(ang)};
    }
  double x3 = 1.25;
  std::vector<cd> F(static_cast<size_t>(M) * M), G(F.size());
  folded_slice(f, full_box(f), x3, M, F.data());
  folded_slice(g, full_box(g), x3, M, G.data());
  for (int k1 = 0; k1 < M; ++k1)
    for (int k2 = 0; k2 < M; ++k2) {
      double want = std::abs(F[static_cast<size_t>((k1 - s + M) % M) * M + k2]);
      CHECK(std::abs(G[static_cast<size_t>(k1) * M + k2]) ==
            doctest::Approx(want).epsilon(1e-9));
    }
}
