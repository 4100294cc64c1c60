#include "hypdec/engine.hpp"

#include <algorithm>

#include "hypdec/fft.hpp"
#include "hypdec/parallel.hpp"

namespace hypdec::engine {

namespace {

void check_compatible(const FreqDensity& a, const FreqDensity& b) {
  if (a.n != b.n || a.align != b.align || a.surface != b.surface)
    throw std::invalid_argument("engine: densities on mismatched grids");
}

double thickness_profile(const FreqDensity& f, double x3) {
  if (!f.thickness) return 1.0;
  double t = *f.thickness * x3;
  return std::exp(-0.5 * t * t);
}

}  // namespace

IndexBox support_box(const FreqDensity& f, double tol) {
  IndexBox b{f.n, -1, f.n, -1};
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j)
      if (std::abs(f.at(i, j)) > tol) {
        b.i0 = std::min(b.i0, i);
        b.i1 = std::max(b.i1, i);
        b.j0 = std::min(b.j0, j);
        b.j1 = std::max(b.j1, j);
      }
  if (b.i1 < b.i0) return {0, -1, 0, -1};
  return b;
}

IndexBox full_box(const FreqDensity& f) { return {0, f.n - 1, 0, f.n - 1}; }

double phase_range(const FreqDensity& f, const IndexBox& box) {
  if (box.empty()) return 0;
  double xs[2] = {f.xi(box.i0), f.xi(box.i1)};
  double ys[2] = {f.eta(box.j0), f.eta(box.j1)};
  double lo = 1e300, hi = -1e300;
  for (double x : xs)
    for (double y : ys) {
      double v = f.phase(x, y);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  // interior extremum of xi*eta along an axis crossing zero
  if (f.surface == field::Surface::hyperbolic) {
    if (xs[0] < 0 && xs[1] > 0) lo = std::min(lo, 0.0), hi = std::max(hi, 0.0);
    if (ys[0] < 0 && ys[1] > 0) lo = std::min(lo, 0.0), hi = std::max(hi, 0.0);
  } else {
    if (xs[0] < 0 && xs[1] > 0 && ys[0] < 0 && ys[1] > 0) lo = std::min(lo, 0.0);
  }
  return hi - lo;
}

double remainder_range(const FreqDensity& f, const IndexBox& box) {
  if (box.empty()) return 0;
  double cx = 0.5 * (f.xi(box.i0) + f.xi(box.i1));
  double cy = 0.5 * (f.eta(box.j0) + f.eta(box.j1));
  double ax = f.xi(box.i1) - cx, ay = f.eta(box.j1) - cy;
  if (f.surface == field::Surface::hyperbolic) {
    // remainder u1*u2 over [-ax,ax]x[-ay,ay]
    return 2 * ax * ay;
  }
  return ax * ax + ay * ay;  // elliptic: u1^2+u2^2 in [0, ...]
}

SlicePlan make_slices(double x3_half, double bandwidth, double max_dx3,
                      int min_count) {
  double dx3 = max_dx3;
  if (bandwidth > 0) dx3 = std::min(dx3, 0.9 * 2 * kPi / bandwidth);
  int count = std::max(min_count,
                       2 * static_cast<int>(std::ceil(x3_half / dx3)) + 1);
  SlicePlan plan;
  plan.count = count;
  plan.dx3 = 2 * x3_half / (count - 1);
  plan.x3_lo = -x3_half;
  return plan;
}

namespace {

// Shared fold core. center_shift = 0 for plain folding; for the sheared
// variant it is the box-center frequency (per axis) and `quadratic_only`
// keeps just the phase remainder.
void fold_core(const FreqDensity& f, const IndexBox& box, double x3, int M,
               cd* out, bool sheared) {
  std::fill(out, out + static_cast<size_t>(M) * M, cd{0, 0});
  if (box.empty()) return;
  const double cx = sheared ? 0.5 * (f.xi(box.i0) + f.xi(box.i1)) : 0.0;
  const double cy = sheared ? 0.5 * (f.eta(box.j0) + f.eta(box.j1)) : 0.0;
  const double phase_c = f.phase(cx, cy);
  const Vec2 grad_c = f.phase_gradient(cx, cy);
  for (int i = box.i0; i <= box.i1; ++i) {
    double x = f.xi(i);
    cd* row = out + static_cast<size_t>(i % M) * M;
    for (int j = box.j0; j <= box.j1; ++j) {
      cd v = f.at(i, j);
      if (v == cd{0, 0}) continue;
      double y = f.eta(j);
      double ang;
      if (sheared)
        ang = x3 * (f.phase(x, y) - phase_c - grad_c.x * (x - cx) -
                    grad_c.y * (y - cy));
      else
        ang = x3 * f.phase(x, y);
      row[j % M] += v * cd{std::cos(ang), std::sin(ang)};
    }
  }
  fft::dft2(out, M, M, +1);
  // The DFT supplies e^{2 pi i k i / M}; the grid offset (and, when sheared,
  // the box-center modulation) is restored by per-axis twiddles:
  //   x_k (xi_i - c) = k*Delta*(xi_0 - c) + 2 pi k i / M.
  const double delta = 2 * kPi / (M * f.h());
  const double ax = delta * (f.xi(0) - (sheared ? cx : 0.0));
  const double ay = delta * (f.eta(0) - (sheared ? cy : 0.0));
  std::vector<cd> tw1(M), tw2(M);
  for (int k = 0; k < M; ++k) {
    tw1[k] = {std::cos(k * ax), std::sin(k * ax)};
    tw2[k] = {std::cos(k * ay), std::sin(k * ay)};
  }
  const double wgt = f.h() * f.h() * thickness_profile(f, x3);
  for (int k1 = 0; k1 < M; ++k1) {
    cd t1 = tw1[k1] * wgt;
    cd* row = out + static_cast<size_t>(k1) * M;
    for (int k2 = 0; k2 < M; ++k2) row[k2] *= t1 * tw2[k2];
  }
}

}  // namespace

void folded_slice(const FreqDensity& f, const IndexBox& box, double x3, int M,
                  cd* out) {
  fold_core(f, box, x3, M, out, false);
}

void sheared_slice(const FreqDensity& f, const IndexBox& box, double x3, int M,
                   cd* out) {
  fold_core(f, box, x3, M, out, true);
}

double localized_lp(const FreqDensity& f, const IndexBox& box, double R,
                    double p, double x3_half) {
  if (x3_half < 0) x3_half = R;
  if (box.empty()) return 0;
  if (p == 2 && !f.thickness) {
    // Parseval per slice: the x-bar integral is x3-independent
    KahanSum s;
    for (int i = box.i0; i <= box.i1; ++i)
      for (int j = box.j0; j <= box.j1; ++j) s.add(std::norm(f.at(i, j)));
    double l2sq = s.value() * f.h() * f.h();
    return std::sqrt(sq(2 * kPi) * l2sq * 2 * x3_half);
  }
  const int M = next_pow2(2 * std::max(box.wx(), box.wy()) + 8);
  const double band = std::max(p, 2.0) * remainder_range(f, box);
  // sheared integrands vary on the (slow) remainder scale only, so the x3
  // step is bandwidth-driven rather than clamped to O(1)
  SlicePlan plan = make_slices(x3_half, band, x3_half / 8);
  const double cell = sq(coarse_spacing(f, M));
  std::vector<double> partial(plan.count, 0.0);
  parallel_for(plan.count, [&](int k) {
    std::vector<cd> buf(static_cast<size_t>(M) * M);
    sheared_slice(f, box, plan.x3(k), M, buf.data());
    KahanSum s;
    for (const cd& v : buf) s.add(std::pow(std::abs(v), p));
    partial[k] = s.value() * cell * plan.weight(k);
  });
  KahanSum total;
  for (double v : partial) total.add(v);
  return std::pow(total.value(), 1.0 / p);
}

namespace {

// Byte mask of coarse grid points inside any active ball at height x3.
// Distances use min-image displacements on the torus.
void build_mask(const field::BallUnion& balls, double x3, double period,
                double spacing, int M, std::vector<uint8_t>& mask) {
  mask.assign(static_cast<size_t>(M) * M, 0);
  for (const Vec3& c : balls.centers) {
    double dz = x3 - c.z;
    if (std::abs(dz) > balls.radius) continue;
    double rho = std::sqrt(sq(balls.radius) - sq(dz));
    int span = static_cast<int>(rho / spacing) + 1;
    int ci = static_cast<int>(std::floor(c.x / spacing));
    int cj = static_cast<int>(std::floor(c.y / spacing));
    for (int di = -span; di <= span + 1; ++di)
      for (int dj = -span; dj <= span + 1; ++dj) {
        int i = ci + di, j = cj + dj;
        double dx = torus_delta(i * spacing - c.x, period);
        double dy = torus_delta(j * spacing - c.y, period);
        if (dx * dx + dy * dy <= rho * rho) {
          int ii = ((i % M) + M) % M, jj = ((j % M) + M) % M;
          mask[static_cast<size_t>(ii) * M + jj] = 1;
        }
      }
  }
}

}  // namespace

double torus_delta(double d, double period) {
  d = std::fmod(d, period);
  if (d > period / 2) d -= period;
  if (d < -period / 2) d += period;
  return d;
}

double bilinear_l2_integral(const FreqDensity& f1, const FreqDensity& f2,
                            double R, const PairIntegralOpts& opts) {
  check_compatible(f1, f2);
  f1.check_resolves(R);
  IndexBox b1 = support_box(f1), b2 = support_box(f2);
  if (b1.empty() || b2.empty()) return 0;
  double x3_half = opts.x3_half < 0 ? R : opts.x3_half;
  int spread = std::max(b1.wx() + b2.wx(), b1.wy() + b2.wy());
  const int M = std::min(2 * f1.n, next_pow2(spread + 8));
  const double band = 2 * (phase_range(f1, b1) + phase_range(f2, b2));
  // the integrand is a degree-4 field product, so the x3 step is purely
  // bandwidth-driven; the cap only limits endpoint-truncation error
  double max_dx3 = opts.max_dx3 > 0 ? opts.max_dx3 : std::max(1.4, R / 512.0);
  SlicePlan plan = make_slices(x3_half, band, max_dx3);
  const double cell = sq(coarse_spacing(f1, M));
  const double period = torus_period(f1);
  const double spacing = coarse_spacing(f1, M);

  std::vector<double> partial(plan.count, 0.0);
  parallel_for(plan.count, [&](int k) {
    double x3 = plan.x3(k);
    std::vector<uint8_t> mask;
    if (opts.mask) {
      bool active = false;
      for (const Vec3& c : opts.mask->centers)
        if (std::abs(x3 - c.z) <= opts.mask->radius) active = true;
      if (!active) return;
      build_mask(*opts.mask, x3, period, spacing, M, mask);
    }
    std::vector<cd> buf1(static_cast<size_t>(M) * M);
    std::vector<cd> buf2(static_cast<size_t>(M) * M);
    folded_slice(f1, b1, x3, M, buf1.data());
    folded_slice(f2, b2, x3, M, buf2.data());
    KahanSum s;
    for (size_t idx = 0; idx < buf1.size(); ++idx) {
      if (!mask.empty() && !mask[idx]) continue;
      s.add(std::norm(buf1[idx] * buf2[idx]));
    }
    partial[k] = s.value() * cell * plan.weight(k);
  });
  KahanSum total;
  for (double v : partial) total.add(v);
  return total.value();
}

double power_integral(const FreqDensity& f, double R, double p,
                      const field::BallUnion* mask) {
  f.check_resolves(R);
  IndexBox b = support_box(f);
  if (b.empty()) return 0;
  const int M = std::min(2 * f.n, next_pow2(2 * std::max(b.wx(), b.wy()) + 8));
  double pr = phase_range(f, b);
  double max_dx3 = 1.4, band;
  if (p == 2.0 || p == 4.0) {
    band = p * pr;
  } else {
    // non-polynomial power: oversample the |Ef|^2 oscillation
    band = 4 * pr;
    max_dx3 = 0.7;
  }
  SlicePlan plan = make_slices(R, band, max_dx3);
  const double cell = sq(coarse_spacing(f, M));
  const double period = torus_period(f);
  const double spacing = coarse_spacing(f, M);

  std::vector<double> partial(plan.count, 0.0);
  parallel_for(plan.count, [&](int k) {
    double x3 = plan.x3(k);
    std::vector<uint8_t> msk;
    if (mask) {
      bool active = false;
      for (const Vec3& c : mask->centers)
        if (std::abs(x3 - c.z) <= mask->radius) active = true;
      if (!active) return;
      build_mask(*mask, x3, period, spacing, M, msk);
    }
    std::vector<cd> buf(static_cast<size_t>(M) * M);
    folded_slice(f, b, x3, M, buf.data());
    KahanSum s;
    for (size_t idx = 0; idx < buf.size(); ++idx) {
      if (!msk.empty() && !msk[idx]) continue;
      s.add(std::pow(std::abs(buf[idx]), p));
    }
    partial[k] = s.value() * cell * plan.weight(k);
  });
  KahanSum total;
  for (double v : partial) total.add(v);
  return total.value();
}

double weighted_power_integral(const FreqDensity& f, double R, double p,
                               const field::BallWeight& w, double x3_half) {
  IndexBox b = support_box(f);
  if (b.empty()) return 0;
  const int M = std::min(2 * f.n, next_pow2(2 * std::max(b.wx(), b.wy()) + 8));
  double band = std::max(p, 2.0) * phase_range(f, b);
  SlicePlan plan = make_slices(x3_half, band, p == 2 || p == 4 ? 1.4 : 0.7);
  const double cell = sq(coarse_spacing(f, M));
  const double period = torus_period(f);
  const double spacing = coarse_spacing(f, M);

  std::vector<double> partial(plan.count, 0.0);
  parallel_for(plan.count, [&](int k) {
    double x3 = plan.x3(k);
    std::vector<cd> buf(static_cast<size_t>(M) * M);
    folded_slice(f, b, x3, M, buf.data());
    KahanSum s;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        Vec3 x{torus_delta(i * spacing - w.center.x, period) + w.center.x,
               torus_delta(j * spacing - w.center.y, period) + w.center.y, x3};
        s.add(std::pow(std::abs(buf[static_cast<size_t>(i) * M + j]), p) *
              w(x));
      }
    partial[k] = s.value() * cell * plan.weight(k);
  });
  KahanSum total;
  for (double v : partial) total.add(v);
  return total.value();
}

SweepSpec plan_sweep(std::span<const FreqDensity* const> comps, double R,
                     double band_factor, double max_dx3, double x3_half) {
  if (comps.empty()) throw std::invalid_argument("plan_sweep: no components");
  int spread = 0;
  double pr = 0;
  for (const FreqDensity* f : comps) {
    check_compatible(*comps.front(), *f);
    IndexBox b = support_box(*f);
    if (b.empty()) continue;
    spread = std::max({spread, b.wx(), b.wy()});
    pr = std::max(pr, phase_range(*f, b));
  }
  SweepSpec spec;
  spec.M = std::min(2 * comps.front()->n, next_pow2(2 * spread + 8));
  spec.slices =
      make_slices(x3_half < 0 ? R : x3_half, band_factor * pr, max_dx3);
  return spec;
}

void multi_sweep(
    std::span<const FreqDensity* const> comps, const SweepSpec& spec,
    const std::function<void(int, double, double, const std::vector<const cd*>&)>&
        visit) {
  const int M = spec.M;
  std::vector<IndexBox> boxes;
  boxes.reserve(comps.size());
  for (const FreqDensity* f : comps) boxes.push_back(support_box(*f));
  parallel_for(spec.slices.count, [&](int k) {
    double x3 = spec.slices.x3(k);
    std::vector<std::vector<cd>> bufs(comps.size());
    std::vector<const cd*> ptrs(comps.size());
    for (size_t c = 0; c < comps.size(); ++c) {
      bufs[c].resize(static_cast<size_t>(M) * M);
      folded_slice(*comps[c], boxes[c], x3, M, bufs[c].data());
      ptrs[c] = bufs[c].data();
    }
    visit(k, x3, spec.slices.weight(k), ptrs);
  });
}

SweepSpec plan_sweep_boxes(const FreqDensity& f, std::span<const IndexBox> boxes,
                           double R, double band_factor, double max_dx3,
                           double x3_half) {
  int spread = 0;
  double pr = 0;
  for (const IndexBox& b : boxes) {
    if (b.empty()) continue;
    spread = std::max({spread, b.wx(), b.wy()});
    pr = std::max(pr, phase_range(f, b));
  }
  SweepSpec spec;
  spec.M = std::min(2 * f.n, next_pow2(2 * spread + 8));
  spec.slices =
      make_slices(x3_half < 0 ? R : x3_half, band_factor * pr, max_dx3);
  return spec;
}

void multi_sweep_boxes(
    const FreqDensity& f, std::span<const IndexBox> boxes, const SweepSpec& spec,
    const std::function<void(int, double, double, const std::vector<const cd*>&)>&
        visit) {
  const int M = spec.M;
  parallel_for(spec.slices.count, [&](int k) {
    double x3 = spec.slices.x3(k);
    std::vector<std::vector<cd>> bufs(boxes.size());
    std::vector<const cd*> ptrs(boxes.size());
    for (size_t c = 0; c < boxes.size(); ++c) {
      bufs[c].resize(static_cast<size_t>(M) * M);
      folded_slice(f, boxes[c], x3, M, bufs[c].data());
      ptrs[c] = bufs[c].data();
    }
    visit(k, x3, spec.slices.weight(k), ptrs);
  });
}

IndexBox index_range(const FreqDensity& f, double x0, double x1, double y0,
                     double y1) {
  double h = f.h(), off = f.offset();
  int i0 = static_cast<int>(std::ceil((x0 + 1) / h - off - 1e-12));
  int i1 = static_cast<int>(std::floor((x1 + 1) / h - off + 1e-12));
  while (i1 >= 0 && i1 < f.n && f.xi(i1) >= x1 - 1e-15) --i1;
  int j0 = static_cast<int>(std::ceil((y0 + 1) / h - off - 1e-12));
  int j1 = static_cast<int>(std::floor((y1 + 1) / h - off + 1e-12));
  while (j1 >= 0 && j1 < f.n && f.eta(j1) >= y1 - 1e-15) --j1;
  IndexBox b{std::max(0, i0), std::min(f.n - 1, i1), std::max(0, j0),
             std::min(f.n - 1, j1)};
  if (b.i1 < b.i0 || b.j1 < b.j0) return {0, -1, 0, -1};
  return b;
}

}  // namespace hypdec::engine
