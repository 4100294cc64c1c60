#include "hypdec/wavepacket.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "hypdec/fft.hpp"
#include "hypdec/parallel.hpp"

namespace hypdec::wavepacket {

namespace {

double gevrey_bump(double t) {
  double u = 1 - t * t;
  return u > 0 ? std::exp(1.0 - 1.0 / u) : 0.0;
}

Lattice make_lattice(const FreqDensity& f, double R, double eps0) {
  f.check_resolves(R);
  double sr = std::sqrt(R);
  if (std::abs(sr - std::round(sr)) > 1e-9 || R < 16)
    throw std::invalid_argument("wavepacket: R must be an even power of 2, >= 16");
  Lattice lat;
  lat.n = f.n;
  lat.R = R;
  lat.eps0 = eps0;
  lat.h = f.h();
  double cc = 1.0 / (sr * lat.h);
  if (std::abs(cc - std::round(cc)) > 1e-9 || cc < 2 - 1e-9)
    throw std::invalid_argument(
        "wavepacket: grid must hold an integer number >= 2 of cells per cap");
  lat.cap_cells = static_cast<int>(std::lround(cc));
  lat.caps_per_side = static_cast<int>(std::lround(2 * sr)) + 2;
  lat.cap_lo = -1;
  lat.window_modes = std::max(1, lat.cap_cells / 2);
  // Translation cells must hold the window, whose spatial span is pinned by
  // the cap-compact spectrum at ~2*pi*sqrt(R); that is 2*sqrt(R) dual cells.
  double want = 2.0 * sr;
  int vstep = 1;
  while (vstep * 2 <= want) vstep *= 2;
  if (want / vstep > 2.0 * vstep / want) vstep *= 2;
  while (f.n % vstep != 0 && vstep > 1) vstep /= 2;
  lat.vstep = std::max(1, vstep);
  lat.vcount = f.n / lat.vstep;
  if (lat.window_modes >= lat.vcount)
    throw std::invalid_argument("wavepacket: window too wide for v-lattice");
  return lat;
}

}  // namespace

Vec2 Lattice::v_center(int vi, int vj) const {
  double p = period();
  return {engine::torus_delta(vi * vspacing(), p),
          engine::torus_delta(vj * vspacing(), p)};
}

WavePacketDecomp WavePacketDecomp::build(const FreqDensity& f, double R,
                                         double eps0) {
  WavePacketDecomp d;
  d.parent_ = &f;
  d.lat_ = make_lattice(f, R, eps0);
  const Lattice& lat = d.lat_;
  d.parent_l2sq_ = sq(f.l2_norm());

  // translation window: cosine polynomial with bump coefficients; translate
  // sums over the v-lattice are exactly constant (only the q=0 mode
  // survives), so normalizing by c0*vcount makes the partition exact.
  const int Q = lat.window_modes;
  std::vector<double> coeff(Q + 1);
  for (int q = 0; q <= Q; ++q) coeff[q] = gevrey_bump(q / (Q + 0.5));
  const double norm = coeff[0] * lat.vcount;
  d.window_.assign(lat.n, 0.0);
  for (int m = 0; m < lat.n; ++m) {
    double w = coeff[0];
    for (int q = 1; q <= Q; ++q)
      w += 2 * coeff[q] * std::cos(2 * kPi * q * m / lat.n);
    d.window_[m] = w / norm;
  }
  d.window_kernel_.assign(2 * Q + 1, cd{0, 0});
  for (int q = -Q; q <= Q; ++q)
    d.window_kernel_[q + Q] = coeff[std::abs(q)] / norm;

  const double s = lat.cap_side();
  const int cc = lat.cap_cells;
  for (int ti = lat.cap_lo; ti < lat.cap_lo + lat.caps_per_side; ++ti) {
    for (int tj = lat.cap_lo; tj < lat.cap_lo + lat.caps_per_side; ++tj) {
      Vec2 c = lat.cap_center(ti, tj);
      int i0 = std::max(0, (ti - 1) * cc), i1 = std::min(lat.n - 1, (ti + 2) * cc);
      int j0 = std::max(0, (tj - 1) * cc), j1 = std::min(lat.n - 1, (tj + 2) * cc);
      if (i1 < i0 || j1 < j0) continue;
      CapBlock blk;
      blk.ti = ti;
      blk.tj = tj;
      blk.center = c;
      blk.box = {i0, i1, j0, j1};
      blk.g.assign(static_cast<size_t>(blk.box.wx()) * blk.box.wy(), cd{0, 0});
      KahanSum mass;
      bool any = false;
      for (int i = i0; i <= i1; ++i) {
        double wx = field::pou_bump((f.xi(i) - c.x) / s);
        if (wx == 0) continue;
        for (int j = j0; j <= j1; ++j) {
          double wy = field::pou_bump((f.eta(j) - c.y) / s);
          cd v = f.at(i, j) * (wx * wy);
          if (v != cd{0, 0}) any = true;
          blk.g[static_cast<size_t>(i - i0) * blk.box.wy() + (j - j0)] = v;
          mass.add(std::norm(v));
        }
      }
      if (!any) continue;
      blk.l2sq = mass.value() * f.h() * f.h();
      d.blocks_.push_back(std::move(blk));
    }
  }
  return d;
}

FreqDensity WavePacketDecomp::packet(int block, int vi, int vj) const {
  const CapBlock& blk = blocks_.at(block);
  const Lattice& lat = lat_;
  const int Q = lat.window_modes;
  const int n = lat.n;
  auto phase = [&](int q, int v) {
    double ang = -2 * kPi * q * (static_cast<double>(v) * lat.vstep) / n;
    return cd{std::cos(ang), std::sin(ang)};
  };
  // row pass (xi axis), then column pass (eta axis)
  int wi = blk.box.wx(), wj = blk.box.wy();
  std::vector<cd> tmp(static_cast<size_t>(wi + 2 * Q) * wj, cd{0, 0});
  for (int q = -Q; q <= Q; ++q) {
    cd k = window_kernel_[q + Q] * phase(q, vi);
    for (int i = 0; i < wi; ++i)
      for (int j = 0; j < wj; ++j)
        tmp[static_cast<size_t>(i - q + Q) * wj + j] +=
            k * blk.g[static_cast<size_t>(i) * wj + j];
  }
  FreqDensity out = field::make_zero(n, parent_->surface, parent_->align);
  out.thickness = parent_->thickness;
  for (int q = -Q; q <= Q; ++q) {
    cd k = window_kernel_[q + Q] * phase(q, vj);
    for (int i = 0; i < wi + 2 * Q; ++i) {
      int gi = blk.box.i0 - Q + i;
      int gi_mod = ((gi % n) + n) % n;
      for (int j = 0; j < wj; ++j) {
        int gj = blk.box.j0 + j - q;
        int gj_mod = ((gj % n) + n) % n;
        out.at(gi_mod, gj_mod) += k * tmp[static_cast<size_t>(i) * wj + j];
      }
    }
  }
  return out;
}

double WavePacketDecomp::packet_mass(int block, int vi, int vj) const {
  FreqDensity p = packet(block, vi, vj);
  return sq(p.l2_norm());
}

Tube WavePacketDecomp::tube(int block, int vi, int vj) const {
  const CapBlock& blk = blocks_.at(block);
  Tube t;
  t.block = block;
  t.theta_i = blk.ti;
  t.theta_j = blk.tj;
  t.vi = vi;
  t.vj = vj;
  t.cap_center = blk.center;
  t.v_center = lat_.v_center(vi, vj);
  t.grad = parent_->phase_gradient(blk.center.x, blk.center.y);
  t.radius = lat_.tube_radius();
  t.R = lat_.R;
  t.l2sq = packet_mass(block, vi, vj);
  return t;
}

std::vector<Tube> WavePacketDecomp::significant_tubes(double frac) const {
  std::vector<Tube> out;
  double cut = frac * parent_l2sq_;
  for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
    if (blocks_[b].l2sq < cut / (lat_.vcount * lat_.vcount)) continue;
    for (int vi = 0; vi < lat_.vcount; ++vi)
      for (int vj = 0; vj < lat_.vcount; ++vj) {
        double m = packet_mass(b, vi, vj);
        if (m >= cut) {
          Tube t = tube(b, vi, vj);
          t.l2sq = m;
          out.push_back(t);
        }
      }
  }
  return out;
}

double WavePacketDecomp::cap_partition_residual() const {
  const FreqDensity& f = *parent_;
  std::vector<cd> acc(f.a.size(), cd{0, 0});
  for (const CapBlock& blk : blocks_)
    for (int i = blk.box.i0; i <= blk.box.i1; ++i)
      for (int j = blk.box.j0; j <= blk.box.j1; ++j)
        acc[static_cast<size_t>(i) * f.n + j] +=
            blk.g[static_cast<size_t>(i - blk.box.i0) * blk.box.wy() +
                  (j - blk.box.j0)];
  KahanSum err;
  for (size_t i = 0; i < acc.size(); ++i) err.add(std::norm(acc[i] - f.a[i]));
  double l2 = f.l2_norm();
  return l2 == 0 ? 0 : std::sqrt(err.value() * f.h() * f.h()) / l2;
}

double WavePacketDecomp::packet_sum_residual(int block) const {
  const CapBlock& blk = blocks_.at(block);
  const FreqDensity& f = *parent_;
  std::vector<cd> acc(f.a.size(), cd{0, 0});
  for (int vi = 0; vi < lat_.vcount; ++vi)
    for (int vj = 0; vj < lat_.vcount; ++vj) {
      FreqDensity p = packet(block, vi, vj);
      for (size_t i = 0; i < acc.size(); ++i) acc[i] += p.a[i];
    }
  KahanSum err;
  for (int i = blk.box.i0; i <= blk.box.i1; ++i)
    for (int j = blk.box.j0; j <= blk.box.j1; ++j) {
      cd want = blk.g[static_cast<size_t>(i - blk.box.i0) * blk.box.wy() +
                      (j - blk.box.j0)];
      err.add(std::norm(acc[static_cast<size_t>(i) * f.n + j] - want));
    }
  return std::sqrt(err.value() * f.h() * f.h());
}

double WavePacketDecomp::total_packet_mass() const {
  const Lattice& lat = lat_;
  const int n = lat.n;
  // sum_v psi_v(m)^2 along one axis
  std::vector<double> wsq(n, 0.0);
  for (int m = 0; m < n; ++m) {
    double sum = 0;
    for (int t = 0; t < lat.vcount; ++t) {
      int idx = ((m - t * lat.vstep) % n + n) % n;
      sum += window_[idx] * window_[idx];
    }
    wsq[m] = sum;
  }
  double total = 0;
  std::vector<double> partial(blocks_.size(), 0.0);
  parallel_for(static_cast<int>(blocks_.size()), [&](int b) {
    const CapBlock& blk = blocks_[b];
    std::vector<cd> buf(static_cast<size_t>(n) * n, cd{0, 0});
    for (int i = blk.box.i0; i <= blk.box.i1; ++i)
      for (int j = blk.box.j0; j <= blk.box.j1; ++j)
        buf[static_cast<size_t>(i) * n + j] =
            blk.g[static_cast<size_t>(i - blk.box.i0) * blk.box.wy() +
                  (j - blk.box.j0)];
    fft::dft2(buf.data(), n, n, -1);
    KahanSum s;
    for (int m1 = 0; m1 < n; ++m1)
      for (int m2 = 0; m2 < n; ++m2)
        s.add(std::norm(buf[static_cast<size_t>(m1) * n + m2]) * wsq[m1] *
              wsq[m2]);
    partial[b] = s.value() / (static_cast<double>(n) * n);
  });
  KahanSum s;
  for (double v : partial) s.add(v);
  total = s.value() * lat.h * lat.h;
  return total;
}

double WavePacketDecomp::direction_separation() const {
  double best = 1e300;
  for (size_t a = 0; a < blocks_.size(); ++a) {
    if (blocks_[a].l2sq == 0) continue;
    Vec2 ga = parent_->phase_gradient(blocks_[a].center.x, blocks_[a].center.y);
    for (size_t b = a + 1; b < blocks_.size(); ++b) {
      if (blocks_[b].l2sq == 0) continue;
      Vec2 gb =
          parent_->phase_gradient(blocks_[b].center.x, blocks_[b].center.y);
      best = std::min(best, (ga - gb).norm());
    }
  }
  return best;
}

int WavePacketDecomp::direction_overlap() const {
  // worst-case count of v-lattice points within one tube radius of a point
  double vsp = lat_.vspacing();
  double r = lat_.tube_radius();
  int reach = static_cast<int>(r / vsp) + 1;
  int worst = 0;
  const int probes = 16;
  for (int a = 0; a < probes; ++a)
    for (int b = 0; b < probes; ++b) {
      Vec2 p{(a + 0.5) / probes * vsp, (b + 0.5) / probes * vsp};
      int count = 0;
      for (int i = -reach; i <= reach; ++i)
        for (int j = -reach; j <= reach; ++j)
          if ((p - Vec2{i * vsp, j * vsp}).norm() <= r) ++count;
      worst = std::max(worst, count);
    }
  return worst;
}

double WavePacketDecomp::support_leak(int block, int vi, int vj) const {
  const CapBlock& blk = blocks_.at(block);
  FreqDensity p = packet(block, vi, vj);
  double s = lat_.cap_side();
  double half = 1.5 * s;
  KahanSum inside, outside;
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j) {
      double m = std::norm(p.at(i, j));
      if (m == 0) continue;
      if (std::abs(p.xi(i) - blk.center.x) <= half &&
          std::abs(p.eta(j) - blk.center.y) <= half)
        inside.add(m);
      else
        outside.add(m);
    }
  double tot = inside.value() + outside.value();
  return tot == 0 ? 0 : outside.value() / tot;
}

bool tube_meets_ball(const Tube& t, const Ball& q, double period) {
  double lo = std::max(-t.R, q.center.z - q.radius);
  double hi = std::min(t.R, q.center.z + q.radius);
  if (lo > hi) return false;
  auto cost = [&](double x3) {
    Vec2 c = t.axis_at(x3);
    double dx = engine::torus_delta(q.center.x - c.x, period);
    double dy = engine::torus_delta(q.center.y - c.y, period);
    double d = std::hypot(dx, dy);
    double excess = std::max(0.0, d - t.radius);
    return excess * excess + sq(x3 - q.center.z);
  };
  const int steps = 512;
  double best = 1e300, best_x = lo;
  for (int k = 0; k <= steps; ++k) {
    double x3 = lo + (hi - lo) * k / steps;
    double c = cost(x3);
    if (c < best) best = c, best_x = x3;
  }
  // golden refine around the best sample
  double a = std::max(lo, best_x - (hi - lo) / steps);
  double b = std::min(hi, best_x + (hi - lo) / steps);
  const double gr = 0.618033988749895;
  for (int it = 0; it < 60; ++it) {
    double m1 = b - gr * (b - a), m2 = a + gr * (b - a);
    if (cost(m1) < cost(m2))
      b = m2;
    else
      a = m1;
  }
  best = std::min(best, cost(0.5 * (a + b)));
  return best <= q.radius * q.radius * (1 + 1e-12);
}

int tube_ball_multiplicity(const std::vector<Tube>& tubes, const Ball& q,
                           double period) {
  int count = 0;
  for (const Tube& t : tubes)
    if (tube_meets_ball(t, q, period)) ++count;
  return count;
}

namespace {

// x3-intervals where the tube axis lies inside a ball (torus metric),
// branch by wrap image.
void axis_ball_intervals(const Tube& t, const Vec3& c, double rho,
                         double period,
                         std::vector<std::pair<double, double>>& out) {
  // |c_v - x3 g - cbar + k*period|^2 + (x3 - cz)^2 <= rho^2 per image k
  double gx = t.grad.x, gy = t.grad.y;
  double span = t.R * std::max(std::abs(gx), std::abs(gy)) + period;
  int kmax = static_cast<int>(span / period) + 1;
  for (int kx = -kmax; kx <= kmax; ++kx)
    for (int ky = -kmax; ky <= kmax; ++ky) {
      double ax = t.v_center.x - c.x + kx * period;
      double ay = t.v_center.y - c.y + ky * period;
      // (ax - gx x3)^2 + (ay - gy x3)^2 + (x3 - cz)^2 <= rho^2
      double A = gx * gx + gy * gy + 1;
      double B = -2 * (ax * gx + ay * gy + c.z);
      double C = ax * ax + ay * ay + c.z * c.z - rho * rho;
      double disc = B * B - 4 * A * C;
      if (disc <= 0) continue;
      double sd = std::sqrt(disc);
      double x0 = (-B - sd) / (2 * A), x1 = (-B + sd) / (2 * A);
      x0 = std::max(x0, -t.R);
      x1 = std::min(x1, t.R);
      if (x0 < x1) out.emplace_back(x0, x1);
    }
}

double interval_overlap(const std::vector<std::pair<double, double>>& iv,
                        double lo, double hi) {
  double sum = 0;
  for (auto [a, b] : iv) {
    double l = std::max(a, lo), r = std::min(b, hi);
    if (l < r) sum += r - l;
  }
  return sum;
}

}  // namespace

std::vector<TubeShading> segment_and_shade(const std::vector<Tube>& tubes,
                                           const field::BallUnion& X,
                                           double r, double eps,
                                           double period) {
  std::vector<TubeShading> out;
  const double eps2 = eps * eps;
  const double seg_len = std::pow(r, 1 - eps2);
  for (int ti = 0; ti < static_cast<int>(tubes.size()); ++ti) {
    const Tube& t = tubes[ti];
    std::vector<std::pair<double, double>> covered;
    for (const Vec3& c : X.centers)
      axis_ball_intervals(t, c, X.radius, period, covered);
    std::sort(covered.begin(), covered.end());
    // merge
    std::vector<std::pair<double, double>> merged;
    for (auto iv : covered) {
      if (!merged.empty() && iv.first <= merged.back().second)
        merged.back().second = std::max(merged.back().second, iv.second);
      else
        merged.push_back(iv);
    }
    int nseg = std::max(1, static_cast<int>(std::ceil(2 * t.R / seg_len)));
    double tube_len = 2 * t.R;
    // bucket segments by dyadic density; half-open buckets, ties go down
    std::map<int, std::vector<int>> classes;
    std::map<int, std::vector<std::pair<double, double>>> class_cover;
    for (int k = 0; k < nseg; ++k) {
      double lo = -t.R + k * seg_len;
      double hi = std::min(t.R, lo + seg_len);
      double len = interval_overlap(merged, lo, hi);
      if (len <= 0) continue;
      int cls = static_cast<int>(std::floor(std::log2(len / tube_len)));
      classes[cls].push_back(k);
      for (auto iv : merged) {
        double l = std::max(iv.first, lo), rr = std::min(iv.second, hi);
        if (l < rr) class_cover[cls].emplace_back(l, rr);
      }
    }
    for (auto& [cls, segs] : classes) {
      TubeShading sh;
      sh.tube_index = ti;
      sh.segment_length = seg_len;
      sh.dyadic_density = cls;
      sh.dyadic_count =
          static_cast<int>(std::floor(std::log2(static_cast<double>(segs.size()))));
      sh.segments = segs;
      sh.covered = class_cover[cls];
      out.push_back(std::move(sh));
    }
  }
  return out;
}

void export_tubes_csv(const std::vector<Tube>& tubes, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("export_tubes_csv: cannot open " + path);
  std::fprintf(f, "theta_i,theta_j,v_i,v_j,dir_x,dir_y,dir_z,radius\n");
  for (const Tube& t : tubes) {
    Vec3 d = t.direction();
    std::fprintf(f, "%d,%d,%d,%d,%.17g,%.17g,%.17g,%.17g\n", t.theta_i,
                 t.theta_j, t.vi, t.vj, d.x, d.y, d.z, t.radius);
  }
  std::fclose(f);
}

}  // namespace hypdec::wavepacket
