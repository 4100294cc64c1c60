#include "hypdec/incidence.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <unordered_map>

#include "hypdec/parallel.hpp"

namespace hypdec::incidence {

namespace {

double dir_dist(Vec3 a, Vec3 b) {
  return std::min((a - b).norm(), (a + b).norm());
}

}  // namespace

void LineFamily::validate() const {
  if (!(delta > 0 && delta < 1))
    throw std::invalid_argument("LineFamily: need 0 < delta < 1");
  for (const Line& l : lines)
    if (std::abs(l.dir.norm() - 1) > 1e-9)
      throw std::invalid_argument("LineFamily: direction not unit");
  if (direction_separation() < delta * (1 - 1e-9))
    throw std::invalid_argument("LineFamily: directions not delta-separated");
}

double LineFamily::direction_separation() const {
  double best = 1e300;
  for (size_t i = 0; i < lines.size(); ++i)
    for (size_t j = i + 1; j < lines.size(); ++j)
      best = std::min(best, dir_dist(lines[i].dir, lines[j].dir));
  return best;
}

int LineFamily::direction_multiplicity() const {
  int worst = 0;
  for (size_t i = 0; i < lines.size(); ++i) {
    int count = 0;
    for (size_t j = 0; j < lines.size(); ++j)
      if (dir_dist(lines[i].dir, lines[j].dir) <= delta) ++count;
    worst = std::max(worst, count);
  }
  return worst;
}

std::pair<double, double> chord(const Line& l, double margin) {
  // |p + t d| = 1 - margin
  double rr = sq(1 - margin);
  double b = l.point.dot(l.dir);
  double c = l.point.dot(l.point) - rr;
  double disc = b * b - c;
  if (disc <= 0) return {0, 0};
  double s = std::sqrt(disc);
  return {-b - s, -b + s};
}

double Shading::covered_length(int line, double lo, double hi) const {
  const auto& ts = centers[line];
  double sum = 0, cur_lo = 0, cur_hi = -1e300;
  for (double t : ts) {
    double a = std::max(t - delta, lo), b = std::min(t + delta, hi);
    if (a > b) continue;
    if (a > cur_hi) {
      if (cur_hi > cur_lo) sum += cur_hi - cur_lo;
      cur_lo = a;
      cur_hi = b;
    } else {
      cur_hi = std::max(cur_hi, b);
    }
  }
  if (cur_hi > cur_lo) sum += cur_hi - cur_lo;
  return sum;
}

namespace {

Vec3 hemisphere_point(double u, double v) {
  // area-uniform on z >= 0
  double z = u;
  double r = std::sqrt(std::max(0.0, 1 - z * z));
  return {r * std::cos(2 * kPi * v), r * std::sin(2 * kPi * v), z};
}

std::vector<Vec3> separated_directions(double delta, int count, int budget,
                                       const std::function<Vec3(int)>& gen) {
  std::vector<Vec3> kept;
  for (int k = 0; k < budget && static_cast<int>(kept.size()) < count; ++k) {
    Vec3 d = gen(k);
    bool ok = true;
    for (const Vec3& e : kept)
      if (dir_dist(d, e) < delta) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(d);
  }
  return kept;
}

}  // namespace

LineFamily make_bush(double delta, int count, CounterRng& rng) {
  // Fibonacci hemisphere, greedily thinned to delta separation
  (void)rng;
  const double golden = (1 + std::sqrt(5.0)) / 2;
  int budget = std::max(4 * count, 128);
  auto gen = [&](int k) {
    double u = (k + 0.5) / budget;          // z in (0,1)
    double v = std::fmod(k / golden, 1.0);  // angle
    return hemisphere_point(u, v);
  };
  LineFamily fam;
  fam.delta = delta;
  for (Vec3 d : separated_directions(delta, count, budget, gen))
    fam.lines.push_back({{0, 0, 0}, d});
  fam.validate();
  return fam;
}

LineFamily make_brush(double delta, int count, CounterRng& rng) {
  LineFamily fam = make_bush(delta, count, rng);
  // slide each line's base point along the x-axis
  for (size_t i = 0; i < fam.lines.size(); ++i)
    fam.lines[i].point = {rng.next_real(-0.5, 0.5), 0, 0};
  fam.validate();
  return fam;
}

LineFamily make_parallel(double delta, int count, CounterRng& rng) {
  (void)rng;
  LineFamily fam;
  fam.delta = delta;
  int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  double tilt = 1.2 * delta;
  double spread = 4 * delta;
  for (int i = 0; i < side && static_cast<int>(fam.lines.size()) < count; ++i)
    for (int j = 0; j < side && static_cast<int>(fam.lines.size()) < count; ++j) {
      double ox = (i - (side - 1) / 2.0), oy = (j - (side - 1) / 2.0);
      if (std::abs(ox * spread) > 0.4 || std::abs(oy * spread) > 0.4) continue;
      Vec3 d{tilt * ox, tilt * oy, 1};
      d = d * (1 / d.norm());
      fam.lines.push_back({{ox * spread, oy * spread, 0}, d});
    }
  fam.validate();
  return fam;
}

LineFamily make_random(double delta, int count, CounterRng& rng) {
  int budget = 64 * count;
  auto gen = [&](int) { return hemisphere_point(rng.next_unit(), rng.next_unit()); };
  LineFamily fam;
  fam.delta = delta;
  for (Vec3 d : separated_directions(delta, count, budget, gen)) {
    double r = 0.5 * std::cbrt(rng.next_unit());
    double u = 2 * rng.next_unit() - 1;
    double ang = 2 * kPi * rng.next_unit();
    double rho = std::sqrt(std::max(0.0, 1 - u * u));
    fam.lines.push_back({Vec3{rho * std::cos(ang), rho * std::sin(ang), u} * r, d});
  }
  fam.validate();
  return fam;
}

Shading make_shading(const LineFamily& fam, ShadingKind kind, CounterRng& rng,
                     double eps1) {
  Shading y;
  y.delta = fam.delta;
  y.centers.resize(fam.lines.size());
  double d = fam.delta;
  for (size_t i = 0; i < fam.lines.size(); ++i) {
    auto [lo, hi] = chord(fam.lines[i], d);
    if (hi - lo < 2 * d) continue;
    std::vector<double>& ts = y.centers[i];
    switch (kind) {
      case ShadingKind::full:
        for (double t = lo + d; t <= hi - d; t += 2 * d) ts.push_back(t);
        break;
      case ShadingKind::half:
        for (double t = lo + d; t <= hi - d; t += 4 * d) ts.push_back(t);
        break;
      case ShadingKind::concentrated: {
        // all mass inside a single delta^{eps1}-segment, balls included
        double seg = std::pow(d, eps1);
        double span = std::max(0.0, seg - 2 * d);
        double start =
            lo + d + rng.next_unit() * std::max(0.0, hi - lo - seg - 2 * d);
        for (double t = start; t <= std::min(hi - d, start + span); t += 2 * d)
          ts.push_back(t);
        break;
      }
      case ShadingKind::random_half:
        for (double t = lo + d; t <= hi - d; t += 2 * d)
          if (rng.next_u64() & 1) ts.push_back(t);
        break;
    }
  }
  return y;
}

TwoEndsReport two_ends_check(const LineFamily& fam, const Shading& y,
                             double eps1, double eps2, double CY) {
  if (!(eps2 < eps1 && eps1 < 1))
    throw std::invalid_argument("two_ends_check: need eps2 < eps1 < 1");
  TwoEndsReport rep;
  rep.pass = true;
  rep.lambda = 1e300;
  double d = fam.delta;
  double seg = std::pow(d, eps1);
  double bound = CY * std::pow(d, eps2);
  for (size_t i = 0; i < fam.lines.size(); ++i) {
    auto [lo, hi] = chord(fam.lines[i], 0);
    double total = y.covered_length(static_cast<int>(i), lo, hi);
    double len = hi - lo;
    double lambda = len > 0 ? total / len : 0;
    rep.lambda = std::min(rep.lambda, lambda);
    if (total <= 0) {
      rep.vacuous = true;
      continue;
    }
    for (double t = lo; t + seg <= hi + d / 2; t += d / 2) {
      double frac = y.covered_length(static_cast<int>(i), t, t + seg) / total;
      if (frac > rep.worst_fraction) {
        rep.worst_fraction = frac;
        rep.worst_line = static_cast<int>(i);
      }
      if (frac > bound) rep.pass = false;
    }
  }
  if (rep.lambda == 1e300) rep.lambda = 0;
  return rep;
}

namespace {

struct VoxelGrid {
  double step;
  int G;
  double origin;
  int64_t id(int i, int j, int k) const {
    return (static_cast<int64_t>(k) * G + j) * G + i;
  }
  Vec3 center(int i, int j, int k) const {
    return {origin + (i + 0.5) * step, origin + (j + 0.5) * step,
            origin + (k + 0.5) * step};
  }
};

VoxelGrid make_grid(double delta) {
  VoxelGrid g;
  g.step = delta / 2;
  g.G = static_cast<int>(std::lround(2.0 / g.step));
  g.origin = -1;
  return g;
}

// voxel ids covered by one line's shading (unique, sorted)
std::vector<int64_t> line_voxels(const VoxelGrid& g, const Line& l,
                                 const std::vector<double>& ts, double delta) {
  std::vector<int64_t> ids;
  int span = static_cast<int>(delta / g.step) + 1;
  for (double t : ts) {
    Vec3 c = l.point + l.dir * t;
    int ci = static_cast<int>((c.x - g.origin) / g.step);
    int cj = static_cast<int>((c.y - g.origin) / g.step);
    int ck = static_cast<int>((c.z - g.origin) / g.step);
    for (int i = std::max(0, ci - span); i <= std::min(g.G - 1, ci + span); ++i)
      for (int j = std::max(0, cj - span); j <= std::min(g.G - 1, cj + span); ++j)
        for (int k = std::max(0, ck - span); k <= std::min(g.G - 1, ck + span);
             ++k)
          if ((g.center(i, j, k) - c).norm() <= delta) ids.push_back(g.id(i, j, k));
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

double union_volume(const LineFamily& fam, const Shading& y) {
  VoxelGrid g = make_grid(fam.delta);
  std::vector<uint8_t> occ(static_cast<size_t>(g.G) * g.G * g.G, 0);
  size_t count = 0;
  for (size_t i = 0; i < fam.lines.size(); ++i)
    for (int64_t id : line_voxels(g, fam.lines[i], y.centers[i], y.delta))
      if (!occ[id]) {
        occ[id] = 1;
        ++count;
      }
  return static_cast<double>(count) * g.step * g.step * g.step;
}

double per_line_volume_sum(const LineFamily& fam, const Shading& y) {
  VoxelGrid g = make_grid(fam.delta);
  std::vector<double> partial(fam.lines.size(), 0.0);
  parallel_for(static_cast<int>(fam.lines.size()), [&](int i) {
    partial[i] = static_cast<double>(
                     line_voxels(g, fam.lines[i], y.centers[i], y.delta).size()) *
                 g.step * g.step * g.step;
  });
  KahanSum s;
  for (double v : partial) s.add(v);
  return s.value();
}

double union_volume_mc(const LineFamily& fam, const Shading& y, int samples,
                       CounterRng& rng) {
  // spatial hash over ball centers, cell size delta
  double d = fam.delta;
  double cell = d;
  auto key = [&](int i, int j, int k) {
    return (static_cast<int64_t>(k) * 1000003 + j) * 1000003 + i;
  };
  std::unordered_map<int64_t, std::vector<Vec3>> hash;
  for (size_t i = 0; i < fam.lines.size(); ++i)
    for (double t : y.centers[i]) {
      Vec3 c = fam.lines[i].point + fam.lines[i].dir * t;
      hash[key(static_cast<int>(std::floor(c.x / cell)),
               static_cast<int>(std::floor(c.y / cell)),
               static_cast<int>(std::floor(c.z / cell)))]
          .push_back(c);
    }
  int hit = 0;
  for (int s = 0; s < samples; ++s) {
    Vec3 p{rng.next_real(-1, 1), rng.next_real(-1, 1), rng.next_real(-1, 1)};
    int ci = static_cast<int>(std::floor(p.x / cell));
    int cj = static_cast<int>(std::floor(p.y / cell));
    int ck = static_cast<int>(std::floor(p.z / cell));
    bool inside = false;
    for (int i = ci - 1; i <= ci + 1 && !inside; ++i)
      for (int j = cj - 1; j <= cj + 1 && !inside; ++j)
        for (int k = ck - 1; k <= ck + 1 && !inside; ++k) {
          auto it = hash.find(key(i, j, k));
          if (it == hash.end()) continue;
          for (const Vec3& c : it->second)
            if ((p - c).norm() <= d) {
              inside = true;
              break;
            }
        }
    if (inside) ++hit;
  }
  return 8.0 * hit / samples;
}

FurstenbergReport furstenberg_ratio(const LineFamily& fam, const Shading& y,
                                    double eps, double eps1, double eps2,
                                    double CY, double c_min) {
  TwoEndsReport te = two_ends_check(fam, y, eps1, eps2, CY);
  if (!te.pass)
    throw std::invalid_argument(
        "furstenberg_ratio: shading fails the two-ends hypothesis");
  FurstenbergReport rep;
  rep.lambda = te.lambda;
  rep.union_vol = union_volume(fam, y);
  rep.sum_vol = per_line_volume_sum(fam, y);
  double denom = std::pow(fam.delta, eps) * te.lambda * rep.sum_vol;
  rep.c = denom > 0 ? rep.union_vol / denom : 0;
  rep.pass = rep.c >= c_min;
  return rep;
}

PruneReport prune_multiplicity(const LineFamily& fam, const Shading& y,
                               double mu) {
  if (!(mu > 0)) throw std::invalid_argument("prune_multiplicity: mu <= 0");
  VoxelGrid g = make_grid(fam.delta);
  std::vector<uint16_t> mult(static_cast<size_t>(g.G) * g.G * g.G, 0);
  for (size_t i = 0; i < fam.lines.size(); ++i)
    for (int64_t id : line_voxels(g, fam.lines[i], y.centers[i], y.delta))
      if (mult[id] < 65535) ++mult[id];
  PruneReport rep;
  for (uint16_t m : mult) {
    if (m == 0) continue;
    ++rep.total_voxels;
    if (m <= mu) ++rep.kept_voxels;
  }
  rep.removed_fraction =
      rep.total_voxels
          ? 1.0 - static_cast<double>(rep.kept_voxels) / rep.total_voxels
          : 0.0;
  return rep;
}

double prune_mu_formula(double delta, double eps1, int m, double lambda) {
  return std::pow(delta, -2 * eps1) * m * std::pow(lambda, -0.75) /
         std::sqrt(delta);
}

void save_family(const LineFamily& fam, const Shading& y,
                 const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("save_family: cannot open " + path);
  std::fprintf(f, "hypdec-lines v1 delta=%.17g count=%zu\n", fam.delta,
               fam.lines.size());
  for (size_t i = 0; i < fam.lines.size(); ++i) {
    const Line& l = fam.lines[i];
    std::fprintf(f, "%.17g %.17g %.17g  %.17g %.17g %.17g :", l.point.x,
                 l.point.y, l.point.z, l.dir.x, l.dir.y, l.dir.z);
    for (double t : y.centers[i]) {
      Vec3 c = l.point + l.dir * t;
      std::fprintf(f, " %.17g %.17g %.17g", c.x, c.y, c.z);
    }
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

std::pair<LineFamily, Shading> load_family(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("load_family: cannot open " + path);
  LineFamily fam;
  Shading y;
  size_t count = 0;
  if (std::fscanf(f, "hypdec-lines v1 delta=%lf count=%zu\n", &fam.delta,
                  &count) != 2) {
    std::fclose(f);
    throw std::runtime_error("load_family: bad header");
  }
  y.delta = fam.delta;
  fam.lines.resize(count);
  y.centers.resize(count);
  for (size_t i = 0; i < count; ++i) {
    Line& l = fam.lines[i];
    if (std::fscanf(f, "%lf %lf %lf %lf %lf %lf :", &l.point.x, &l.point.y,
                    &l.point.z, &l.dir.x, &l.dir.y, &l.dir.z) != 6) {
      std::fclose(f);
      throw std::runtime_error("load_family: bad line record");
    }
    // read centers until end of line
    for (;;) {
      long pos = std::ftell(f);
      double cx, cy, cz;
      int ch = std::fgetc(f);
      if (ch == '\n' || ch == EOF) break;
      std::ungetc(ch, f);
      if (std::fscanf(f, "%lf %lf %lf", &cx, &cy, &cz) != 3) {
        std::fseek(f, pos, SEEK_SET);
        break;
      }
      y.centers[i].push_back((Vec3{cx, cy, cz} - l.point).dot(l.dir));
    }
    std::sort(y.centers[i].begin(), y.centers[i].end());
  }
  std::fclose(f);
  return {std::move(fam), std::move(y)};
}

}  // namespace hypdec::incidence
