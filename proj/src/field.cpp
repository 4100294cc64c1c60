#include "hypdec/field.hpp"

#include <cstdio>
#include <cstring>
#include <memory>

#include "hypdec/fft.hpp"
#include "hypdec/parallel.hpp"

namespace hypdec::field {

double FreqDensity::l2_norm() const {
  KahanSum s;
  for (const cd& v : a) s.add(std::norm(v));
  return std::sqrt(s.value() * h() * h());
}

double FreqDensity::lp_norm(double p) const {
  if (p < 1) throw std::invalid_argument("lp_norm: p < 1");
  KahanSum s;
  for (const cd& v : a) s.add(std::pow(std::abs(v), p));
  return std::pow(s.value() * h() * h(), 1.0 / p);
}

double FreqDensity::sup_norm() const {
  double m = 0;
  for (const cd& v : a) m = std::max(m, std::abs(v));
  return m;
}

void FreqDensity::check_resolves(double R) const {
  if (h() > 1.0 / (2.0 * std::sqrt(R)) + 1e-12)
    throw std::invalid_argument(
        "FreqDensity: grid too coarse for requested scale");
}

FreqDensity make_zero(int n, Surface s, GridAlign align) {
  FreqDensity f;
  f.n = n;
  f.surface = s;
  f.align = align;
  f.a.assign(static_cast<size_t>(n) * n, cd{0, 0});
  return f;
}

FreqDensity make_constant(int n, cd value, Surface s, GridAlign align) {
  FreqDensity f = make_zero(n, s, align);
  for (auto& v : f.a) v = value;
  return f;
}

GridSpec GridSpec::centered_box(Vec3 center, double half_width, double h_x) {
  int d = 2 * static_cast<int>(std::floor(half_width / h_x)) + 1;
  Vec3 x0{center.x - (d - 1) / 2.0 * h_x, center.y - (d - 1) / 2.0 * h_x,
          center.z - (d - 1) / 2.0 * h_x};
  return {x0, h_x, {d, d, d}};
}

bool BallUnion::contains(Vec3 p) const {
  for (const Vec3& c : centers)
    if ((p - c).norm() <= radius) return true;
  return false;
}

void BallUnion::require_disjoint() const {
  for (size_t i = 0; i < centers.size(); ++i)
    for (size_t j = i + 1; j < centers.size(); ++j)
      if ((centers[i] - centers[j]).norm() < 2 * radius)
        throw std::invalid_argument("BallUnion: balls overlap");
}

double BallWeight::operator()(Vec3 p) const {
  return std::pow(1.0 + (p - center).norm() / R, -exponent);
}

cd extend_at(const FreqDensity& f, Vec3 x) {
  KahanSum re, im;
  for (int i = 0; i < f.n; ++i) {
    double u = f.xi(i);
    for (int j = 0; j < f.n; ++j) {
      double v = f.eta(j);
      double ang = x.x * u + x.y * v + x.z * f.phase(u, v);
      cd val = f.at(i, j) * cd{std::cos(ang), std::sin(ang)};
      re.add(val.real());
      im.add(val.imag());
    }
  }
  double w = f.h() * f.h();
  return {re.value() * w, im.value() * w};
}

namespace {

double thickness_profile(const FreqDensity& f, double x3) {
  if (!f.thickness) return 1.0;
  double t = *f.thickness * x3;
  return std::exp(-0.5 * t * t);
}

}  // namespace

SpatialField extend(const FreqDensity& f, double R, const GridSpec& grid) {
  f.check_resolves(R);
  if (grid.h_x > 0.5 + 1e-12)
    throw std::invalid_argument("extend: spatial grid coarser than 1/2");
  const int n = f.n;
  const int d1 = grid.dims[0], d2 = grid.dims[1], d3 = grid.dims[2];
  SpatialField F;
  F.grid = grid;
  F.R = R;
  F.a.assign(static_cast<size_t>(d1) * d2 * d3, cd{0, 0});

  const double h = f.h();
  const double xi0 = f.xi(0);
  const double w = h * h;

  parallel_for(d3, [&](int k) {
    double x3 = grid.x0.z + k * grid.h_x;
    // modulate by the surface phase, then chirp-z row/column passes
    std::vector<cd> g(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      double u = f.xi(i);
      for (int j = 0; j < n; ++j) {
        double v = f.eta(j);
        double ang = x3 * f.phase(u, v);
        g[static_cast<size_t>(i) * n + j] =
            f.at(i, j) * cd{std::cos(ang), std::sin(ang)};
      }
    }
    // eta -> x2 for each xi row
    std::vector<cd> tmp(static_cast<size_t>(n) * d2);
    std::vector<cd> line(std::max(d1, d2));
    for (int i = 0; i < n; ++i) {
      fft::czt_line(&g[static_cast<size_t>(i) * n], n, xi0, h, line.data(), d2,
                    grid.x0.y, grid.h_x);
      for (int j = 0; j < d2; ++j) tmp[static_cast<size_t>(j) * n + i] = line[j];
    }
    // xi -> x1 for each x2 column
    double scale = w * thickness_profile(f, x3);
    for (int j = 0; j < d2; ++j) {
      fft::czt_line(&tmp[static_cast<size_t>(j) * n], n, xi0, h, line.data(),
                    d1, grid.x0.x, grid.h_x);
      for (int i = 0; i < d1; ++i) F.at(i, j, k) = line[i] * scale;
    }
  });
  return F;
}

double lp_norm(const SpatialField& F, double p, const Region& region) {
  if (p < 1) throw std::invalid_argument("lp_norm: p < 1");
  const auto* balls = std::get_if<BallUnion>(&region.r);
  const auto* weight = std::get_if<BallWeight>(&region.r);
  if (balls) {
    // region must live inside the sampled box
    for (const Vec3& c : balls->centers) {
      for (int axis = 0; axis < 3; ++axis) {
        double lo = axis == 0 ? F.grid.x0.x : (axis == 1 ? F.grid.x0.y : F.grid.x0.z);
        double hi = lo + (F.grid.dims[axis] - 1) * F.grid.h_x;
        double cc = axis == 0 ? c.x : (axis == 1 ? c.y : c.z);
        if (cc - balls->radius < lo - 1e-9 || cc + balls->radius > hi + 1e-9)
          throw std::invalid_argument("lp_norm: region escapes grid box");
      }
    }
  }
  KahanSum s;
  for (int k = 0; k < F.grid.dims[2]; ++k)
    for (int i = 0; i < F.grid.dims[0]; ++i)
      for (int j = 0; j < F.grid.dims[1]; ++j) {
        Vec3 x = F.point(i, j, k);
        double m = 1;
        if (balls) {
          if (!balls->contains(x)) continue;
        } else if (weight) {
          m = (*weight)(x);
        }
        s.add(std::pow(std::abs(F.at(i, j, k)), p) * m);
      }
  double cell = F.grid.h_x * F.grid.h_x * F.grid.h_x;
  return std::pow(s.value() * cell, 1.0 / p);
}

double smooth_step(double t) {
  auto ramp = [](double u) { return u > 0 ? std::exp(-1.0 / u) : 0.0; };
  double num = ramp(1 + t), den = ramp(1 + t) + ramp(1 - t);
  return den == 0 ? (t > 0 ? 1.0 : 0.0) : num / den;
}

double pou_bump(double t) { return smooth_step(2 * t + 1) - smooth_step(2 * t - 1); }

namespace {

template <typename Member>
FreqDensity restrict_impl(const FreqDensity& f, Member&& member) {
  FreqDensity out = f;
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) out.at(i, j) = f.at(i, j) * member(f.xi(i), f.eta(j));
  return out;
}

}  // namespace

FreqDensity restrict_freq(const FreqDensity& f, const geom::Square& region,
                          RestrictMode mode) {
  if (!(region.side > 0)) throw std::invalid_argument("restrict_freq: degenerate region");
  if (mode == RestrictMode::sharp)
    return restrict_impl(f, [&](double x, double y) {
      return region.contains({x, y}) ? 1.0 : 0.0;
    });
  double s = region.side;
  return restrict_impl(f, [&](double x, double y) {
    return pou_bump((x - region.center.x) / s) *
           pou_bump((y - region.center.y) / s);
  });
}

FreqDensity restrict_freq(const FreqDensity& f, const geom::PlaneRect& region,
                          RestrictMode mode) {
  if (mode == RestrictMode::sharp)
    return restrict_impl(f, [&](double x, double y) {
      return region.contains({x, y}) ? 1.0 : 0.0;
    });
  Vec2 ax = region.axis, pp = region.perp();
  return restrict_impl(f, [&](double x, double y) {
    Vec2 d = Vec2{x, y} - region.center;
    return pou_bump(d.dot(ax) / (2 * region.half_long)) *
           pou_bump(d.dot(pp) / (2 * region.half_short));
  });
}

FreqDensity restrict_freq(const FreqDensity& f, const geom::DyadicRect& region,
                          RestrictMode mode) {
  if (mode == RestrictMode::sharp)
    return restrict_impl(f, [&](double x, double y) {
      return region.contains({x, y}) ? 1.0 : 0.0;
    });
  return restrict_impl(f, [&](double x, double y) {
    return pou_bump((x - region.center().x) / region.side1()) *
           pou_bump((y - region.center().y) / region.side2());
  });
}

double cap_avg_l2(const FreqDensity& f, const geom::Square& theta) {
  theta.validate();
  KahanSum s;
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j)
      if (theta.contains({f.xi(i), f.eta(j)})) s.add(std::norm(f.at(i, j)));
  double l2sq = s.value() * f.h() * f.h();
  return std::sqrt(l2sq / (theta.side * theta.side));
}

// --- serialization -------------------------------------------------------
// Layout (little-endian):
//   magic "HYPD" | u32 version | u32 kind (1 density, 2 field) | body
// Density body: i32 n, u8 surface, u8 align, u8 has_thickness, f64 thickness,
//   then n*n complex64 (float32 re, float32 im) row-major.
// Field body: i32 dims[3], f64 h_x, f64 x0[3], f64 R, then payload.

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

void put(std::FILE* f, const void* p, size_t bytes) {
  if (std::fwrite(p, 1, bytes, f) != bytes)
    throw std::runtime_error("serialize: short write");
}
void get(std::FILE* f, void* p, size_t bytes) {
  if (std::fread(p, 1, bytes, f) != bytes)
    throw std::runtime_error("serialize: short read");
}

void write_payload(std::FILE* f, const std::vector<cd>& a) {
  std::vector<float> buf(a.size() * 2);
  for (size_t i = 0; i < a.size(); ++i) {
    buf[2 * i] = static_cast<float>(a[i].real());
    buf[2 * i + 1] = static_cast<float>(a[i].imag());
  }
  put(f, buf.data(), buf.size() * sizeof(float));
}

void read_payload(std::FILE* f, std::vector<cd>& a) {
  std::vector<float> buf(a.size() * 2);
  get(f, buf.data(), buf.size() * sizeof(float));
  for (size_t i = 0; i < a.size(); ++i) a[i] = {buf[2 * i], buf[2 * i + 1]};
}

void write_header(std::FILE* f, uint32_t kind) {
  put(f, "HYPD", 4);
  uint32_t version = 1;
  put(f, &version, 4);
  put(f, &kind, 4);
}

uint32_t read_header(std::FILE* f) {
  char magic[4];
  get(f, magic, 4);
  if (std::memcmp(magic, "HYPD", 4) != 0)
    throw std::runtime_error("serialize: bad magic");
  uint32_t version, kind;
  get(f, &version, 4);
  get(f, &kind, 4);
  if (version != 1) throw std::runtime_error("serialize: bad version");
  return kind;
}

}  // namespace

void save_density(const FreqDensity& f, const std::string& path) {
  File fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("save_density: cannot open " + path);
  write_header(fp.get(), 1);
  int32_t n = f.n;
  put(fp.get(), &n, 4);
  uint8_t surface = f.surface == Surface::hyperbolic ? 0 : 1;
  uint8_t align = f.align == GridAlign::midpoint ? 0 : 1;
  uint8_t has_thickness = f.thickness.has_value() ? 1 : 0;
  put(fp.get(), &surface, 1);
  put(fp.get(), &align, 1);
  put(fp.get(), &has_thickness, 1);
  double t = f.thickness.value_or(0.0);
  put(fp.get(), &t, 8);
  write_payload(fp.get(), f.a);
}

FreqDensity load_density(const std::string& path) {
  File fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("load_density: cannot open " + path);
  if (read_header(fp.get()) != 1)
    throw std::runtime_error("load_density: not a density file");
  int32_t n;
  get(fp.get(), &n, 4);
  uint8_t surface, align, has_thickness;
  get(fp.get(), &surface, 1);
  get(fp.get(), &align, 1);
  get(fp.get(), &has_thickness, 1);
  double t;
  get(fp.get(), &t, 8);
  FreqDensity f = make_zero(n, surface ? Surface::elliptic : Surface::hyperbolic,
                            align ? GridAlign::integer : GridAlign::midpoint);
  if (has_thickness) f.thickness = t;
  read_payload(fp.get(), f.a);
  return f;
}

void save_field(const SpatialField& F, const std::string& path) {
  File fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("save_field: cannot open " + path);
  write_header(fp.get(), 2);
  int32_t dims[3] = {F.grid.dims[0], F.grid.dims[1], F.grid.dims[2]};
  put(fp.get(), dims, 12);
  put(fp.get(), &F.grid.h_x, 8);
  double x0[3] = {F.grid.x0.x, F.grid.x0.y, F.grid.x0.z};
  put(fp.get(), x0, 24);
  put(fp.get(), &F.R, 8);
  write_payload(fp.get(), F.a);
}

SpatialField load_field(const std::string& path) {
  File fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("load_field: cannot open " + path);
  if (read_header(fp.get()) != 2)
    throw std::runtime_error("load_field: not a field file");
  SpatialField F;
  int32_t dims[3];
  get(fp.get(), dims, 12);
  F.grid.dims = {dims[0], dims[1], dims[2]};
  get(fp.get(), &F.grid.h_x, 8);
  double x0[3];
  get(fp.get(), x0, 24);
  F.grid.x0 = {x0[0], x0[1], x0[2]};
  get(fp.get(), &F.R, 8);
  F.a.assign(static_cast<size_t>(dims[0]) * dims[1] * dims[2], cd{0, 0});
  read_payload(fp.get(), F.a);
  return F;
}

}  // namespace hypdec::field
