#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hypdec/common.hpp"
#include "hypdec/geom.hpp"

namespace hypdec::field {

enum class Surface { hyperbolic, elliptic };
enum class GridAlign { midpoint, integer };

// Sampled density on a uniform grid over [-1,1]^2. The surface choice fixes
// the phase function used by the extension operator; `thickness`, when set,
// models a graph-normal thickening of the given width, realized as a scalar
// profile multiplier per x3-slice.
struct FreqDensity {
  int n = 0;
  Surface surface = Surface::hyperbolic;
  GridAlign align = GridAlign::midpoint;
  std::optional<double> thickness;
  std::vector<cd> a;  // row-major, a[i*n + j] = f(xi_i, eta_j)

  double h() const { return 2.0 / n; }
  double offset() const { return align == GridAlign::midpoint ? 0.5 : 0.0; }
  double xi(int i) const { return -1.0 + (i + offset()) * h(); }
  double eta(int j) const { return xi(j); }
  cd& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
  cd at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

  double phase(double x, double y) const {
    return surface == Surface::hyperbolic ? x * y : x * x + y * y;
  }
  Vec2 phase_gradient(double x, double y) const {
    return surface == Surface::hyperbolic ? Vec2{y, x} : Vec2{2 * x, 2 * y};
  }

  double l2_norm() const;
  double lp_norm(double p) const;
  double sup_norm() const;

  void check_resolves(double R) const;  // h <= 1/(2 sqrt(R))
};

FreqDensity make_zero(int n, Surface s = Surface::hyperbolic,
                      GridAlign align = GridAlign::midpoint);
FreqDensity make_constant(int n, cd value, Surface s = Surface::hyperbolic,
                          GridAlign align = GridAlign::midpoint);

// Grid of a requested spatial box: x = x0 + (i*h, j*h, k*h).
struct GridSpec {
  Vec3 x0;
  double h_x = 0;
  std::array<int, 3> dims{0, 0, 0};

  static GridSpec centered_box(Vec3 center, double half_width, double h_x);
};

struct SpatialField {
  GridSpec grid;
  double R = 0;
  std::vector<cd> a;  // index (k3*d1 + i1)*d2 + i2

  cd at(int i, int j, int k) const {
    return a[(static_cast<size_t>(k) * grid.dims[0] + i) * grid.dims[1] + j];
  }
  cd& at(int i, int j, int k) {
    return a[(static_cast<size_t>(k) * grid.dims[0] + i) * grid.dims[1] + j];
  }
  Vec3 point(int i, int j, int k) const {
    return {grid.x0.x + i * grid.h_x, grid.x0.y + j * grid.h_x,
            grid.x0.z + k * grid.h_x};
  }
};

// Integration region: either a union of equal-radius balls (pairwise
// disjoint where the caller says so) or a rational decay weight centered
// on a ball of scale R.
struct BallUnion {
  std::vector<Vec3> centers;
  double radius = 0;
  bool contains(Vec3 p) const;
  void require_disjoint() const;
};
struct BallWeight {
  Vec3 center;
  double R = 1;
  double exponent = 100;
  double operator()(Vec3 p) const;
};
struct Region {
  std::variant<std::monostate, BallUnion, BallWeight> r;
  static Region all() { return {}; }
  static Region balls(BallUnion b) { return {std::move(b)}; }
  static Region weight(BallWeight w) { return {std::move(w)}; }
};

// Evaluate the extension operator on the requested grid. Each x3-slice is a
// chirp-z evaluation of the modulated density, exact to roundoff against
// the direct Riemann double sum.
SpatialField extend(const FreqDensity& f, double R, const GridSpec& grid);

// Direct Riemann-sum evaluation at one point (oracle-grade, O(n^2)).
cd extend_at(const FreqDensity& f, Vec3 x);

// Riemann L^p norm of a sampled field over a region (or weighted).
double lp_norm(const SpatialField& F, double p, const Region& region = {});

enum class RestrictMode { sharp, smooth };

// Multiply by the indicator (sharp) or by a compactly supported bump with
// support in 2*region (smooth). Sharp restriction is idempotent; smooth
// bumps over a lattice partition sum to 1.
FreqDensity restrict_freq(const FreqDensity& f, const geom::Square& region,
                          RestrictMode mode);
FreqDensity restrict_freq(const FreqDensity& f, const geom::PlaneRect& region,
                          RestrictMode mode);
FreqDensity restrict_freq(const FreqDensity& f, const geom::DyadicRect& region,
                          RestrictMode mode);

// sqrt( |theta|^{-1} * ||f . 1_theta||_2^2 )
double cap_avg_l2(const FreqDensity& f, const geom::Square& theta);

// 1D partition-of-unity profile: unit-lattice translates of `pou_bump`
// sum to 1; support of the bump is (-1, 1) around its center.
double pou_bump(double t);
double smooth_step(double t);  // 0 below -1, 1 above +1

// Self-describing binary container (complex64 payload, little-endian).
void save_density(const FreqDensity& f, const std::string& path);
FreqDensity load_density(const std::string& path);
void save_field(const SpatialField& F, const std::string& path);
SpatialField load_field(const std::string& path);

}  // namespace hypdec::field
