#pragma once

#include <optional>
#include <vector>

#include "hypdec/common.hpp"

namespace hypdec::geom {

// Numeric stand-in for "comparable to 1": a ratio is accepted when it lies
// in [lo, hi]. Defaults to [1/4, 4]; every predicate that the written
// sources leave at "~1" takes one of these so experiments can tighten or
// loosen it.
struct Band {
  double lo = 0.25;
  double hi = 4.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
  Band widened(double factor) const { return {lo / factor, hi * factor}; }
};

struct Square {
  Vec2 center;
  double side = 0;

  double half() const { return side / 2; }
  double x0() const { return center.x - half(); }
  double x1() const { return center.x + half(); }
  double y0() const { return center.y - half(); }
  double y1() const { return center.y + half(); }
  bool contains(Vec2 p) const {
    return p.x >= x0() && p.x < x1() && p.y >= y0() && p.y < y1();
  }
  void validate() const {
    if (!(side > 0)) throw std::invalid_argument("Square: side must be > 0");
    if (x0() < -2 - 1e-12 || x1() > 2 + 1e-12 || y0() < -2 - 1e-12 ||
        y1() > 2 + 1e-12)
      throw std::invalid_argument("Square: not contained in [-2,2]^2");
  }
};

// Oriented rectangle: `axis` is the unit direction of the long side.
struct PlaneRect {
  Vec2 center;
  double half_short = 0;
  double half_long = 0;
  Vec2 axis{1, 0};

  Vec2 perp() const { return {-axis.y, axis.x}; }
  bool contains(Vec2 p) const {
    Vec2 d = p - center;
    return std::abs(d.dot(axis)) < half_long + 1e-15 &&
           std::abs(d.dot(perp())) < half_short + 1e-15;
  }
  std::array<Vec2, 4> corners() const {
    Vec2 u = axis * half_long, v = perp() * half_short;
    return {center + u + v, center + u - (v), center - u + v,
            center - u - (v)};
  }
  void validate() const {
    if (!(half_short > 0) || half_short > half_long + 1e-15)
      throw std::invalid_argument("PlaneRect: need 0 < short <= long");
    for (auto c : corners())
      if (std::abs(c.x) > 2 + 1e-12 || std::abs(c.y) > 2 + 1e-12)
        throw std::invalid_argument("PlaneRect: corners outside [-2,2]^2");
  }
};

// Half-open dyadic rectangle in [-1,1]^2. Sides are 2^log_side_1 x
// 2^log_side_2, position indexes the tile in the natural grid.
struct DyadicRect {
  int log_side_1 = 0;
  int log_side_2 = 0;
  int ix = 0;
  int iy = 0;

  double side1() const { return std::ldexp(1.0, log_side_1); }
  double side2() const { return std::ldexp(1.0, log_side_2); }
  double x0() const { return -1 + ix * side1(); }
  double y0() const { return -1 + iy * side2(); }
  bool contains(Vec2 p) const {
    return p.x >= x0() && p.x < x0() + side1() && p.y >= y0() &&
           p.y < y0() + side2();
  }
  Vec2 center() const { return {x0() + side1() / 2, y0() + side2() / 2}; }
};

struct AffineMap3 {
  Mat3 linear;
  Vec3 shift;

  Vec3 apply(Vec3 v) const { return linear.apply(v) + shift; }
  AffineMap3 inverse() const {
    Mat3 inv = linear.inverse();
    return {inv, inv.apply(shift) * -1.0};
  }
  AffineMap3 compose(const AffineMap3& inner) const {
    return {linear.mul(inner.linear), linear.apply(inner.shift) + shift};
  }
};

enum class Axis { horizontal, vertical };

// Both coordinate gaps between the centers must land in the band.
bool is_transverse(const Square& a, const Square& b, const Band& band = {});

// |slope| of the line joining the centers lies in the band. A vertical
// joining line is rejected (infinite slope).
bool is_general_position(Vec2 c1, Vec2 c2, const Band& band = {});
bool is_general_position(const Square& a, const Square& b,
                         const Band& band = {});
// Single-rectangle form: tests the slope of the long axis.
bool is_general_position(const PlaneRect& r, const Band& band = {});

// Cover of tau by ceil(side/delta)^2 axis-parallel delta-squares. Exact
// tiling when delta divides the side; otherwise the last row/column is
// pulled inward, so overlap is at most 4-fold at corners.
std::vector<Square> partition(const Square& tau, double delta);

// All dyadic rectangles in [-1,1]^2 with area 1/R and both sides in
// [1/R, 2]. R must be a power of 2, R >= 4. Tiles are half-open, so each
// point is covered exactly once per shape class.
std::vector<DyadicRect> dyadic_cover(double R);
int dyadic_shape_count(double R);

// (xi, eta, g) -> ((xi-c1)/d, (eta-c2)/d, (g - c1*eta - c2*xi + c1*c2)/d^2);
// maps the surface {g = xi*eta} to itself.
AffineMap3 hyperbolic_rescale(double c1, double c2, double d);

// (xi, eta, g) -> (xi, 2K*eta, 2K*g) or (2K*xi, eta, 2K*g).
AffineMap3 nonisotropic_dilate(Axis axis, double K);

// Direction of the intersection line of the two tangent planes of the
// surface {g = xi*eta} at p1 and p2.
Vec3 tangent_intersection_direction(Vec2 p1, Vec2 p2);

// Surface normal (eta, xi, -1) at a base point.
inline Vec3 surface_normal(Vec2 p) { return {p.y, p.x, -1.0}; }

// Canonical long-side direction for the rectangles attached to a
// transverse/general-position pair: slope is minus the slope of the line
// joining the centers.
Vec2 canonical_rect_axis(Vec2 c1, Vec2 c2);

}  // namespace hypdec::geom
