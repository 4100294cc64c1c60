#include "hypdec/geom.hpp"

#include <cmath>

namespace hypdec::geom {

bool is_transverse(const Square& a, const Square& b, const Band& band) {
  if (!(a.side > 0) || !(b.side > 0))
    throw std::invalid_argument("is_transverse: degenerate square");
  double dx = std::abs(a.center.x - b.center.x);
  double dy = std::abs(a.center.y - b.center.y);
  return band.contains(dx) && band.contains(dy);
}

bool is_general_position(Vec2 c1, Vec2 c2, const Band& band) {
  double dx = c2.x - c1.x;
  double dy = c2.y - c1.y;
  if (dx == 0) return false;  // vertical joining line
  return band.contains(std::abs(dy / dx));
}

bool is_general_position(const Square& a, const Square& b, const Band& band) {
  return is_general_position(a.center, b.center, band);
}

bool is_general_position(const PlaneRect& r, const Band& band) {
  if (r.axis.x == 0) return false;
  return band.contains(std::abs(r.axis.y / r.axis.x));
}

std::vector<Square> partition(const Square& tau, double delta) {
  if (!(delta > 0)) throw std::invalid_argument("partition: delta <= 0");
  if (delta > tau.side * (1 + 1e-12))
    throw std::invalid_argument("partition: delta exceeds side");
  int n = static_cast<int>(std::ceil(tau.side / delta - 1e-12));
  std::vector<Square> out;
  out.reserve(static_cast<size_t>(n) * n);
  auto center_at = [&](double lo_edge, int i) {
    double lo = lo_edge + i * delta;
    double hi_edge = lo_edge + tau.side;
    if (lo + delta > hi_edge) lo = hi_edge - delta;  // pull last tile inward
    return lo + delta / 2;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.push_back({{center_at(tau.x0(), i), center_at(tau.y0(), j)}, delta});
  return out;
}

int dyadic_shape_count(double R) {
  if (!is_pow2(R) || R < 4)
    throw std::invalid_argument("dyadic_cover: R must be a power of 2, >= 4");
  int k = static_cast<int>(std::lround(std::log2(R)));
  return k + 1;
}

std::vector<DyadicRect> dyadic_cover(double R) {
  int k = static_cast<int>(std::lround(std::log2(R)));
  (void)dyadic_shape_count(R);
  std::vector<DyadicRect> out;
  // sides 2^a x 2^b with a + b = -k and -k <= a, b <= 1
  for (int a = -k; a <= 1; ++a) {
    int b = -k - a;
    if (b < -k || b > 1) continue;
    int nx = static_cast<int>(std::lround(2.0 / std::ldexp(1.0, a)));
    int ny = static_cast<int>(std::lround(2.0 / std::ldexp(1.0, b)));
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) out.push_back({a, b, ix, iy});
  }
  return out;
}

AffineMap3 hyperbolic_rescale(double c1, double c2, double d) {
  if (!(d > 0)) throw std::invalid_argument("hyperbolic_rescale: d must be > 0");
  AffineMap3 map;
  Mat3& m = map.linear;
  m = Mat3{};
  m(0, 0) = 1 / d;
  m(1, 1) = 1 / d;
  m(2, 0) = -c2 / (d * d);
  m(2, 1) = -c1 / (d * d);
  m(2, 2) = 1 / (d * d);
  map.shift = {-c1 / d, -c2 / d, c1 * c2 / (d * d)};
  return map;
}

AffineMap3 nonisotropic_dilate(Axis axis, double K) {
  if (!(K >= 1)) throw std::invalid_argument("nonisotropic_dilate: K < 1");
  AffineMap3 map;
  Mat3& m = map.linear;
  m = Mat3{};
  if (axis == Axis::horizontal) {
    m(1, 1) = 2 * K;
  } else {
    m(0, 0) = 2 * K;
  }
  m(2, 2) = 2 * K;
  return map;
}

Vec3 tangent_intersection_direction(Vec2 p1, Vec2 p2) {
  if (p1.x == p2.x && p1.y == p2.y)
    throw std::invalid_argument("tangent_intersection_direction: coincident");
  return {p2.x - p1.x, p1.y - p2.y, p1.y * p2.x - p2.y * p1.x};
}

Vec2 canonical_rect_axis(Vec2 c1, Vec2 c2) {
  Vec2 d{c2.x - c1.x, c1.y - c2.y};
  double n = d.norm();
  if (n == 0)
    throw std::invalid_argument("canonical_rect_axis: coincident centers");
  return d * (1 / n);
}

}  // namespace hypdec::geom
