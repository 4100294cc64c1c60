#include <doctest.h>

#include "hypdec/geom.hpp"
#include "hypdec/rng.hpp"

using namespace hypdec;
using namespace hypdec::geom;

TEST_CASE("transversality band on center gaps") {
  Square a{{-0.5, -0.5}, 0.1}, b{{0.5, 0.5}, 0.1};
  CHECK(is_transverse(a, b));
  CHECK(is_transverse(b, a));  // symmetric
  Square c{{0.5, -0.5}, 0.1};
  CHECK_FALSE(is_transverse(a, c));  // eta gap 0
  Square d{{-0.4, 0.5}, 0.1};
  CHECK_FALSE(is_transverse(a, d));  // xi gap 0.1 below band
  CHECK_THROWS_AS(is_transverse(Square{{0, 0}, 0}, b), std::invalid_argument);
}

TEST_CASE("transversality survives shrinking with a widened band") {
  CounterRng rng(7, "geom-nesting", 0, 0);
  for (int t = 0; t < 200; ++t) {
    double side = rng.next_real(0.1, 0.5);
    Square a{{rng.next_real(-0.9, -0.3), rng.next_real(-0.9, -0.3)}, side};
    Square b{{rng.next_real(0.3, 0.9), rng.next_real(0.3, 0.9)}, side};
    if (!is_transverse(a, b)) continue;
    double sub = side / 4;
    double off = (side - sub) / 2;
    Square a2{{a.center.x + (rng.next_unit() * 2 - 1) * off,
               a.center.y + (rng.next_unit() * 2 - 1) * off},
              sub};
    Square b2{{b.center.x + (rng.next_unit() * 2 - 1) * off,
               b.center.y + (rng.next_unit() * 2 - 1) * off},
              sub};
    CHECK(is_transverse(a2, b2, Band{}.widened(side / sub)));
  }
}

TEST_CASE("general position slope band") {
  CHECK(is_general_position(Vec2{0, 0}, Vec2{0.3, 0.3}));
  CHECK_FALSE(is_general_position(Vec2{0, 0}, Vec2{0.3, 0}));
  CHECK(is_general_position(Vec2{0, 0}, Vec2{0.1, -0.12}));
  CHECK_FALSE(is_general_position(Vec2{0, 0}, Vec2{0, 0.3}));  // vertical
  PlaneRect r{{0, 0}, 0.01, 0.1, {std::sqrt(0.5), std::sqrt(0.5)}};
  CHECK(is_general_position(r));
}

TEST_CASE("partition counts and cover") {
  Square tau{{0, 0}, 1};
  CHECK(partition(tau, 0.25).size() == 16);
  CHECK(partition(tau, 1.0).size() == 1);
  auto cover = partition(tau, 0.3);
  CHECK(cover.size() == 16);
  // every point of tau lies in some tile
  CounterRng rng(3, "geom-partition", 0, 0);
  for (int t = 0; t < 500; ++t) {
    Vec2 p{rng.next_real(tau.x0(), tau.x1() - 1e-12),
           rng.next_real(tau.y0(), tau.y1() - 1e-12)};
    bool hit = false;
    for (const auto& s : cover)
      if (p.x >= s.x0() - 1e-15 && p.x < s.x1() + 1e-15 && p.y >= s.y0() - 1e-15 &&
          p.y < s.y1() + 1e-15)
        hit = true;
    CHECK(hit);
  }
  CHECK_THROWS_AS(partition(tau, 0.0), std::invalid_argument);
}

TEST_CASE("dyadic cover enumeration") {
  auto c4 = dyadic_cover(4);
  CHECK(dyadic_shape_count(4) == 3);
  CHECK(c4.size() == 48);
  // 16 positions per shape
  int shape_counts[3] = {0, 0, 0};
  for (const auto& r : c4) shape_counts[r.log_side_1 + 2] += 1;
  CHECK(shape_counts[0] == 16);
  CHECK(shape_counts[1] == 16);
  CHECK(shape_counts[2] == 16);

  // derived via the exponent-pair enumeration: shapes with 2^a 2^b = 1/16,
  // -4 <= a,b <= 1 give 5 classes, each with 4*16 = 64 positions
  auto c16 = dyadic_cover(16);
  CHECK(dyadic_shape_count(16) == 5);
  CHECK(c16.size() == 320);

  // point multiplicity = one rectangle per shape class
  CounterRng rng(11, "geom-dyadic", 0, 0);
  for (double R : {4.0, 16.0, 64.0}) {
    auto cover = dyadic_cover(R);
    int shapes = dyadic_shape_count(R);
    for (int t = 0; t < 300; ++t) {
      Vec2 p{rng.next_real(-1, 1), rng.next_real(-1, 1)};
      int hits = 0;
      for (const auto& r : cover)
        if (r.contains(p)) ++hits;
      CHECK(hits == shapes);
    }
  }
  CHECK_THROWS_AS(dyadic_cover(3), std::invalid_argument);
}

TEST_CASE("hyperbolic rescale maps the surface to itself") {
  auto map = hyperbolic_rescale(0.5, 0.25, 0.25);
  Vec3 out = map.apply({0.5, 0.25, 0.125});
  CHECK(out.x == doctest::Approx(0).epsilon(1e-14));
  CHECK(out.y == doctest::Approx(0).epsilon(1e-14));
  CHECK(out.z == doctest::Approx(0).epsilon(1e-14));
  out = map.apply({0.75, 0.5, 0.375});
  CHECK(out.x == doctest::Approx(1));
  CHECK(out.y == doctest::Approx(1));
  CHECK(out.z == doctest::Approx(1));

  CounterRng rng(5, "geom-rescale", 0, 0);
  for (int t = 0; t < 100; ++t) {
    double c1 = rng.next_real(-0.5, 0.5), c2 = rng.next_real(-0.5, 0.5);
    double d = rng.next_real(0.1, 1.0);
    auto m = hyperbolic_rescale(c1, c2, d);
    double xi = rng.next_real(-1, 1), eta = rng.next_real(-1, 1);
    Vec3 img = m.apply({xi, eta, xi * eta});
    CHECK(std::abs(img.z - img.x * img.y) <= 1e-12);
    // map composed with its inverse is the identity
    Vec3 back = m.inverse().apply(img);
    CHECK(std::abs(back.x - xi) <= 1e-12);
    CHECK(std::abs(back.y - eta) <= 1e-12);
    CHECK(std::abs(back.z - xi * eta) <= 1e-12);
  }
  CHECK_THROWS_AS(hyperbolic_rescale(0, 0, 0), std::invalid_argument);
}

TEST_CASE("nonisotropic dilation keeps the surface invariant") {
  auto m = nonisotropic_dilate(Axis::horizontal, 2);
  Vec3 out = m.apply({0.5, 0.1, 0.05});
  CHECK(out.x == doctest::Approx(0.5));
  CHECK(out.y == doctest::Approx(0.4));
  CHECK(out.z == doctest::Approx(0.2));
  CHECK(out.z == doctest::Approx(out.x * out.y));
  CounterRng rng(6, "geom-dilate", 0, 0);
  for (int t = 0; t < 100; ++t) {
    auto mm = nonisotropic_dilate(rng.next_u64() % 2 ? Axis::horizontal
                                                     : Axis::vertical,
                                  rng.next_real(1, 8));
    double xi = rng.next_real(-1, 1), eta = rng.next_real(-1, 1);
    Vec3 img = mm.apply({xi, eta, xi * eta});
    CHECK(std::abs(img.z - img.x * img.y) <= 1e-12);
  }
}

TEST_CASE("tangent plane intersection direction") {
  Vec3 d = tangent_intersection_direction({0, 0}, {1, 1});
  CHECK(d.x == doctest::Approx(1));
  CHECK(d.y == doctest::Approx(-1));
  CHECK(d.z == doctest::Approx(0));
  d = tangent_intersection_direction({0, 0}, {1, 0});
  CHECK(d.x == doctest::Approx(1));
  CHECK(d.y == doctest::Approx(0));
  CHECK(d.z == doctest::Approx(0));

  CounterRng rng(8, "geom-tangent", 0, 0);
  for (int t = 0; t < 200; ++t) {
    Vec2 p{rng.next_real(-1, 1), rng.next_real(-1, 1)};
    Vec2 q{rng.next_real(-1, 1), rng.next_real(-1, 1)};
    if ((p - q).norm() < 1e-6) continue;
    Vec3 dir = tangent_intersection_direction(p, q);
    CHECK(std::abs(dir.dot(surface_normal(p))) <= 1e-12);
    CHECK(std::abs(dir.dot(surface_normal(q))) <= 1e-12);
  }
  CHECK_THROWS_AS(tangent_intersection_direction({0.5, 0.5}, {0.5, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("projected tangent-line slope sits in the band for transverse pairs") {
  CounterRng rng(9, "geom-slope", 0, 0);
  int checked = 0;
  while (checked < 100) {
    Vec2 p{rng.next_real(-1, 0), rng.next_real(-1, 0)};
    Vec2 q{rng.next_real(0, 1), rng.next_real(0, 1)};
    Square a{p, 0.05}, b{q, 0.05};
    if (!is_transverse(a, b)) continue;
    ++checked;
    Vec3 dir = tangent_intersection_direction(p, q);
    REQUIRE(dir.x != 0);
    // gaps in [lo, hi] pin the slope ratio inside [lo/hi, hi/lo]
    Band slope_band{Band{}.lo / Band{}.hi, Band{}.hi / Band{}.lo};
    CHECK(slope_band.contains(std::abs(dir.y / dir.x)));
  }
}
