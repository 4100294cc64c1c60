#include "hypdec/decouple.hpp"

#include <algorithm>
#include <map>

#include "hypdec/parallel.hpp"

namespace hypdec::decouple {

using engine::IndexBox;

EnsembleKind parse_ensemble(const std::string& name) {
  if (name == "random_phase" || name == "random") return EnsembleKind::random_phase;
  if (name == "focusing") return EnsembleKind::focusing;
  if (name == "line_concentrated" || name == "line")
    return EnsembleKind::line_concentrated;
  if (name == "bush") return EnsembleKind::bush;
  if (name == "single_cap") return EnsembleKind::single_cap;
  throw std::invalid_argument("unknown ensemble: " + name);
}

std::string ensemble_name(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::random_phase: return "random_phase";
    case EnsembleKind::focusing: return "focusing";
    case EnsembleKind::line_concentrated: return "line_concentrated";
    case EnsembleKind::bush: return "bush";
    case EnsembleKind::single_cap: return "single_cap";
  }
  return "?";
}

engine::IndexBox index_box(const FreqDensity& f, const geom::Square& sq) {
  IndexBox b{f.n, -1, f.n, -1};
  for (int i = 0; i < f.n; ++i) {
    double x = f.xi(i);
    if (x < sq.x0() || x >= sq.x1()) continue;
    b.i0 = std::min(b.i0, i);
    b.i1 = std::max(b.i1, i);
  }
  for (int j = 0; j < f.n; ++j) {
    double y = f.eta(j);
    if (y < sq.y0() || y >= sq.y1()) continue;
    b.j0 = std::min(b.j0, j);
    b.j1 = std::max(b.j1, j);
  }
  if (b.i1 < b.i0 || b.j1 < b.j0) return {0, -1, 0, -1};
  return b;
}

FreqDensity generate(EnsembleKind kind, double R, const geom::Square& target,
                     int n, CounterRng& rng) {
  field::GridAlign align = kind == EnsembleKind::line_concentrated
                               ? field::GridAlign::integer
                               : field::GridAlign::midpoint;
  FreqDensity f = field::make_zero(n, field::Surface::hyperbolic, align);
  IndexBox box = index_box(f, target);
  switch (kind) {
    case EnsembleKind::random_phase:
      for (int i = box.i0; i <= box.i1; ++i)
        for (int j = box.j0; j <= box.j1; ++j) f.at(i, j) = rng.next_phase();
      break;
    case EnsembleKind::focusing:
      for (int i = box.i0; i <= box.i1; ++i)
        for (int j = box.j0; j <= box.j1; ++j) f.at(i, j) = 1;
      break;
    case EnsembleKind::line_concentrated: {
      // mass on the grid row closest to the target's center line
      int jrow = 0;
      double best = 1e300;
      for (int j = box.j0; j <= box.j1; ++j) {
        double d = std::abs(f.eta(j) - target.center.y);
        if (d < best) best = d, jrow = j;
      }
      for (int i = box.i0; i <= box.i1; ++i) f.at(i, jrow) = 1;
      break;
    }
    case EnsembleKind::bush: {
      Vec3 x0{rng.next_real(-R / 4, R / 4), rng.next_real(-R / 4, R / 4),
              rng.next_real(-R / 4, R / 4)};
      double cap = 1.0 / std::sqrt(R);
      // sign per cap, common focus point
      std::map<std::pair<int, int>, double> signs;
      for (int i = box.i0; i <= box.i1; ++i)
        for (int j = box.j0; j <= box.j1; ++j) {
          double x = f.xi(i), y = f.eta(j);
          std::pair<int, int> key{static_cast<int>(std::floor((x + 1) / cap)),
                                  static_cast<int>(std::floor((y + 1) / cap))};
          auto it = signs.find(key);
          if (it == signs.end()) it = signs.emplace(key, rng.next_sign()).first;
          double ang = -(x0.x * x + x0.y * y + x0.z * f.phase(x, y));
          f.at(i, j) = it->second * cd{std::cos(ang), std::sin(ang)};
        }
      break;
    }
    case EnsembleKind::single_cap: {
      geom::Square cap{target.center, 1.0 / std::sqrt(R)};
      IndexBox cb = index_box(f, cap);
      for (int i = cb.i0; i <= cb.i1; ++i)
        for (int j = cb.j0; j <= cb.j1; ++j) f.at(i, j) = 1;
      break;
    }
  }
  return f;
}

FreqDensity rescale_density(const FreqDensity& f, Vec2 c, double d, int new_n) {
  FreqDensity g = field::make_zero(new_n, f.surface, f.align);
  g.thickness = f.thickness;
  auto map_index = [&](double target) {
    double pos = (target + 1) / f.h() - f.offset();
    long idx = std::lround(pos);
    if (std::abs(pos - idx) > 1e-9 || idx < 0 || idx >= f.n)
      throw std::invalid_argument("rescale_density: grids misaligned");
    return static_cast<int>(idx);
  };
  for (int i = 0; i < new_n; ++i) {
    int fi = map_index(c.x + d * g.xi(i));
    for (int j = 0; j < new_n; ++j)
      g.at(i, j) = f.at(fi, map_index(c.y + d * g.eta(j)));
  }
  return g;
}

namespace {

void require_support_inside(const FreqDensity& f, const geom::Square& tau,
                            const char* what) {
  IndexBox sb = engine::support_box(f);
  if (sb.empty()) return;
  IndexBox tb = index_box(f, tau);
  if (sb.i0 < tb.i0 || sb.i1 > tb.i1 || sb.j0 < tb.j0 || sb.j1 > tb.j1)
    throw std::invalid_argument(std::string(what) +
                                ": density not supported in its square");
}

// sum over R^{-1/2}-caps of ||Ef_cap||_4^2 (exact sheared per-cap norms)
double cap_l4_sq_sum(const FreqDensity& f, const geom::Square& tau, double R) {
  auto caps = geom::partition(tau, 1.0 / std::sqrt(R));
  std::vector<IndexBox> boxes;
  boxes.reserve(caps.size());
  for (const auto& cap : caps) {
    IndexBox b = index_box(f, cap);
    if (!b.empty()) boxes.push_back(b);
  }
  std::vector<double> vals(boxes.size(), 0.0);
  parallel_for(static_cast<int>(boxes.size()), [&](int i) {
    vals[i] = sq(engine::localized_lp(f, boxes[i], R, 4));
  });
  KahanSum s;
  for (double v : vals) s.add(v);
  return s.value();
}

bool in_ball_union(const field::BallUnion& balls, double px, double py,
                   double x3, double period) {
  for (const Vec3& c : balls.centers) {
    double dz = x3 - c.z;
    if (std::abs(dz) > balls.radius) continue;
    double dx = engine::torus_delta(px - c.x, period);
    double dy = engine::torus_delta(py - c.y, period);
    if (dx * dx + dy * dy + dz * dz <= sq(balls.radius)) return true;
  }
  return false;
}

}  // namespace

RatioReport bilinear_l2_ratio(const FreqDensity& f1, const FreqDensity& f2,
                              const geom::Square& tau1, const geom::Square& tau2,
                              double R, const geom::Band& band) {
  if (!geom::is_transverse(tau1, tau2, band))
    throw std::invalid_argument("bilinear_l2_ratio: squares not transverse");
  require_support_inside(f1, tau1, "bilinear_l2_ratio");
  require_support_inside(f2, tau2, "bilinear_l2_ratio");
  RatioReport rep;
  rep.scenario = "bilinear";
  rep.R = R;
  rep.set("delta", tau1.side);
  rep.lhs = engine::bilinear_l2_integral(f1, f2, R);
  rep.rhs = cap_l4_sq_sum(f1, tau1, R) * cap_l4_sq_sum(f2, tau2, R);
  rep.finish();
  return rep;
}

RatioReport refined_ratio(const wavepacket::WavePacketDecomp& d1,
                          const wavepacket::WavePacketDecomp& d2,
                          const std::vector<wavepacket::Tube>& tubes1,
                          const std::vector<wavepacket::Tube>& tubes2,
                          const field::BallUnion& X, double R) {
  X.require_disjoint();
  double period = d1.lattice().period();
  int M1 = 0, M2 = 0;
  for (const Vec3& c : X.centers) {
    wavepacket::Ball q{c, X.radius};
    M1 = std::max(M1, wavepacket::tube_ball_multiplicity(tubes1, q, period));
    M2 = std::max(M2, wavepacket::tube_ball_multiplicity(tubes2, q, period));
  }
  RatioReport rep;
  rep.scenario = "refined";
  rep.R = R;
  rep.set("M1", M1);
  rep.set("M2", M2);
  engine::PairIntegralOpts opts;
  opts.mask = &X;
  rep.lhs = engine::bilinear_l2_integral(d1.parent(), d2.parent(), R, opts);
  auto packet_l4_quads = [&](const wavepacket::WavePacketDecomp& d,
                             const std::vector<wavepacket::Tube>& tubes) {
    std::vector<double> vals(tubes.size(), 0.0);
    parallel_for(static_cast<int>(tubes.size()), [&](int i) {
      FreqDensity p = d.packet(tubes[i].block, tubes[i].vi, tubes[i].vj);
      IndexBox b = engine::support_box(p, 1e-300);
      vals[i] = std::pow(engine::localized_lp(p, b, R, 4), 4.0);
    });
    KahanSum s;
    for (double v : vals) s.add(v);
    return s.value();
  };
  double q1 = packet_l4_quads(d1, tubes1), q2 = packet_l4_quads(d2, tubes2);
  rep.rhs = std::sqrt(static_cast<double>(M1) * M2) * std::sqrt(q1 * q2);
  rep.finish();
  return rep;
}

RatioReport linear_dyadic_ratio(const FreqDensity& f, double R) {
  RatioReport rep;
  rep.scenario = "linear_dyadic";
  rep.R = R;
  rep.lhs = std::pow(engine::power_integral(f, R, 4), 0.25);

  auto rect_box = [&](const geom::DyadicRect& rect) {
    IndexBox b{f.n, -1, f.n, -1};
    double x0 = rect.x0(), x1 = rect.x0() + rect.side1();
    double y0 = rect.y0(), y1 = rect.y0() + rect.side2();
    // grid positions are affine in the index; solve for the index range
    double h = f.h(), off = f.offset();
    int i0 = static_cast<int>(std::ceil((x0 + 1) / h - off - 1e-12));
    int i1 = static_cast<int>(std::floor((x1 + 1) / h - off - 1e-12));
    if (f.xi(i1) >= x1 - 1e-15) --i1;
    int j0 = static_cast<int>(std::ceil((y0 + 1) / h - off - 1e-12));
    int j1 = static_cast<int>(std::floor((y1 + 1) / h - off - 1e-12));
    if (f.eta(j1) >= y1 - 1e-15) --j1;
    b = {std::max(0, i0), std::min(f.n - 1, i1), std::max(0, j0),
         std::min(f.n - 1, j1)};
    if (b.i1 < b.i0 || b.j1 < b.j0) return IndexBox{0, -1, 0, -1};
    return b;
  };

  auto cover = geom::dyadic_cover(R);
  std::vector<IndexBox> boxes;
  boxes.reserve(cover.size());
  for (const auto& rect : cover) {
    IndexBox b = rect_box(rect);
    if (!b.empty()) boxes.push_back(b);
  }
  std::vector<double> vals(boxes.size(), 0.0);
  parallel_for(static_cast<int>(boxes.size()), [&](int i) {
    vals[i] = sq(engine::localized_lp(f, boxes[i], R, 4));
  });
  KahanSum s;
  for (double v : vals) s.add(v);
  rep.rhs = std::sqrt(s.value());

  geom::Square whole{{0, 0}, 2};
  rep.set("rhs_square", std::sqrt(cap_l4_sq_sum(f, whole, R)));
  rep.set("cover_size", static_cast<double>(cover.size()));
  rep.finish();
  return rep;
}

RatioReport bilinear_restriction_2d(const FreqDensity& f1, const FreqDensity& f2,
                                    Vec2 normal1, Vec2 normal2, double delta,
                                    double min_sin) {
  double cross = std::abs(normal1.x * normal2.y - normal1.y * normal2.x);
  double denom = normal1.norm() * normal2.norm();
  if (denom == 0 || cross / denom < min_sin)
    throw std::invalid_argument("bilinear_restriction_2d: normals not transverse");
  IndexBox b1 = engine::support_box(f1), b2 = engine::support_box(f2);
  RatioReport rep;
  rep.scenario = "restriction2d";
  rep.R = 1.0 / delta;
  rep.set("delta", delta);
  if (b1.empty() || b2.empty()) {
    rep.finish();
    return rep;
  }
  int spread = std::max(b1.wx() + b2.wx(), b1.wy() + b2.wy());
  int M = std::min(2 * f1.n, next_pow2(spread + 8));
  double cell = sq(engine::coarse_spacing(f1, M));
  std::vector<cd> F1(static_cast<size_t>(M) * M), F2(F1.size());
  engine::folded_slice(f1, b1, 0, M, F1.data());
  engine::folded_slice(f2, b2, 0, M, F2.data());
  KahanSum lhs;
  for (size_t i = 0; i < F1.size(); ++i) lhs.add(std::norm(F1[i] * F2[i]));
  rep.lhs = lhs.value() * cell;

  // partition supports into delta-cells, pairwise folded products
  auto pieces = [&](const FreqDensity& f, IndexBox box) {
    std::map<std::pair<int, int>, IndexBox> cells;
    for (int i = box.i0; i <= box.i1; ++i)
      for (int j = box.j0; j <= box.j1; ++j) {
        if (f.at(i, j) == cd{0, 0}) continue;
        std::pair<int, int> key{
            static_cast<int>(std::floor((f.xi(i) + 1) / delta)),
            static_cast<int>(std::floor((f.eta(j) + 1) / delta))};
        auto it = cells.find(key);
        if (it == cells.end())
          cells.emplace(key, IndexBox{i, i, j, j});
        else {
          it->second.i0 = std::min(it->second.i0, i);
          it->second.i1 = std::max(it->second.i1, i);
          it->second.j0 = std::min(it->second.j0, j);
          it->second.j1 = std::max(it->second.j1, j);
        }
      }
    std::vector<IndexBox> out;
    out.reserve(cells.size());
    for (auto& kv : cells) out.push_back(kv.second);
    return out;
  };
  auto cells1 = pieces(f1, b1), cells2 = pieces(f2, b2);
  std::vector<double> pair_vals(cells1.size() * cells2.size(), 0.0);
  parallel_for(static_cast<int>(pair_vals.size()), [&](int idx) {
    const IndexBox& s1 = cells1[idx / cells2.size()];
    const IndexBox& s2 = cells2[idx % cells2.size()];
    int spread_p = std::max(s1.wx() + s2.wx(), s1.wy() + s2.wy());
    int Mp = next_pow2(spread_p + 8);
    std::vector<cd> P1(static_cast<size_t>(Mp) * Mp), P2(P1.size());
    engine::folded_slice(f1, s1, 0, Mp, P1.data());
    engine::folded_slice(f2, s2, 0, Mp, P2.data());
    KahanSum s;
    for (size_t i = 0; i < P1.size(); ++i) s.add(std::norm(P1[i] * P2[i]));
    pair_vals[idx] = s.value() * sq(engine::coarse_spacing(f1, Mp));
  });
  KahanSum rhs;
  for (double v : pair_vals) rhs.add(v);
  rep.rhs = rhs.value();
  rep.set("pieces1", static_cast<double>(cells1.size()));
  rep.set("pieces2", static_cast<double>(cells2.size()));
  rep.finish();
  return rep;
}

namespace {

// Rotated-grid pieces of the samples of sq: bin by coordinates along
// axis/perp with the given widths. Pieces are materialized densities.
std::vector<FreqDensity> rotated_pieces(const FreqDensity& f,
                                        const geom::Square& sq, Vec2 axis,
                                        double width_short, double width_long) {
  Vec2 perp{-axis.y, axis.x};
  std::map<std::pair<int, int>, FreqDensity> bins;
  IndexBox box = index_box(f, sq);
  // offset so the square's projection starts at bin zero; a width at least
  // the extent then yields a single bin
  double ext_s = sq.side * (std::abs(perp.x) + std::abs(perp.y));
  double ext_l = sq.side * (std::abs(axis.x) + std::abs(axis.y));
  for (int i = box.i0; i <= box.i1; ++i)
    for (int j = box.j0; j <= box.j1; ++j) {
      cd v = f.at(i, j);
      if (v == cd{0, 0}) continue;
      Vec2 d = Vec2{f.xi(i), f.eta(j)} - sq.center;
      std::pair<int, int> key{
          static_cast<int>(std::floor((d.dot(perp) + ext_s / 2) / width_short)),
          static_cast<int>(std::floor((d.dot(axis) + ext_l / 2) / width_long))};
      auto it = bins.find(key);
      if (it == bins.end())
        it = bins.emplace(key, field::make_zero(f.n, f.surface, f.align)).first;
      it->second.at(i, j) = v;
    }
  std::vector<FreqDensity> out;
  out.reserve(bins.size());
  for (auto& kv : bins) out.push_back(std::move(kv.second));
  return out;
}

}  // namespace

std::vector<FreqDensity> strip_pieces(const FreqDensity& f, const geom::Square& sq,
                                      Vec2 axis, int count) {
  double extent = sq.side * (std::abs(axis.x) + std::abs(axis.y));
  return rotated_pieces(f, sq, Vec2{-axis.y, axis.x}, extent, extent / count);
}

SquareFnResult square_function_ratio(const FreqDensity& f1, const FreqDensity& f2,
                                     const geom::Square& a1, const geom::Square& a2,
                                     double R, const SquareFnParams& params) {
  double r = a1.side;
  Vec2 axis = geom::canonical_rect_axis(a1.center, a2.center);
  double width_short, width_long;
  if (params.mode == SquareFnMode::planes) {
    if (!geom::is_transverse(a1, a2))
      throw std::invalid_argument("square_function_ratio: pair not transverse");
    width_short = 1.0 / std::sqrt(R);
    width_long = std::pow(R, -0.25);
  } else {
    if (!geom::is_general_position(a1, a2))
      throw std::invalid_argument(
          "square_function_ratio: pair not in general position");
    double d = (a2.center - a1.center).norm();
    if (d * std::sqrt(R) * r * params.K2 < params.threshold)
      throw std::invalid_argument(
          "square_function_ratio: scale condition d*sqrt(R)*r*K2 fails");
    width_short = r / params.K2;
    width_long = 2 * r;  // single column along the axis
  }
  auto pieces1 = rotated_pieces(f1, a1, axis, width_short, width_long);
  auto pieces2 = rotated_pieces(f2, a2, axis, width_short, width_long);
  SquareFnResult res;
  res.forward.scenario = "squarefn";
  res.forward.R = R;
  res.forward.set("pieces1", static_cast<double>(pieces1.size()));
  res.forward.set("pieces2", static_cast<double>(pieces2.size()));
  if (pieces1.empty() || pieces2.empty()) {
    res.forward.finish();
    return res;
  }
  std::vector<const FreqDensity*> comps;
  for (const auto& p : pieces1) comps.push_back(&p);
  for (const auto& p : pieces2) comps.push_back(&p);
  engine::SweepSpec spec = engine::plan_sweep(comps, R);
  const int M = spec.M;
  const double cell = sq(engine::coarse_spacing(f1, M));
  const double spacing = engine::coarse_spacing(f1, M);
  const double period = engine::torus_period(f1);
  const size_t n1 = pieces1.size();
  std::vector<double> lhs_part(spec.slices.count, 0.0);
  std::vector<double> rhs_part(spec.slices.count, 0.0);
  engine::multi_sweep(comps, spec, [&](int k, double x3, double w,
                                       const std::vector<const cd*>& fields) {
    KahanSum lhs, rhs;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        size_t idx = static_cast<size_t>(i) * M + j;
        if (params.Q &&
            !in_ball_union(*params.Q, i * spacing, j * spacing, x3, period))
          continue;
        cd F1{0, 0}, F2{0, 0};
        double S1 = 0, S2 = 0;
        for (size_t c = 0; c < n1; ++c) {
          F1 += fields[c][idx];
          S1 += std::norm(fields[c][idx]);
        }
        for (size_t c = n1; c < fields.size(); ++c) {
          F2 += fields[c][idx];
          S2 += std::norm(fields[c][idx]);
        }
        lhs.add(std::norm(F1 * F2));
        rhs.add(S1 * S2);
      }
    lhs_part[k] = lhs.value() * cell * w;
    rhs_part[k] = rhs.value() * cell * w;
  });
  KahanSum lhs, rhs;
  for (double v : lhs_part) lhs.add(v);
  for (double v : rhs_part) rhs.add(v);
  res.forward.lhs = lhs.value();
  res.forward.rhs = rhs.value();
  res.forward.finish();
  res.reverse = res.forward.lhs > 0 ? res.forward.rhs / res.forward.lhs : 0;
  return res;
}

field::SpatialField g_function(const FreqDensity& f, const geom::PlaneRect& rect,
                               int K1, double R, const field::GridSpec& grid,
                               PairRule rule) {
  if (K1 < 3)
    throw std::invalid_argument("g_function: need K1 >= 3 strips");
  rect.validate();
  // bin the rectangle's samples along its long axis into K1 strips
  std::vector<FreqDensity> strips(K1);
  std::vector<bool> live(K1, false);
  for (int s = 0; s < K1; ++s)
    strips[s] = field::make_zero(f.n, f.surface, f.align);
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) {
      cd v = f.at(i, j);
      if (v == cd{0, 0}) continue;
      Vec2 p{f.xi(i), f.eta(j)};
      if (!rect.contains(p)) continue;
      double t = (p - rect.center).dot(rect.axis);  // in [-half_long, half_long]
      int s = std::min(K1 - 1, static_cast<int>((t + rect.half_long) /
                                                (2 * rect.half_long / K1)));
      strips[s].at(i, j) = v;
      live[s] = true;
    }
  std::vector<field::SpatialField> fields(K1);
  for (int s = 0; s < K1; ++s)
    if (live[s]) fields[s] = field::extend(strips[s], R, grid);
  field::SpatialField out;
  out.grid = grid;
  out.R = R;
  out.a.assign(static_cast<size_t>(grid.dims[0]) * grid.dims[1] * grid.dims[2],
               cd{0, 0});
  for (size_t idx = 0; idx < out.a.size(); ++idx) {
    double sum = 0;
    for (int s = 0; s < K1; ++s) {
      if (!live[s]) continue;
      int lo = s + 2;
      for (int t = lo; t < K1; ++t) {
        if (!live[t]) continue;
        if (rule == PairRule::almost_adjacent && t != s + 2) continue;
        sum += std::abs(fields[s].a[idx] * fields[t].a[idx]);
      }
    }
    out.a[idx] = std::sqrt(sum);
  }
  return out;
}

NarrowBroadResult classify_narrow_broad(const FreqDensity& f1,
                                        const FreqDensity& f2,
                                        const geom::Square& a1,
                                        const geom::Square& a2,
                                        const field::BallUnion& Q, double R,
                                        int K1, double K2, double threshold,
                                        double broad_factor) {
  NarrowBroadResult out;
  double r = a1.side;
  double d = (a2.center - a1.center).norm();
  if (!geom::is_general_position(a1, a2) ||
      d * std::sqrt(R) * r * K2 < threshold || K1 < 3)
    return out;  // unlabeled
  Vec2 axis = geom::canonical_rect_axis(a1.center, a2.center);

  // beta pieces: axis-parallel K1 x K1 refinement of each side
  auto beta_pieces = [&](const FreqDensity& f, const geom::Square& a) {
    std::vector<FreqDensity> out_p;
    for (const auto& piece : geom::partition(a, a.side / K1)) {
      FreqDensity p = field::restrict_freq(f, piece, field::RestrictMode::sharp);
      if (!engine::support_box(p).empty()) out_p.push_back(std::move(p));
    }
    return out_p;
  };
  auto b1 = beta_pieces(f1, a1), b2 = beta_pieces(f2, a2);

  // strip pieces: (r/K2, r)-strips along the canonical axis, cut into K1
  // cells lengthwise; g pairs live inside each strip
  auto strip_cells = [&](const FreqDensity& f, const geom::Square& a) {
    Vec2 perp{-axis.y, axis.x};
    std::map<int, std::map<int, FreqDensity>> strips;
    IndexBox box = index_box(f, a);
    double extent = a.side * (std::abs(axis.x) + std::abs(axis.y));
    double cell_len = extent / K1;
    for (int i = box.i0; i <= box.i1; ++i)
      for (int j = box.j0; j <= box.j1; ++j) {
        cd v = f.at(i, j);
        if (v == cd{0, 0}) continue;
        Vec2 dd = Vec2{f.xi(i), f.eta(j)} - a.center;
        int w = static_cast<int>(std::floor(dd.dot(perp) / (r / K2)));
        int l = std::max(
            0, std::min(K1 - 1, static_cast<int>(std::floor(
                                    (dd.dot(axis) + extent / 2) / cell_len))));
        auto& strip = strips[w];
        auto it = strip.find(l);
        if (it == strip.end())
          it = strip.emplace(l, field::make_zero(f.n, f.surface, f.align)).first;
        it->second.at(i, j) = v;
      }
    return strips;
  };
  auto s1 = strip_cells(f1, a1), s2 = strip_cells(f2, a2);

  // flatten components for the common sweep
  std::vector<const FreqDensity*> comps;
  for (const auto& p : b1) comps.push_back(&p);
  for (const auto& p : b2) comps.push_back(&p);
  struct StripRef {
    int side;
    std::vector<std::pair<int, int>> cells;  // (cell index, comp index)
  };
  std::vector<StripRef> strip_refs;
  for (int side = 0; side < 2; ++side) {
    auto& strips = side == 0 ? s1 : s2;
    for (auto& [w, cells] : strips) {
      StripRef ref;
      ref.side = side;
      for (auto& [l, dens] : cells) {
        ref.cells.emplace_back(l, static_cast<int>(comps.size()));
        comps.push_back(&dens);
      }
      strip_refs.push_back(std::move(ref));
    }
  }

  engine::SweepSpec spec = engine::plan_sweep(comps, R);
  const int M = spec.M;
  const double cell = sq(engine::coarse_spacing(f1, M));
  const double spacing = engine::coarse_spacing(f1, M);
  const double period = engine::torus_period(f1);
  const size_t nb1 = b1.size(), nb2 = b2.size();
  std::vector<double> narrow_part(spec.slices.count, 0.0);
  std::vector<double> broad_part(spec.slices.count, 0.0);
  engine::multi_sweep(comps, spec, [&](int k, double x3, double w,
                                       const std::vector<const cd*>& fields) {
    KahanSum narrow, broad;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        size_t idx = static_cast<size_t>(i) * M + j;
        if (!in_ball_union(Q, i * spacing, j * spacing, x3, period)) continue;
        double S1 = 0, S2 = 0;
        for (size_t c = 0; c < nb1; ++c) S1 += std::norm(fields[c][idx]);
        for (size_t c = nb1; c < nb1 + nb2; ++c) S2 += std::norm(fields[c][idx]);
        narrow.add(S1 * S2);
        double G1 = 0, G2 = 0;  // sum over strips of g_strip^2
        for (const auto& ref : strip_refs) {
          double g2 = 0;
          for (size_t a = 0; a < ref.cells.size(); ++a)
            for (size_t b = a + 1; b < ref.cells.size(); ++b) {
              if (ref.cells[b].first - ref.cells[a].first != 2) continue;
              g2 += std::abs(fields[ref.cells[a].second][idx] *
                             fields[ref.cells[b].second][idx]);
            }
          (ref.side == 0 ? G1 : G2) += g2;
        }
        broad.add(G1 * G2);
      }
    narrow_part[k] = narrow.value() * cell * w;
    broad_part[k] = broad.value() * cell * w;
  });
  KahanSum narrow, broad;
  for (double v : narrow_part) narrow.add(v);
  for (double v : broad_part) broad.add(v);
  out.narrow_term = narrow.value();
  out.broad_term = broad_factor * broad.value();
  out.label =
      out.narrow_term >= out.broad_term ? PairLabel::narrow : PairLabel::broad;
  return out;
}

}  // namespace hypdec::decouple
