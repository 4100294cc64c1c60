#include "hypdec/restriction.hpp"

#include "hypdec/broadnorm.hpp"
#include "hypdec/engine.hpp"
#include "hypdec/geom.hpp"

namespace hypdec::restriction {

RatioReport restriction_ratio(const FreqDensity& f, double R, double p) {
  if (!(p > 2 && p <= 6))
    throw std::invalid_argument("restriction_ratio: need p in (2, 6]");
  RatioReport rep;
  rep.scenario = "restriction";
  rep.R = R;
  rep.set("p", p);
  rep.lhs = engine::power_integral(f, R, p);
  rep.rhs = std::pow(f.lp_norm(p), p);
  rep.finish();
  return rep;
}

RatioReport broad_restriction_ratio(const FreqDensity& f, double R, int A,
                                    int K, double p) {
  if (A < 2) throw std::invalid_argument("broad_restriction_ratio: need A >= 2");
  if (K < 2 || (K & (K - 1)) != 0)
    throw std::invalid_argument("broad_restriction_ratio: K must be a power of 2");
  RatioReport rep;
  rep.scenario = "broad_restriction";
  rep.R = R;
  rep.set("p", p);
  rep.set("A", A);
  rep.set("K", K);

  // per-cell fields on a common coarse grid
  std::vector<engine::IndexBox> boxes;
  boxes.reserve(static_cast<size_t>(K) * K);
  double side = 2.0 / K;
  for (int r = 0; r < K; ++r)
    for (int c = 0; c < K; ++c)
      boxes.push_back(engine::index_range(f, -1 + r * side, -1 + (r + 1) * side,
                                          -1 + c * side, -1 + (c + 1) * side));
  // the broad field varies on the cell scale; x3 sampling follows the
  // per-cell bandwidth rather than the full-density one
  engine::SweepSpec spec =
      engine::plan_sweep_boxes(f, boxes, R, /*band_factor=*/4.0,
                               /*max_dx3=*/2.5);
  const int M = spec.M;
  const double cell = sq(engine::coarse_spacing(f, M));
  auto method = A == 2 ? broadnorm::BroadMethod::exact
                       : broadnorm::BroadMethod::greedy;
  std::vector<double> partial(spec.slices.count, 0.0);
  engine::multi_sweep_boxes(
      f, boxes, spec,
      [&](int k, double /*x3*/, double w, const std::vector<const cd*>& fields) {
        std::vector<double> vals(fields.size());
        KahanSum s;
        for (int idx = 0; idx < M * M; ++idx) {
          for (size_t c = 0; c < fields.size(); ++c)
            vals[c] = std::abs(fields[c][idx]);
          double br = broadnorm::broad_value_raw(vals.data(), K, A, method);
          if (br > 0) s.add(std::pow(br, p));
        }
        partial[k] = s.value() * cell * w;
      });
  KahanSum lhs;
  for (double v : partial) lhs.add(v);
  rep.lhs = lhs.value();

  double sup_cap = 0;
  for (const auto& cap : geom::partition({{0, 0}, 2}, 1.0 / std::sqrt(R)))
    sup_cap = std::max(sup_cap, field::cap_avg_l2(f, cap));
  rep.set("sup_cap_avg", sup_cap);
  rep.rhs = sq(f.l2_norm()) * std::pow(sup_cap, p - 2);
  rep.finish();
  return rep;
}

}  // namespace hypdec::restriction
