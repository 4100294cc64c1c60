#include "hypdec/scenarios.hpp"

#include <algorithm>
#include <filesystem>
#include <map>

#include "hypdec/acceptance.hpp"
#include "hypdec/broadnorm.hpp"
#include "hypdec/decouple.hpp"
#include "hypdec/incidence.hpp"
#include "hypdec/parallel.hpp"
#include "hypdec/restriction.hpp"
#include "hypdec/rng.hpp"
#include "hypdec/wavepacket.hpp"

namespace hypdec::scenarios {

using config::ExperimentConfig;
using decouple::EnsembleKind;
using field::FreqDensity;
using report::RatioReport;

namespace {

int auto_grid(double R, int override_n) {
  return override_n > 0 ? override_n
                        : static_cast<int>(std::lround(4 * std::sqrt(R)));
}

std::vector<EnsembleKind> ensembles_for(const ExperimentConfig& cfg) {
  if (cfg.ensemble == "all")
    return {EnsembleKind::random_phase, EnsembleKind::focusing,
            EnsembleKind::line_concentrated, EnsembleKind::bush};
  return {decouple::parse_ensemble(cfg.ensemble)};
}

int default_trials(EnsembleKind k, int override_trials) {
  if (override_trials > 0) return override_trials;
  switch (k) {
    case EnsembleKind::random_phase: return 16;
    case EnsembleKind::bush: return 6;
    default: return 1;
  }
}

double delta_at(const ExperimentConfig& cfg, double R) {
  // negative delta encodes a power of R (e.g. -0.25 for the base-case scale)
  return cfg.delta < 0 ? std::pow(R, cfg.delta) : cfg.delta;
}

std::pair<geom::Square, geom::Square> diagonal_pair(double delta) {
  return {geom::Square{{-0.5, -0.5}, delta}, geom::Square{{0.5, 0.5}, delta}};
}

// per-group exponent fits from max ratios; records each and keeps the worst
double fill_fits(report::Summary& summary, const std::vector<RatioReport>& rows,
                 const std::vector<double>& scales,
                 const std::vector<std::string>& groups) {
  double worst = -1e300;
  bool any = false;
  for (const auto& g : groups) {
    std::vector<double> xs, ys;
    for (double R : scales) {
      double mx = 0;
      for (const auto& r : rows)
        if (r.R == R && r.ensemble == g && !r.degenerate)
          mx = std::max(mx, r.ratio);
      if (mx > 0) {
        xs.push_back(R);
        ys.push_back(mx);
      }
    }
    if (xs.size() >= 2) {
      double slope = report::fit_log2_slope(xs, ys);
      summary.extra.emplace_back("exponent_" + g, slope);
      worst = std::max(worst, slope);
      any = true;
    }
  }
  if (any) {
    summary.exponent = worst;
    summary.exponent_valid = true;
  }
  return worst;
}

void run_bilinear(const ExperimentConfig& cfg, RunResult& out) {
  std::vector<std::string> groups;
  for (double R : cfg.scales) {
    double delta = delta_at(cfg, R);
    auto [tau1, tau2] = diagonal_pair(delta);
    int n = auto_grid(R, cfg.grid_n);
    for (EnsembleKind kind : ensembles_for(cfg)) {
      std::string name = decouple::ensemble_name(kind);
      if (std::find(groups.begin(), groups.end(), name) == groups.end())
        groups.push_back(name);
      int trials = default_trials(kind, cfg.trials);
      std::vector<RatioReport> batch(trials);
      parallel_for(trials, [&](int t) {
        CounterRng rng1(cfg.seed, "bilinear/1", static_cast<uint64_t>(R), t);
        CounterRng rng2(cfg.seed, "bilinear/2", static_cast<uint64_t>(R), t);
        FreqDensity f1 = decouple::generate(kind, R, tau1, n, rng1);
        FreqDensity f2 = decouple::generate(kind, R, tau2, n, rng2);
        RatioReport rep =
            decouple::bilinear_l2_ratio(f1, f2, tau1, tau2, R, cfg.band);
        rep.ensemble = name;
        rep.seed = cfg.seed;
        rep.trial = t;
        batch[t] = std::move(rep);
      });
      for (auto& r : batch) out.rows.push_back(std::move(r));
    }
  }
  fill_fits(out.summary, out.rows, cfg.scales, groups);
}

void run_refined(const ExperimentConfig& cfg, RunResult& out) {
  std::vector<std::string> groups{"bush", "sparse"};
  if (cfg.ensemble != "all" && cfg.ensemble != "bush" && cfg.ensemble != "sparse")
    throw std::invalid_argument("refined: ensemble must be bush or sparse");
  if (cfg.ensemble != "all") groups = {cfg.ensemble};
  for (double R : cfg.scales) {
    int n = cfg.grid_n > 0 ? cfg.grid_n
                           : 8 * static_cast<int>(std::lround(std::sqrt(R)));
    double root = std::sqrt(R);
    for (const std::string& kind : groups) {
      int trials = cfg.trials > 0 ? cfg.trials : 4;
      std::vector<RatioReport> batch(trials);
      parallel_for(trials, [&](int t) {
        CounterRng rng(cfg.seed, "refined/" + kind, static_cast<uint64_t>(R), t);
        geom::Square tau1{{-0.5, -0.5}, 0.5}, tau2{{0.5, 0.5}, 0.5};
        auto build_side = [&](const geom::Square& tau) {
          // random-sign density on the square; keep packets with translation
          // cell (0,0), so every kept tube passes through the origin
          FreqDensity base = field::make_zero(n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              if (tau.contains({base.xi(i), base.eta(j)}))
                base.at(i, j) = rng.next_sign();
          auto d0 = wavepacket::WavePacketDecomp::build(base, R);
          FreqDensity f = field::make_zero(n);
          int kept = 0;
          double band = 2.0 / root;  // caps along the diagonal
          for (int b = 0; b < static_cast<int>(d0.blocks().size()); ++b) {
            const auto& blk = d0.blocks()[b];
            if (blk.l2sq <= 0 || !tau.contains(blk.center)) continue;
            if (kind == "bush") {
              double off = (blk.center - tau.center)
                               .dot({std::sqrt(0.5), -std::sqrt(0.5)});
              if (std::abs(off) > band) continue;
            } else if (kept >= 1) {
              break;
            }
            FreqDensity p = d0.packet(b, 0, 0);
            for (size_t idx = 0; idx < f.a.size(); ++idx) f.a[idx] += p.a[idx];
            ++kept;
          }
          return f;
        };
        FreqDensity f1 = build_side(tau1), f2 = build_side(tau2);
        auto d1 = wavepacket::WavePacketDecomp::build(f1, R);
        auto d2 = wavepacket::WavePacketDecomp::build(f2, R);
        auto tubes1 = d1.significant_tubes(1e-5);
        auto tubes2 = d2.significant_tubes(1e-5);
        field::BallUnion X;
        X.radius = root;
        int balls = kind == "bush" ? 5 : 1;
        for (int b = 0; b < balls; ++b)
          X.centers.push_back({0, 0, b * 2.2 * root});
        RatioReport rep = decouple::refined_ratio(d1, d2, tubes1, tubes2, X, R);
        rep.ensemble = kind;
        rep.seed = cfg.seed;
        rep.trial = t;
        rep.set("tubes1", static_cast<double>(tubes1.size()));
        rep.set("tubes2", static_cast<double>(tubes2.size()));
        batch[t] = std::move(rep);
      });
      for (auto& r : batch) out.rows.push_back(std::move(r));
    }
  }
  fill_fits(out.summary, out.rows, cfg.scales, groups);
}

void run_linear_dyadic(const ExperimentConfig& cfg, RunResult& out) {
  std::vector<std::string> groups;
  geom::Square whole{{0, 0}, 2};
  for (double R : cfg.scales) {
    int n = auto_grid(R, cfg.grid_n);
    std::vector<EnsembleKind> kinds = ensembles_for(cfg);
    if (cfg.ensemble == "all")
      kinds = {EnsembleKind::line_concentrated, EnsembleKind::focusing,
               EnsembleKind::random_phase};
    for (EnsembleKind kind : kinds) {
      std::string name = decouple::ensemble_name(kind);
      if (std::find(groups.begin(), groups.end(), name) == groups.end())
        groups.push_back(name);
      int trials = kind == EnsembleKind::random_phase
                       ? std::max(1, default_trials(kind, cfg.trials) / 8)
                       : 1;
      for (int t = 0; t < trials; ++t) {
        CounterRng rng(cfg.seed, "linear-dyadic", static_cast<uint64_t>(R), t);
        FreqDensity f = decouple::generate(kind, R, whole, n, rng);
        RatioReport rep = decouple::linear_dyadic_ratio(f, R);
        rep.ensemble = name;
        rep.seed = cfg.seed;
        rep.trial = t;
        out.rows.push_back(std::move(rep));
      }
    }
  }
  fill_fits(out.summary, out.rows, cfg.scales, groups);
  std::vector<double> xs, ys;
  for (double R : cfg.scales)
    for (const auto& r : out.rows)
      if (r.R == R && r.ensemble == "line_concentrated") {
        double rs = r.get("rhs_square");
        if (rs > 0) {
          xs.push_back(R);
          ys.push_back(r.lhs / rs);
        }
      }
  if (xs.size() >= 2)
    out.summary.extra.emplace_back("exponent_square_line",
                                   report::fit_log2_slope(xs, ys));
}

void run_restriction2d(const ExperimentConfig& cfg, RunResult& out) {
  for (double R : cfg.scales) {
    double delta = 1.0 / R;
    int n = std::min(2048, static_cast<int>(std::lround(4.0 / delta)));
    int trials = cfg.trials > 0 ? cfg.trials : 50;
    std::vector<RatioReport> batch(trials);
    parallel_for(
        trials,
        [&](int t) {
          CounterRng rng(cfg.seed, "restriction2d", static_cast<uint64_t>(R), t);
          double a1 = rng.next_real(0, kPi);
          double gap = rng.next_real(kPi / 5, kPi / 2);
          Vec2 n1{std::cos(a1), std::sin(a1)};
          Vec2 n2{std::cos(a1 + gap), std::sin(a1 + gap)};
          auto fill = [&](Vec2 normal, Vec2 center) {
            Vec2 tangent{-normal.y, normal.x};
            FreqDensity f = field::make_zero(n);
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) {
                Vec2 d = Vec2{f.xi(i), f.eta(j)} - center;
                if (std::abs(d.dot(normal)) <= delta &&
                    std::abs(d.dot(tangent)) <= 0.25)
                  f.at(i, j) = rng.next_phase();
              }
            return f;
          };
          FreqDensity f1 =
              fill(n1, {rng.next_real(-0.4, 0.0), rng.next_real(-0.4, 0.0)});
          FreqDensity f2 =
              fill(n2, {rng.next_real(0.0, 0.4), rng.next_real(0.0, 0.4)});
          RatioReport rep = decouple::bilinear_restriction_2d(
              f1, f2, n1, n2, delta, std::sin(kPi / 6));
          rep.ensemble = "segments";
          rep.seed = cfg.seed;
          rep.trial = t;
          batch[t] = std::move(rep);
        },
        2);  // two full-resolution planes per worker; cap the memory
    for (auto& r : batch) out.rows.push_back(std::move(r));
  }
  fill_fits(out.summary, out.rows, cfg.scales, {"segments"});
}

void run_squarefn(const ExperimentConfig& cfg, RunResult& out) {
  for (double R : cfg.scales) {
    int n = auto_grid(R, cfg.grid_n);
    int trials = cfg.trials > 0 ? cfg.trials : 8;
    double r = 0.25;
    geom::Square a1{{-0.25, -0.25}, r}, a2{{0.25, 0.25}, r};
    std::vector<RatioReport> batch(trials);
    parallel_for(trials, [&](int t) {
      CounterRng rng1(cfg.seed, "squarefn/1", static_cast<uint64_t>(R), t);
      CounterRng rng2(cfg.seed, "squarefn/2", static_cast<uint64_t>(R), t);
      FreqDensity f1 =
          decouple::generate(EnsembleKind::random_phase, R, a1, n, rng1);
      FreqDensity f2 =
          decouple::generate(EnsembleKind::random_phase, R, a2, n, rng2);
      decouple::SquareFnParams params;
      params.mode = decouple::SquareFnMode::caps_at_scale;
      params.K2 = cfg.K2;
      field::BallUnion Q{{{0, 0, 0}}, std::sqrt(R)};
      params.Q = &Q;
      auto res = decouple::square_function_ratio(f1, f2, a1, a2, R, params);
      res.forward.ensemble = "random_phase";
      res.forward.seed = cfg.seed;
      res.forward.trial = t;
      res.forward.set("reverse", res.reverse);
      batch[t] = std::move(res.forward);
    });
    for (auto& r2 : batch) out.rows.push_back(std::move(r2));
  }
  fill_fits(out.summary, out.rows, cfg.scales, {"random_phase"});
  double worst = 0;
  for (const auto& r : out.rows)
    worst = std::max({worst, r.ratio, r.get("reverse")});
  out.summary.extra.emplace_back("max_directional_ratio", worst);
  out.summary.checks.emplace_back("recoupling_bounded", worst <= 10.0);
  if (worst > 10.0) out.exit_code = 2;
}

void run_broad_value(const ExperimentConfig& cfg, RunResult& out) {
  int K = static_cast<int>(cfg.K);
  int trials = cfg.trials > 0 ? cfg.trials : 100;
  bool all_ok = true;
  for (int t = 0; t < trials; ++t) {
    CounterRng rng(cfg.seed, "broad-value", K, t);
    broadnorm::BroadInstance inst;
    inst.K = K;
    inst.A = cfg.A;
    inst.values.resize(static_cast<size_t>(K) * K);
    for (auto& v : inst.values)
      v = rng.next_unit() < 0.3 ? 0.0 : rng.next_real(0, 10);
    auto exact = broadnorm::broad_value(inst, broadnorm::BroadMethod::exact);
    auto greedy = broadnorm::broad_value(inst, broadnorm::BroadMethod::greedy);
    RatioReport rep;
    rep.scenario = "broad-value";
    rep.R = K;
    rep.seed = cfg.seed;
    rep.trial = t;
    rep.ensemble = "random";
    rep.lhs = exact.value;
    rep.rhs = greedy.value;
    rep.ratio = exact.value > 0 ? greedy.value / exact.value : 1.0;
    rep.set("A", cfg.A);
    if (greedy.value > exact.value + 1e-12) all_ok = false;
    out.rows.push_back(std::move(rep));
  }
  out.summary.checks.emplace_back("greedy_le_exact", all_ok);
  if (!all_ok) out.exit_code = 2;
}

void run_broad_decompose(const ExperimentConfig& cfg, RunResult& out) {
  geom::Square whole{{0, 0}, 2};
  double worst_constant = 0;
  for (double R : cfg.scales) {
    int n = auto_grid(R, cfg.grid_n);
    CounterRng rng(cfg.seed, "broad-decompose", static_cast<uint64_t>(R), 0);
    FreqDensity f =
        decouple::generate(EnsembleKind::random_phase, R, whole, n, rng);
    int K = static_cast<int>(cfg.K);
    const int G = 9;
    std::vector<broadnorm::DecomposeTerms> terms(G * G * G);
    parallel_for(G * G * G, [&](int idx) {
      int i = idx % G, j = (idx / G) % G, k = idx / (G * G);
      Vec3 x{(i - G / 2) * R * 0.2 / G, (j - G / 2) * R * 0.2 / G,
             (k - G / 2) * R * 0.2 / G};
      terms[idx] = broadnorm::broad_narrow_decompose(f, K, cfg.eps, x);
    });
    for (int idx = 0; idx < G * G * G; ++idx) {
      RatioReport rep;
      rep.scenario = "broad-decompose";
      rep.R = R;
      rep.seed = cfg.seed;
      rep.trial = idx;
      rep.ensemble = "random_phase";
      rep.lhs = terms[idx].field_abs;
      rep.rhs =
          terms[idx].term_cell + terms[idx].term_strip + terms[idx].term_broad;
      rep.finish();
      rep.set("dominating", terms[idx].dominating);
      rep.set("constant", terms[idx].constant);
      worst_constant = std::max(worst_constant, terms[idx].constant);
      out.rows.push_back(std::move(rep));
    }
  }
  out.summary.extra.emplace_back("max_constant", worst_constant);
  out.summary.checks.emplace_back("constant_le_100", worst_constant <= 100.0);
  if (worst_constant > 100.0) out.exit_code = 2;
}

void run_restriction(const ExperimentConfig& cfg, RunResult& out) {
  geom::Square whole{{0, 0}, 2};
  std::vector<std::string> groups;
  for (double R : cfg.scales) {
    int n = auto_grid(R, cfg.grid_n);
    for (EnsembleKind kind : ensembles_for(cfg)) {
      std::string name = decouple::ensemble_name(kind);
      if (std::find(groups.begin(), groups.end(), name) == groups.end())
        groups.push_back(name);
      int trials = std::max(1, default_trials(kind, cfg.trials) / 2);
      std::vector<RatioReport> batch(trials);
      parallel_for(trials, [&](int t) {
        CounterRng rng(cfg.seed, "restriction", static_cast<uint64_t>(R), t);
        FreqDensity f = decouple::generate(kind, R, whole, n, rng);
        RatioReport rep = restriction::restriction_ratio(f, R, cfg.p);
        rep.ensemble = name;
        rep.seed = cfg.seed;
        rep.trial = t;
        batch[t] = std::move(rep);
      });
      for (auto& r : batch) out.rows.push_back(std::move(r));
    }
  }
  fill_fits(out.summary, out.rows, cfg.scales, groups);
}

void run_broad_restriction(const ExperimentConfig& cfg, RunResult& out) {
  geom::Square whole{{0, 0}, 2};
  std::vector<std::string> groups{"focusing", "random_phase"};
  for (double R : cfg.scales) {
    int n = auto_grid(R, cfg.grid_n);
    for (const std::string& name : groups) {
      EnsembleKind kind = decouple::parse_ensemble(name);
      int trials = cfg.trials > 0
                       ? cfg.trials
                       : (kind == EnsembleKind::random_phase ? 3 : 1);
      std::vector<RatioReport> batch(trials);
      parallel_for(trials, [&](int t) {
        CounterRng rng(cfg.seed, "broad-restriction", static_cast<uint64_t>(R),
                       t);
        FreqDensity f = decouple::generate(kind, R, whole, n, rng);
        RatioReport rep = restriction::broad_restriction_ratio(
            f, R, cfg.A, static_cast<int>(cfg.K), cfg.p);
        rep.ensemble = name;
        rep.seed = cfg.seed;
        rep.trial = t;
        batch[t] = std::move(rep);
      });
      for (auto& r : batch) out.rows.push_back(std::move(r));
    }
  }
  fill_fits(out.summary, out.rows, cfg.scales, groups);
}

incidence::LineFamily make_family(const std::string& generator, double delta,
                                  int count, CounterRng& rng) {
  if (generator == "bush") return incidence::make_bush(delta, count, rng);
  if (generator == "brush") return incidence::make_brush(delta, count, rng);
  if (generator == "parallel") return incidence::make_parallel(delta, count, rng);
  if (generator == "random") return incidence::make_random(delta, count, rng);
  throw std::invalid_argument("unknown line generator: " + generator);
}

incidence::ShadingKind parse_shading(const std::string& name) {
  if (name == "full") return incidence::ShadingKind::full;
  if (name == "half") return incidence::ShadingKind::half;
  if (name == "concentrated") return incidence::ShadingKind::concentrated;
  if (name == "random_half") return incidence::ShadingKind::random_half;
  throw std::invalid_argument("unknown shading: " + name);
}

void run_incidence(const ExperimentConfig& cfg, RunResult& out,
                   const std::string& which) {
  for (double S : cfg.scales) {
    double delta = 1.0 / S;
    CounterRng rng(cfg.seed, "incidence/" + which, static_cast<uint64_t>(S), 0);
    incidence::LineFamily fam =
        make_family(cfg.generator, delta, cfg.line_count, rng);
    if (fam.lines.empty())
      throw std::invalid_argument("incidence: degenerate empty family");
    incidence::Shading y =
        make_shading(fam, parse_shading(cfg.shading), rng, cfg.eps1);
    RatioReport rep;
    rep.scenario = which;
    rep.R = S;
    rep.seed = cfg.seed;
    rep.ensemble = cfg.generator + "/" + cfg.shading;
    rep.set("lines", static_cast<double>(fam.lines.size()));
    if (which == "twoends") {
      auto r = incidence::two_ends_check(fam, y, cfg.eps1, cfg.eps2, cfg.CY);
      rep.lhs = r.worst_fraction;
      rep.rhs = cfg.CY * std::pow(delta, cfg.eps2);
      rep.finish();
      rep.set("lambda", r.lambda);
      rep.set("pass", r.pass ? 1 : 0);
      out.summary.checks.emplace_back(
          "twoends_" + std::to_string(static_cast<int>(S)), r.pass);
      if (!r.pass) out.exit_code = 3;
    } else if (which == "furstenberg") {
      try {
        auto r = incidence::furstenberg_ratio(fam, y, cfg.eps, cfg.eps1,
                                              cfg.eps2, cfg.CY, cfg.c_min);
        rep.lhs = r.union_vol;
        rep.rhs = std::pow(delta, cfg.eps) * r.lambda * r.sum_vol;
        rep.finish();
        rep.set("c", r.c);
        rep.set("lambda", r.lambda);
        out.summary.checks.emplace_back(
            "furstenberg_" + std::to_string(static_cast<int>(S)), r.pass);
        if (!r.pass) {
          out.exit_code = 3;
          std::filesystem::create_directories(cfg.out_dir);
          incidence::save_family(
              fam, y, cfg.out_dir + "/furstenberg_counterexample.txt");
        }
      } catch (const std::invalid_argument&) {
        rep.set("refused", 1);
        out.exit_code = 3;
      }
    } else {  // prune
      double mu = cfg.mu;
      auto te = incidence::two_ends_check(fam, y, cfg.eps1, cfg.eps2, cfg.CY);
      if (mu <= 0)
        mu = incidence::prune_mu_formula(delta, cfg.eps1,
                                         fam.direction_multiplicity(),
                                         std::max(te.lambda, 1e-6));
      auto r = incidence::prune_multiplicity(fam, y, mu);
      rep.lhs = r.removed_fraction;
      rep.rhs = std::pow(delta, cfg.eps1);
      rep.finish();
      rep.set("mu", mu);
      rep.set("kept", static_cast<double>(r.kept_voxels));
    }
    out.rows.push_back(std::move(rep));
  }
}

void run_wavepacket_verify(const ExperimentConfig& cfg, RunResult& out) {
  geom::Square whole{{0, 0}, 2};
  bool ok = true;
  for (double R : cfg.scales) {
    int n = cfg.grid_n > 0
                ? cfg.grid_n
                : 16 * static_cast<int>(std::lround(std::sqrt(R)));
    CounterRng rng(cfg.seed, "wavepacket-verify", static_cast<uint64_t>(R), 0);
    FreqDensity f =
        decouple::generate(EnsembleKind::random_phase, R, whole, n, rng);
    auto d = wavepacket::WavePacketDecomp::build(f, R);
    RatioReport rep;
    rep.scenario = "wavepacket-verify";
    rep.R = R;
    rep.seed = cfg.seed;
    rep.ensemble = "random_phase";
    double recon = d.cap_partition_residual();
    double sep = d.direction_separation();
    int overlap = d.direction_overlap();
    double mass = d.total_packet_mass() / sq(f.l2_norm());
    rep.set("reconstruction", recon);
    rep.set("separation", sep);
    rep.set("overlap", overlap);
    rep.set("mass_ratio", mass);
    rep.lhs = recon;
    rep.rhs = 1e-6;
    rep.finish();
    bool pass = recon <= 1e-6 && sep >= 0.5 / std::sqrt(R) && mass <= 4.0;
    ok = ok && pass;
    out.rows.push_back(std::move(rep));
  }
  out.summary.checks.emplace_back("wavepacket_properties", ok);
  if (!ok) out.exit_code = 2;
}

void run_verify_all(const ExperimentConfig& cfg, RunResult& out) {
  auto results = acceptance::run_all(cfg.budget_min);
  bool attempted_all = true;
  for (const auto& r : results) {
    RatioReport rep;
    rep.scenario = "verify-all";
    rep.R = r.id;
    rep.ensemble = r.name;
    rep.lhs = r.pass ? 1 : 0;
    rep.rhs = 1;
    rep.ratio = rep.lhs;
    rep.set("seconds", r.seconds);
    rep.set("attempted", r.attempted ? 1 : 0);
    out.rows.push_back(std::move(rep));
    out.summary.checks.emplace_back("criterion_" + std::to_string(r.id),
                                    r.pass);
    attempted_all = attempted_all && r.attempted;
  }
  if (!acceptance::all_passed(results) || !attempted_all) out.exit_code = 2;
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"bilinear",        "refined",     "linear-dyadic",
          "restriction2d",   "squarefn",    "broad-value",
          "broad-decompose", "restriction", "broad-restriction",
          "twoends",         "furstenberg", "prune",
          "wavepacket-verify", "verify-all"};
}

RunResult run(const ExperimentConfig& cfg) {
  cfg.validate();
  RunResult out;
  out.summary.scenario = cfg.scenario;
  const std::string& s = cfg.scenario;
  if (s == "bilinear") run_bilinear(cfg, out);
  else if (s == "refined") run_refined(cfg, out);
  else if (s == "linear-dyadic") run_linear_dyadic(cfg, out);
  else if (s == "restriction2d") run_restriction2d(cfg, out);
  else if (s == "squarefn") run_squarefn(cfg, out);
  else if (s == "broad-value") run_broad_value(cfg, out);
  else if (s == "broad-decompose") run_broad_decompose(cfg, out);
  else if (s == "restriction") run_restriction(cfg, out);
  else if (s == "broad-restriction") run_broad_restriction(cfg, out);
  else if (s == "twoends" || s == "furstenberg" || s == "prune")
    run_incidence(cfg, out, s);
  else if (s == "wavepacket-verify") run_wavepacket_verify(cfg, out);
  else if (s == "verify-all") run_verify_all(cfg, out);
  else throw std::invalid_argument("unknown scenario: " + s);

  for (auto& r : out.rows)
    if (r.scenario.empty()) r.scenario = s;
  for (const auto& r : out.rows)
    if (!std::isfinite(r.ratio) || r.ratio < 0) out.exit_code = 2;

  for (double R : cfg.scales)
    out.summary.scales.push_back(report::summarize(out.rows, R));
  std::filesystem::create_directories(cfg.out_dir);
  report::write_csv(out.rows, cfg.out_dir + "/" + s + ".csv");
  report::write_json(out.summary, cfg.out_dir + "/" + s + "_summary.json");
  if (cfg.svg)
    report::write_svg_loglog(out.summary, cfg.out_dir + "/" + s + ".svg");
  return out;
}

}  // namespace hypdec::scenarios
