#include "hypdec/report.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hypdec/version.hpp"

namespace hypdec::report {

void RatioReport::set(const std::string& key, double value) {
  for (auto& kv : params)
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  params.emplace_back(key, value);
}

double RatioReport::get(const std::string& key, double fallback) const {
  for (const auto& kv : params)
    if (kv.first == key) return kv.second;
  return fallback;
}

double fit_log2_slope(const std::vector<double>& x,
                      const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_log2_slope: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0) || !(y[i] > 0))
      throw std::invalid_argument("fit_log2_slope: non-positive sample");
    double lx = std::log2(x[i]), ly = std::log2(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) throw std::invalid_argument("fit_log2_slope: degenerate x");
  return (n * sxy - sx * sy) / denom;
}

ScaleSummary summarize(const std::vector<RatioReport>& rows, double R) {
  ScaleSummary s;
  s.R = R;
  double sum = 0;
  for (const auto& r : rows) {
    if (r.R != R || r.degenerate) continue;
    ++s.trials;
    sum += r.ratio;
    s.max_ratio = std::max(s.max_ratio, r.ratio);
  }
  s.mean_ratio = s.trials ? sum / s.trials : 0;
  return s;
}

void write_csv(const std::vector<RatioReport>& rows, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_csv: cannot open " + path);
  // fixed column set, then sorted extra params
  std::vector<std::string> keys;
  for (const auto& r : rows)
    for (const auto& kv : r.params)
      if (std::find(keys.begin(), keys.end(), kv.first) == keys.end())
        keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  std::fprintf(f, "scenario,R,seed,trial,ensemble,lhs,rhs,ratio,degenerate,git");
  for (const auto& k : keys) std::fprintf(f, ",%s", k.c_str());
  std::fprintf(f, "\n");
  for (const auto& r : rows) {
    std::fprintf(f, "%s,%.17g,%llu,%d,%s,%.17g,%.17g,%.17g,%d,%s",
                 r.scenario.c_str(), r.R,
                 static_cast<unsigned long long>(r.seed), r.trial,
                 r.ensemble.c_str(), r.lhs, r.rhs, r.ratio,
                 r.degenerate ? 1 : 0, kGitRevision);
    for (const auto& k : keys) std::fprintf(f, ",%.17g", r.get(k));
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

void write_json(const Summary& s, const std::string& path) {
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario;
  j["git"] = kGitRevision;
  j["exponent_valid"] = s.exponent_valid;
  if (s.exponent_valid) j["exponent"] = s.exponent;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& sc : s.scales) {
    nlohmann::ordered_json row;
    row["R"] = sc.R;
    row["trials"] = sc.trials;
    row["max_ratio"] = sc.max_ratio;
    row["mean_ratio"] = sc.mean_ratio;
    arr.push_back(row);
  }
  j["scales"] = arr;
  for (const auto& kv : s.extra) j["extra"][kv.first] = kv.second;
  for (const auto& kv : s.checks) j["checks"][kv.first] = kv.second;
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_json: cannot open " + path);
  std::string text = j.dump(2);
  std::fwrite(text.data(), 1, text.size(), f);
  std::fwrite("\n", 1, 1, f);
  std::fclose(f);
}

void write_svg_loglog(const Summary& s, const std::string& path) {
  std::vector<double> xs, ys;
  for (const auto& sc : s.scales)
    if (sc.max_ratio > 0) {
      xs.push_back(std::log2(sc.R));
      ys.push_back(std::log2(sc.max_ratio));
    }
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_svg_loglog: cannot open " + path);
  const int W = 480, H = 360, pad = 48;
  std::fprintf(f,
               "<svg xmlns='http://www.w3.org/2000/svg' width='%d' height='%d' "
               "viewBox='0 0 %d %d'>\n",
               W, H, W, H);
  std::fprintf(f, "<rect width='%d' height='%d' fill='white'/>\n", W, H);
  if (xs.size() >= 2) {
    double x0 = *std::min_element(xs.begin(), xs.end());
    double x1 = *std::max_element(xs.begin(), xs.end());
    double y0 = *std::min_element(ys.begin(), ys.end());
    double y1 = *std::max_element(ys.begin(), ys.end());
    if (y1 - y0 < 1e-9) y1 = y0 + 1;
    if (x1 - x0 < 1e-9) x1 = x0 + 1;
    auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); };
    auto py = [&](double y) { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); };
    std::fprintf(f,
                 "<line x1='%d' y1='%d' x2='%d' y2='%d' stroke='black'/>\n"
                 "<line x1='%d' y1='%d' x2='%d' y2='%d' stroke='black'/>\n",
                 pad, H - pad, W - pad, H - pad, pad, pad, pad, H - pad);
    for (size_t i = 0; i < xs.size(); ++i)
      std::fprintf(f, "<circle cx='%.1f' cy='%.1f' r='4' fill='steelblue'/>\n",
                   px(xs[i]), py(ys[i]));
    if (s.exponent_valid) {
      double ym = 0, xm = 0;
      for (size_t i = 0; i < xs.size(); ++i) xm += xs[i], ym += ys[i];
      xm /= xs.size();
      ym /= ys.size();
      auto line_y = [&](double x) { return ym + s.exponent * (x - xm); };
      std::fprintf(
          f, "<line x1='%.1f' y1='%.1f' x2='%.1f' y2='%.1f' stroke='firebrick'/>\n",
          px(x0), py(line_y(x0)), px(x1), py(line_y(x1)));
    }
    std::fprintf(f,
                 "<text x='%d' y='%d' font-size='12'>log2 R</text>\n"
                 "<text x='8' y='%d' font-size='12'>log2 max ratio</text>\n",
                 W / 2 - 20, H - 12, pad - 20);
  }
  std::fprintf(f, "<text x='%d' y='20' font-size='13'>%s</text>\n", pad,
               s.scenario.c_str());
  std::fprintf(f, "</svg>\n");
  std::fclose(f);
}

}  // namespace hypdec::report
