#include "hypdec/config.hpp"

#include <cstdio>
#include <stdexcept>

namespace hypdec::config {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<double> parse_scales(const std::string& text) {
  std::vector<double> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(std::stod(cur));
      cur.clear();
    }
  };
  for (char c : text) {
    if (c == ',' || c == ' ')
      flush();
    else
      cur.push_back(c);
  }
  flush();
  return out;
}

void ExperimentConfig::apply(const std::string& key, const std::string& value) {
  if (key == "scenario") scenario = value;
  else if (key == "scales") scales = parse_scales(value);
  else if (key == "seed") seed = std::stoull(value);
  else if (key == "ensemble") ensemble = value;
  else if (key == "trials") trials = std::stoi(value);
  else if (key == "out") out_dir = value;
  else if (key == "svg") svg = value == "1" || value == "true";
  else if (key == "eps") eps = std::stod(value);
  else if (key == "delta") delta = std::stod(value);
  else if (key == "K") K = std::stod(value);
  else if (key == "K1") K1 = std::stod(value);
  else if (key == "K2") K2 = std::stod(value);
  else if (key == "K3") K3 = std::stod(value);
  else if (key == "A") A = std::stoi(value);
  else if (key == "p") p = std::stod(value);
  else if (key == "band_lo") band.lo = std::stod(value);
  else if (key == "band_hi") band.hi = std::stod(value);
  else if (key == "incidence_delta") incidence_delta = std::stod(value);
  else if (key == "eps1") eps1 = std::stod(value);
  else if (key == "eps2") eps2 = std::stod(value);
  else if (key == "CY") CY = std::stod(value);
  else if (key == "c_min") c_min = std::stod(value);
  else if (key == "lines") line_count = std::stoi(value);
  else if (key == "generator") generator = value;
  else if (key == "shading") shading = value;
  else if (key == "mu") mu = std::stod(value);
  else if (key == "grid_n") grid_n = std::stoi(value);
  else if (key == "budget") budget_min = std::stod(value);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

void ExperimentConfig::validate() const {
  if (scales.empty()) throw std::invalid_argument("config: empty scale list");
  double prev = 0;
  for (double R : scales) {
    if (!is_pow2(R) || R < 4)
      throw std::invalid_argument("config: scales must be powers of 2, >= 4");
    if (R <= prev)
      throw std::invalid_argument("config: scales must be ascending");
    prev = R;
  }
  if (!(band.lo > 0 && band.lo < band.hi))
    throw std::invalid_argument("config: bad band");
  if (!(eps2 < eps1 && eps1 < 1))
    throw std::invalid_argument("config: need eps2 < eps1 < 1");
}

ExperimentConfig parse_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("config: cannot open " + path);
  ExperimentConfig cfg;
  char buf[1024];
  int lineno = 0;
  while (std::fgets(buf, sizeof buf, f)) {
    ++lineno;
    std::string line = trim(buf);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section header
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::fclose(f);
      throw std::runtime_error("config: missing '=' at line " +
                               std::to_string(lineno));
    }
    try {
      cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      std::fclose(f);
      throw std::runtime_error("config: line " + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  std::fclose(f);
  return cfg;
}

}  // namespace hypdec::config
