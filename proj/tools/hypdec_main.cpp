#include <CLI11.hpp>
#include <cstdio>

#include "hypdec/config.hpp"
#include "hypdec/scenarios.hpp"
#include "hypdec/version.hpp"

using hypdec::config::ExperimentConfig;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string scales;
  std::string band;
  std::string out;
  std::string ensemble;
  uint64_t seed = 0;
  bool have_seed = false;
  int trials = 0;
  bool svg = false;
};

void attach_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "config file (key = value)");
  cmd->add_option("--seed", flags->seed, "base seed")
      ->each([flags](const std::string&) { flags->have_seed = true; });
  cmd->add_option("--out", flags->out, "output directory");
  cmd->add_option("--scales", flags->scales, "comma-separated scale list");
  cmd->add_option("--band", flags->band, "ratio band LO:HI");
  cmd->add_option("--ensemble", flags->ensemble, "input ensemble (or 'all')");
  cmd->add_option("--trials", flags->trials, "trials per scale and ensemble");
  cmd->add_flag("--svg", flags->svg, "emit a log-log SVG plot");
}

ExperimentConfig build_config(const CommonFlags& flags,
                              const std::string& scenario) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty())
    cfg = hypdec::config::parse_file(flags.config_path);
  cfg.scenario = scenario;
  if (flags.have_seed) cfg.seed = flags.seed;
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (!flags.scales.empty())
    cfg.scales = hypdec::config::parse_scales(flags.scales);
  if (!flags.ensemble.empty()) cfg.ensemble = flags.ensemble;
  if (flags.trials > 0) cfg.trials = flags.trials;
  if (flags.svg) cfg.svg = true;
  if (!flags.band.empty()) {
    size_t colon = flags.band.find(':');
    if (colon == std::string::npos)
      throw CLI::ValidationError("--band expects LO:HI");
    cfg.band.lo = std::stod(flags.band.substr(0, colon));
    cfg.band.hi = std::stod(flags.band.substr(colon + 1));
  }
  return cfg;
}

int run_scenario(const ExperimentConfig& cfg) {
  auto result = hypdec::scenarios::run(cfg);
  std::printf("%s: %zu rows -> %s/%s.csv", cfg.scenario.c_str(),
              result.rows.size(), cfg.out_dir.c_str(), cfg.scenario.c_str());
  if (result.summary.exponent_valid)
    std::printf("  (fitted exponent %.4f)", result.summary.exponent);
  std::printf("\n");
  for (const auto& check : result.summary.checks)
    std::printf("  check %-28s %s\n", check.first.c_str(),
                check.second ? "pass" : "FAIL");
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypdec: decoupling and restriction experiments for the "
               "saddle surface"};
  app.set_version_flag("--version", hypdec::kGitRevision);
  app.require_subcommand(1);

  std::map<const CLI::App*, std::pair<std::string, CommonFlags*>> dispatch;
  std::vector<std::unique_ptr<CommonFlags>> storage;
  auto add_leaf = [&](CLI::App* parent, const std::string& name,
                      const std::string& scenario, const std::string& help) {
    CLI::App* cmd = parent->add_subcommand(name, help);
    storage.push_back(std::make_unique<CommonFlags>());
    attach_common(cmd, storage.back().get());
    dispatch[cmd] = {scenario, storage.back().get()};
    return cmd;
  };

  CLI::App* dec = app.add_subcommand("decouple", "decoupling estimators");
  dec->require_subcommand(1);
  add_leaf(dec, "bilinear", "bilinear", "pairwise L4 decoupling ratio");
  add_leaf(dec, "refined", "refined", "wave-packet refined decoupling ratio");
  add_leaf(dec, "linear-dyadic", "linear-dyadic",
           "dyadic-rectangle linear decoupling");
  add_leaf(dec, "restriction2d", "restriction2d", "planar bilinear estimate");
  add_leaf(dec, "squarefn", "squarefn", "square-function recoupling ratio");

  CLI::App* broad = app.add_subcommand("broad", "broad-norm utilities");
  broad->require_subcommand(1);
  auto* bv = add_leaf(broad, "value", "broad-value",
                      "exact vs greedy broad values on random tables");
  auto* bd = add_leaf(broad, "decompose", "broad-decompose",
                      "three-term pointwise decomposition");
  (void)bv;
  (void)bd;

  auto* restr = add_leaf(&app, "restriction", "restriction",
                         "extension-operator restriction ratio");
  double p_flag = 0;
  std::string broad_flag;
  restr->add_option("--p", p_flag, "exponent p");
  restr->add_option("--broad", broad_flag,
                    "run the broad variant with parameters A,K");

  CLI::App* inc = app.add_subcommand("incidence", "line-family experiments");
  inc->require_subcommand(1);
  for (const char* name : {"twoends", "furstenberg", "prune"})
    add_leaf(inc, name, name, name);

  CLI::App* wp = app.add_subcommand("wavepacket", "wave packet checks");
  wp->require_subcommand(1);
  add_leaf(wp, "verify", "wavepacket-verify", "decomposition property checks");

  auto* verify = add_leaf(&app, "verify-all", "verify-all",
                          "run the full acceptance suite");
  double budget_flag = 0;
  verify->add_option("--budget", budget_flag, "time budget in minutes");

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [cmd, entry] : dispatch) {
      bool selected = cmd->parsed();
      // nested subcommands: check the leaf actually ran
      if (!selected) continue;
      ExperimentConfig cfg = build_config(*entry.second, entry.first);
      if (cmd == restr) {
        if (p_flag > 0) cfg.p = p_flag;
        if (!broad_flag.empty()) {
          size_t comma = broad_flag.find(',');
          if (comma == std::string::npos)
            throw std::invalid_argument("--broad expects A,K");
          cfg.A = std::stoi(broad_flag.substr(0, comma));
          cfg.K = std::stod(broad_flag.substr(comma + 1));
          cfg.scenario = "broad-restriction";
        }
      }
      if (cmd == verify && budget_flag > 0) cfg.budget_min = budget_flag;
      if (cfg.scenario == "verify-all" && cfg.budget_min <= 0) {
        std::fprintf(stderr, "verify-all: empty run (budget <= 0)\n");
        return 2;
      }
      return run_scenario(cfg);
    }
    std::fprintf(stderr, "no scenario selected\n");
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
