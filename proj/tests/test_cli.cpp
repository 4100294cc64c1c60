#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hypdec/config.hpp"
#include "hypdec/scenarios.hpp"

using namespace hypdec;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  std::string path = "/tmp/hypdec_test_config.ini";
  {
    std::ofstream out(path);
    out << "# comment\n[run]\nscenario = bilinear\nscales = 64, 256\n"
        << "seed = 42\nensemble = focusing\nband_lo = 0.5\nband_hi = 2\n";
  }
  auto cfg = config::parse_file(path);
  CHECK(cfg.scenario == "bilinear");
  REQUIRE(cfg.scales.size() == 2);
  CHECK(cfg.scales[1] == 256);
  CHECK(cfg.seed == 42);
  CHECK(cfg.band.lo == 0.5);
  cfg.validate();
  std::remove(path.c_str());

  config::ExperimentConfig bad;
  bad.scales = {48};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.scales = {256, 64};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad.apply("nonsense", "1"), std::invalid_argument);
}

TEST_CASE("identical configs produce byte-identical reports") {
  config::ExperimentConfig cfg;
  cfg.scenario = "bilinear";
  cfg.scales = {64};
  cfg.seed = 7;
  cfg.ensemble = "random_phase";
  cfg.trials = 3;
  cfg.out_dir = "/tmp/hypdec_det_a";
  auto r1 = scenarios::run(cfg);
  cfg.out_dir = "/tmp/hypdec_det_b";
  auto r2 = scenarios::run(cfg);
  CHECK(r1.exit_code == 0);
  CHECK(slurp("/tmp/hypdec_det_a/bilinear.csv") ==
        slurp("/tmp/hypdec_det_b/bilinear.csv"));
  CHECK(slurp("/tmp/hypdec_det_a/bilinear_summary.json") ==
        slurp("/tmp/hypdec_det_b/bilinear_summary.json"));
  std::filesystem::remove_all("/tmp/hypdec_det_a");
  std::filesystem::remove_all("/tmp/hypdec_det_b");
}

TEST_CASE("worker count does not change the report bytes") {
  config::ExperimentConfig cfg;
  cfg.scenario = "bilinear";
  cfg.scales = {64};
  cfg.seed = 11;
  cfg.ensemble = "random_phase";
  cfg.trials = 4;
  cfg.out_dir = "/tmp/hypdec_det_w1";
  setenv("HYPDEC_THREADS", "1", 1);
  scenarios::run(cfg);
  cfg.out_dir = "/tmp/hypdec_det_w2";
  setenv("HYPDEC_THREADS", "2", 1);
  scenarios::run(cfg);
  unsetenv("HYPDEC_THREADS");
  CHECK(slurp("/tmp/hypdec_det_w1/bilinear.csv") ==
        slurp("/tmp/hypdec_det_w2/bilinear.csv"));
  std::filesystem::remove_all("/tmp/hypdec_det_w1");
  std::filesystem::remove_all("/tmp/hypdec_det_w2");
}

TEST_CASE("furstenberg scenario flags degenerate configs") {
  config::ExperimentConfig cfg;
  cfg.scenario = "furstenberg";
  cfg.scales = {32};
  cfg.line_count = 0;  // empty family
  cfg.out_dir = "/tmp/hypdec_det_f";
  CHECK_THROWS(scenarios::run(cfg));
  std::filesystem::remove_all("/tmp/hypdec_det_f");
}

TEST_CASE("rows carry provenance fields") {
  config::ExperimentConfig cfg;
  cfg.scenario = "broad-value";
  cfg.trials = 5;
  cfg.seed = 3;
  cfg.out_dir = "/tmp/hypdec_det_p";
  auto res = scenarios::run(cfg);
  REQUIRE(!res.rows.empty());
  std::string csv = slurp("/tmp/hypdec_det_p/broad-value.csv");
  CHECK(csv.find("scenario,R,seed,trial,ensemble") == 0);
  CHECK(csv.find("broad-value") != std::string::npos);
  std::filesystem::remove_all("/tmp/hypdec_det_p");
}
