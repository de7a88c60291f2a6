#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cotrack/report.hpp"
#include "cotrack/scenario.hpp"
#include "helpers.hpp"

using namespace cotrack;
namespace ct = cotrack::testing;

namespace {

std::string write_temp(const std::string& text) {
  static int counter = 0;
  const std::string path =
      "scenario_test_" + std::to_string(counter++) + ".json";
  std::ofstream out(path);
  out << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("builtin scenario carries the demo fixtures") {
  const ScenarioConfig cfg = builtin_scenario("paper_sec5");
  CHECK((build_matrices(cfg.graph).h - ct::demo_h()).norm() == 0.0);
  CHECK(cfg.leader.omega(2) == 30.0);
  CHECK(cfg.leader.e_out(1, 1) == 3.0);
  CHECK(cfg.leader.v0(1) == 0.6);
  CHECK(cfg.observer_gains.mu1 == 80.0);
  CHECK(cfg.observer_gains.mu2 == 60.0);
  CHECK(cfg.plants.size() == 4);
  CHECK(cfg.plants[2].theta(3) == 1.27);
  CHECK(cfg.plants[3].gravity == 9.8);
  CHECK(cfg.controller_gains[0].alpha == 0.5);
  CHECK((cfg.controller_gains[1].k - 0.5 * Eigen::Matrix2d::Identity()).norm() ==
        0.0);
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(builtin_scenario("nonexistent"), ParseError);
}

TEST_CASE("minimal config fills defaults") {
  const std::string path = write_temp(R"({
    "graph": {"adjacency": [0], "pinning": [1]},
    "leader": {"omega": [2], "e": [1, 0], "v0": [1, 0]},
    "observer": {"mu1": 10, "mu2": 5}
  })");
  const ScenarioConfig cfg = load_config(path);
  CHECK(cfg.mode == SimMode::observer_only);
  CHECK(cfg.horizon == 20.0);
  CHECK(cfg.step == 1e-4);
  CHECK(cfg.record_stride == 100);
  CHECK(cfg.observer_gains.d.size() == 1);
  CHECK(cfg.initial.observer.empty());  // zero initial conditions
  std::remove(path.c_str());
}

TEST_CASE("validation failures are aggregated with field paths") {
  const std::string path = write_temp(R"({
    "graph": {"adjacency": [0, 0, 0, 0], "pinning": [0, 0]},
    "leader": {"omega": [2], "e": [1, 0], "v0": [1, 0, 0]},
    "observer": {"mu1": 0.5, "mu2": 5},
    "sim": {"step": -0.1}
  })");
  try {
    load_config(path);
    FAIL("expected ValidationError");
  } catch (const ValidationError& ex) {
    const std::string what = ex.what();
    CHECK(what.find("graph") != std::string::npos);
    CHECK(what.find("leader") != std::string::npos);
    CHECK(what.find("mu1") != std::string::npos);
    CHECK(what.find("sim.step") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("non-SPD controller gain is rejected by name") {
  ScenarioConfig cfg = builtin_scenario("paper_sec5");
  cfg.controller_gains[2].k = -Eigen::Matrix2d::Identity();
  try {
    cfg.validate();
    FAIL("expected ConfigInvalid");
  } catch (const ConfigInvalid& ex) {
    CHECK(std::string(ex.what()).find("controller[2]") != std::string::npos);
  }
}

TEST_CASE("dump/load round trip") {
  const ScenarioConfig cfg = builtin_scenario("paper_sec5");
  const std::string path = write_temp(dump_config(cfg));
  const ScenarioConfig back = load_config(path);
  CHECK((back.graph.adjacency - cfg.graph.adjacency).norm() == 0.0);
  CHECK((back.leader.v0 - cfg.leader.v0).norm() == 0.0);
  CHECK(back.observer_gains.mu2 == cfg.observer_gains.mu2);
  CHECK(back.mode == cfg.mode);
  CHECK(back.plants[1].theta(0) == cfg.plants[1].theta(0));
  CHECK(dump_config(back) == dump_config(cfg));
  std::remove(path.c_str());
}

TEST_CASE("config hash is stable and content sensitive") {
  const ScenarioConfig cfg = builtin_scenario("paper_sec5");
  const std::string h1 = config_hash(dump_config(cfg));
  const std::string h2 = config_hash(dump_config(builtin_scenario("paper_sec5")));
  CHECK(h1 == h2);
  ScenarioConfig other = cfg;
  other.observer_gains.mu1 = 81;
  CHECK(config_hash(dump_config(other)) != h1);
}

TEST_CASE("csv emission") {
  ScenarioConfig cfg = builtin_scenario("paper_sec5");
  cfg.mode = SimMode::observer_only;
  cfg.horizon = cfg.step;  // single step, two samples
  cfg.record_stride = 1;
  const SimResult res = integrate(cfg);

  const std::string path = "csv_emit_test.csv";
  emit_csv(res, path);
  const std::string text = slurp(path);
  CHECK(text.back() == '\n');
  const size_t rows = std::count(text.begin(), text.end(), '\n');
  CHECK(rows == 3);  // header + 2 data rows
  CHECK(text.find("err_eta_1") != std::string::npos);
  CHECK(text.find("err_omega_4") != std::string::npos);
  CHECK(text.find(",V") != std::string::npos);

  // byte-identical on rerun
  emit_csv(integrate(cfg), path + ".again");
  CHECK(slurp(path + ".again") == text);
  std::remove(path.c_str());
  std::remove((path + ".again").c_str());
}

TEST_CASE("plot emission") {
  ScenarioConfig cfg = builtin_scenario("paper_sec5");
  cfg.mode = SimMode::observer_only;
  cfg.horizon = 0.01;
  const SimResult res = integrate(cfg);
  const auto files = emit_plots(res, "plot_test_");
  CHECK(files.size() == 4);  // eta, omega, E, eta-log (no tracking series)
  for (const auto& f : files) {
    const std::string text = slurp(f);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("</svg>") != std::string::npos);
    std::remove(f.c_str());
  }

  // empty result renders empty axes without crashing
  SimResult empty;
  const auto empty_files = emit_plots(empty, "plot_empty_");
  for (const auto& f : empty_files) {
    CHECK(slurp(f).find("<svg") != std::string::npos);
    std::remove(f.c_str());
  }
}

TEST_CASE("manifest is written with the hash") {
  RunManifest m;
  m.scenario = "paper_sec5";
  m.config_hash = config_hash("x");
  m.seed = 7;
  m.tool_version = "0.1.0";
  m.outputs = {"a.csv"};
  write_manifest(m, "manifest_test.json");
  const std::string text = slurp("manifest_test.json");
  CHECK(text.find(m.config_hash) != std::string::npos);
  CHECK(text.find("paper_sec5") != std::string::npos);
  std::remove("manifest_test.json");
}
