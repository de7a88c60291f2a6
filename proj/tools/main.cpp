#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include "CLI11.hpp"
#include "cotrack/report.hpp"
#include "cotrack/scenario.hpp"
#include "json.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

struct CommonOpts {
  std::string config_path;
  std::string scenario = "paper_sec5";
  std::string out_dir = ".";
  std::optional<unsigned> seed;
  std::optional<double> step;
  std::optional<double> horizon;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "scenario config file (JSON)");
  cmd->add_option("--scenario", opts.scenario, "built-in scenario name");
  cmd->add_option("--out-dir", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "synthesis seed override");
  cmd->add_option("--step", opts.step, "integration step override [s]");
  cmd->add_option("--horizon", opts.horizon, "horizon override [s]");
}

cotrack::ScenarioConfig resolve_config(const CommonOpts& opts) {
  cotrack::ScenarioConfig cfg = opts.config_path.empty()
                                    ? cotrack::builtin_scenario(opts.scenario)
                                    : cotrack::load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.step) cfg.step = *opts.step;
  if (opts.horizon) cfg.horizon = *opts.horizon;
  return cfg;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json gains_json(const cotrack::GainSet& gs) {
  nlohmann::json j;
  j["d"] = matrix_json(gs.d.diagonal().transpose());
  j["w"] = matrix_json(gs.w);
  j["p"] = matrix_json(gs.p);
  j["q"] = matrix_json(gs.q);
  j["b"] = matrix_json(gs.b.diagonal().transpose());
  j["lambda_q"] = gs.lambda_q;
  j["lambda_h"] = gs.lambda_h;
  j["norm_p"] = gs.norm_p;
  j["norm_w"] = gs.norm_w;
  j["norm_dh"] = gs.norm_dh;
  j["norm_bdh"] = gs.norm_bdh;
  return j;
}

cotrack::BoundsReport bounds_report(const cotrack::ScenarioConfig& cfg) {
  using namespace cotrack;
  const GraphMatrices gm = build_matrices(cfg.graph);
  GainSet gs;
  try {
    gs = gains_for_d(gm.h, cfg.observer_gains.d, cfg.seed);
  } catch (const CertificationFailed&) {
    gs = synthesize_gains(gm.h, cfg.seed);
  }
  ScenarioConfig pilot = cfg;
  pilot.mode = SimMode::observer_only;
  pilot.horizon = std::min(cfg.horizon, 2.0);
  const SimResult res = integrate(pilot);
  return mu1_lower_bound(gs, cfg.leader, pilot_suprema(res, cfg.leader),
                         cfg.graph.size());
}

int run_one(const cotrack::ScenarioConfig& cfg, const std::string& out_dir,
            const std::string& tag) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const cotrack::SimResult res = cotrack::integrate(cfg);

  cotrack::RunManifest manifest;
  manifest.scenario = cfg.name;
  manifest.config_hash = cotrack::config_hash(cotrack::dump_config(cfg));
  manifest.seed = cfg.seed;
  manifest.tool_version = kVersion;

  const std::string base = (fs::path(out_dir) / (cfg.name + tag)).string();
  cotrack::emit_csv(res, base + ".csv");
  manifest.outputs.push_back(base + ".csv");
  for (const auto& f : cotrack::emit_plots(res, base + "_"))
    manifest.outputs.push_back(f);
  cotrack::write_manifest(manifest, base + "_manifest.json");

  const cotrack::MetricReport rep = cotrack::metrics(res, {});
  std::cout << "run " << cfg.name << tag << ": final err_eta=" << rep.eta.final_value
            << " err_omega=" << rep.omega.final_value
            << " err_E=" << rep.e_mat.final_value;
  if (!res.err_track.empty()) std::cout << " err_track=" << rep.track.final_value;
  std::cout << (rep.converged ? "  [converged]" : "  [not converged]") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative tracking and parameter estimation toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  double mu1_lo = 40, mu1_hi = 120;
  double mu2_lo = 30, mu2_hi = 90;
  int grid = 3;

  CLI::App* synth = app.add_subcommand("synthesize", "gain synthesis from the graph");
  CLI::App* run = app.add_subcommand("run", "integrate a scenario");
  CLI::App* check = app.add_subcommand("check", "invariant suite on a config");
  CLI::App* bounds = app.add_subcommand("bounds", "observer gain bound report");
  CLI::App* sweep = app.add_subcommand("sweep", "grid sweep over mu1/mu2");
  for (CLI::App* cmd : {synth, run, check, bounds, sweep}) add_common(cmd, opts);
  sweep->add_option("--mu1-min", mu1_lo);
  sweep->add_option("--mu1-max", mu1_hi);
  sweep->add_option("--mu2-min", mu2_lo);
  sweep->add_option("--mu2-max", mu2_hi);
  sweep->add_option("--grid", grid, "points per axis");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const auto cfg = resolve_config(opts);
      const auto gm = cotrack::build_matrices(cfg.graph);
      cotrack::GainSet gs;
      try {
        gs = cotrack::gains_for_d(gm.h, cfg.observer_gains.d, cfg.seed);
      } catch (const cotrack::CertificationFailed&) {
        gs = cotrack::synthesize_gains(gm.h, cfg.seed);
      }
      std::cout << gains_json(gs).dump(2) << "\n";
      return 0;
    }
    if (run->parsed()) return run_one(resolve_config(opts), opts.out_dir, "");
    if (check->parsed()) {
      const auto cfg = resolve_config(opts);  // load_config validates
      const auto gm = cotrack::build_matrices(cfg.graph);
      if (!cotrack::is_nonsingular_m_matrix(gm.h)) {
        std::cerr << "check: H is not a nonsingular M-matrix\n";
        return kExitValidation;
      }
      cotrack::synthesize_gains(gm.h, cfg.seed);  // throws if uncertifiable
      std::cout << "check: ok\n";
      return 0;
    }
    if (bounds->parsed()) {
      const auto cfg = resolve_config(opts);
      const auto rep = bounds_report(cfg);
      nlohmann::json j;
      j["m_star"] = rep.m_star;
      j["omega_star"] = rep.omega_star;
      j["q_eta"] = rep.q_eta;
      j["c_min"] = rep.c_min;
      j["mu_max"] = rep.mu_max;
      j["gamma"] = rep.gamma;
      j["delta"] = rep.delta;
      j["q0_star"] = rep.q0_star;
      j["rho1_star"] = rep.rho1_star;
      j["mu1"] = cfg.observer_gains.mu1;
      j["mu1_exceeds_bound"] = cfg.observer_gains.mu1 >= rep.mu_max;
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (sweep->parsed()) {
      const auto base = resolve_config(opts);
      std::vector<std::future<int>> jobs;
      for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b) {
          cotrack::ScenarioConfig cfg = base;
          cfg.observer_gains.mu1 =
              mu1_lo + (grid > 1 ? (mu1_hi - mu1_lo) * a / (grid - 1) : 0);
          cfg.observer_gains.mu2 =
              mu2_lo + (grid > 1 ? (mu2_hi - mu2_lo) * b / (grid - 1) : 0);
          const std::string tag = "_mu1_" + std::to_string(a) + "_mu2_" +
                                  std::to_string(b);
          jobs.push_back(std::async(std::launch::async, run_one, cfg,
                                    opts.out_dir, tag));
        }
      int rc = 0;
      for (auto& j : jobs) rc = std::max(rc, j.get());
      return rc;
    }
  } catch (const cotrack::NonFiniteState& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
