#include "cotrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

namespace cotrack {

std::string to_string(SimMode mode) {
  switch (mode) {
    case SimMode::observer_only: return "observer_only";
    case SimMode::closed_loop: return "closed_loop";
    case SimMode::linear_example: return "linear_example";
    case SimMode::adaptive_cascade: return "adaptive_cascade";
  }
  return "unknown";
}

std::optional<SimMode> parse_mode(const std::string& name) {
  if (name == "observer_only") return SimMode::observer_only;
  if (name == "closed_loop") return SimMode::closed_loop;
  if (name == "linear_example") return SimMode::linear_example;
  if (name == "adaptive_cascade") return SimMode::adaptive_cascade;
  return std::nullopt;
}

void ScenarioConfig::validate() const {
  std::vector<std::string> errors;
  const auto note = [&](const std::string& field, const std::string& what) {
    errors.push_back(field + ": " + what);
  };

  try {
    graph.validate();
    if (!has_leader_spanning_tree(graph))
      note("graph", "augmented graph has no leader-rooted spanning tree");
  } catch (const std::exception& ex) {
    note("graph", ex.what());
  }
  try {
    leader.validate();
  } catch (const std::exception& ex) {
    note("leader", ex.what());
  }
  try {
    observer_gains.validate(graph.size());
    if (!(observer_gains.mu1 > 1.0)) note("observer.mu1", "must exceed 1");
  } catch (const std::exception& ex) {
    note("observer", ex.what());
  }

  if (mode == SimMode::closed_loop) {
    if (leader.n_out() != 2)
      note("leader.e", "closed loop needs a 2-row output matrix");
    if (static_cast<int>(controller_gains.size()) != graph.size())
      note("controller", "need one gain set per follower");
    for (size_t i = 0; i < controller_gains.size(); ++i) {
      try {
        controller_gains[i].validate();
      } catch (const std::exception& ex) {
        note("controller[" + std::to_string(i) + "]", ex.what());
      }
    }
    if (static_cast<int>(plants.size()) != graph.size())
      note("plants", "need one parameter set per follower");
    for (size_t i = 0; i < plants.size(); ++i) {
      // mass matrix depends on q2 only; sample a grid of the workspace
      for (int k = 0; k < 128; ++k) {
        const double q2 = 2.0 * std::numbers::pi * k / 128.0;
        const Eigen::Matrix2d m = mass_matrix(plants[i], {0.0, q2});
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
        if (!(es.eigenvalues().minCoeff() > 0)) {
          note("plants[" + std::to_string(i) + "].theta",
               "mass matrix not positive definite over the workspace");
          break;
        }
      }
    }
  }

  if (!(step > 0)) note("sim.step", "must be positive");
  if (!(horizon >= step)) note("sim.horizon", "must be at least one step");
  if (record_stride < 1) note("sim.record_stride", "must be >= 1");

  const auto check_count = [&](size_t got, const char* field) {
    if (got != 0 && got != static_cast<size_t>(graph.size()))
      note(field, "wrong number of per-node entries");
  };
  check_count(initial.observer.size(), "initial.observer");
  check_count(initial.q.size(), "initial.q");
  check_count(initial.qdot.size(), "initial.qdot");
  check_count(initial.q_ref.size(), "initial.q_ref");

  if (!errors.empty()) {
    std::ostringstream msg;
    msg << "invalid scenario config (" << errors.size() << " problem(s)):";
    for (const auto& e : errors) msg << "\n  - " << e;
    throw ConfigInvalid(msg.str());
  }
}

namespace {

struct Layout {
  int n_nodes = 0, m = 0, l = 0, n_out = 0;
  bool closed_loop = false;
  int per_node = 0;

  int size() const { return n_nodes * per_node; }
};

Layout make_layout(const ScenarioConfig& cfg) {
  Layout lo;
  lo.n_nodes = cfg.graph.size();
  lo.m = cfg.leader.m();
  lo.l = cfg.leader.l();
  lo.n_out = cfg.leader.n_out();
  lo.closed_loop = cfg.mode == SimMode::closed_loop;
  lo.per_node = lo.m + lo.l + lo.n_out * lo.m + (lo.closed_loop ? 6 : 0);
  return lo;
}

NetworkState unpack_observer(const Eigen::VectorXd& x, const Layout& lo) {
  NetworkState states(lo.n_nodes);
  for (int i = 0; i < lo.n_nodes; ++i) {
    const int base = i * lo.per_node;
    states[i].eta_hat = x.segment(base, lo.m);
    states[i].omega_hat = x.segment(base + lo.m, lo.l);
    states[i].e_hat = Eigen::Map<const Eigen::MatrixXd>(
        x.data() + base + lo.m + lo.l, lo.n_out, lo.m);
  }
  return states;
}

void unpack_plant(const Eigen::VectorXd& x, const Layout& lo, int i, ELState& s,
                  Eigen::Vector2d& q_ref) {
  const int base = i * lo.per_node + lo.m + lo.l + lo.n_out * lo.m;
  s.q = x.segment<2>(base);
  s.qdot = x.segment<2>(base + 2);
  q_ref = x.segment<2>(base + 4);
}

Eigen::VectorXd initial_state(const ScenarioConfig& cfg, const Layout& lo) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(lo.size());
  for (int i = 0; i < lo.n_nodes; ++i) {
    const int base = i * lo.per_node;
    if (!cfg.initial.observer.empty()) {
      const auto& obs = cfg.initial.observer[i];
      if (obs.eta_hat.size() == lo.m) x.segment(base, lo.m) = obs.eta_hat;
      if (obs.omega_hat.size() == lo.l)
        x.segment(base + lo.m, lo.l) = obs.omega_hat;
      if (obs.e_hat.size() == lo.n_out * lo.m)
        Eigen::Map<Eigen::MatrixXd>(x.data() + base + lo.m + lo.l, lo.n_out,
                                    lo.m) = obs.e_hat;
    }
    if (lo.closed_loop) {
      const int pbase = base + lo.m + lo.l + lo.n_out * lo.m;
      if (!cfg.initial.q.empty()) x.segment<2>(pbase) = cfg.initial.q[i];
      if (!cfg.initial.qdot.empty()) x.segment<2>(pbase + 2) = cfg.initial.qdot[i];
      if (!cfg.initial.q_ref.empty())
        x.segment<2>(pbase + 4) = cfg.initial.q_ref[i];
    }
  }
  return x;
}

Eigen::VectorXd system_rhs(const ScenarioConfig& cfg, const Layout& lo, double t,
                           const Eigen::VectorXd& x) {
  const Eigen::VectorXd v = propagate(cfg.leader, t);
  const Eigen::VectorXd y = cfg.leader.e_out * v;
  const NetworkState states = unpack_observer(x, lo);
  const NetworkState rates =
      observer_rhs(states, v, y, cfg.graph, cfg.observer_gains);

  Eigen::VectorXd dx(lo.size());
  for (int i = 0; i < lo.n_nodes; ++i) {
    const int base = i * lo.per_node;
    dx.segment(base, lo.m) = rates[i].eta_hat;
    dx.segment(base + lo.m, lo.l) = rates[i].omega_hat;
    Eigen::Map<Eigen::MatrixXd>(dx.data() + base + lo.m + lo.l, lo.n_out, lo.m) =
        rates[i].e_hat;
    if (lo.closed_loop) {
      ELState s;
      Eigen::Vector2d q_ref;
      unpack_plant(x, lo, i, s, q_ref);
      const auto& cg = cfg.controller_gains[i];
      const Eigen::Vector2d tau = torque(cfg.plants[i], s, states[i], rates[i], cg);
      const int pbase = base + lo.m + lo.l + lo.n_out * lo.m;
      dx.segment<2>(pbase) = s.qdot;
      dx.segment<2>(pbase + 2) = forward_dynamics(cfg.plants[i], s, tau);
      dx.segment<2>(pbase + 4) = reference_velocity(states[i], s.q, cg);
    }
  }
  return dx;
}

}  // namespace

SimResult integrate(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.mode != SimMode::observer_only && cfg.mode != SimMode::closed_loop)
    throw ConfigInvalid("integrate: mode must be observer_only or closed_loop");

  const Layout lo = make_layout(cfg);
  const GraphMatrices gm = build_matrices(cfg.graph);
  // prefer the D actually driving the observer so the V series is meaningful
  GainSet gs;
  try {
    gs = gains_for_d(gm.h, cfg.observer_gains.d, cfg.seed);
  } catch (const CertificationFailed&) {
    gs = synthesize_gains(gm.h, cfg.seed);
  }

  {
    const Eigen::MatrixXd dh = cfg.observer_gains.d.asDiagonal() * gm.h;
    Eigen::EigenSolver<Eigen::MatrixXd> es(dh, false);
    const double rate = cfg.step * cfg.observer_gains.mu1 *
                        es.eigenvalues().real().maxCoeff();
    if (rate >= 2.5)
      std::cerr << "warning: step * mu1 * lambda_max(DH) = " << rate
                << " exceeds the RK4 stability heuristic (2.5)\n";
  }

  const long n_steps = std::lround(cfg.horizon / cfg.step);
  SimResult res;
  res.gains = gs;
  res.err_eta.assign(lo.n_nodes, {});
  res.err_omega.assign(lo.n_nodes, {});
  res.err_e.assign(lo.n_nodes, {});
  if (lo.closed_loop) {
    res.err_track.assign(lo.n_nodes, {});
    res.v_node.assign(lo.n_nodes, {});
  }

  Eigen::VectorXd x = initial_state(cfg, lo);

  const auto record_step = [&](double t, const Eigen::VectorXd& state) {
    const Eigen::VectorXd v = propagate(cfg.leader, t);
    const NetworkState states = unpack_observer(state, lo);
    Eigen::VectorXd eta_tilde(lo.n_nodes * lo.m), omega_tilde(lo.n_nodes * lo.l);
    for (int i = 0; i < lo.n_nodes; ++i) {
      eta_tilde.segment(i * lo.m, lo.m) = states[i].eta_hat - v;
      omega_tilde.segment(i * lo.l, lo.l) =
          states[i].omega_hat - cfg.leader.omega;
    }
    res.step_times.push_back(t);
    res.v_series.push_back(
        lyapunov_v(eta_tilde, omega_tilde, gs, cfg.observer_gains.mu2));
    if (lo.closed_loop) {
      for (int i = 0; i < lo.n_nodes; ++i) {
        ELState s;
        Eigen::Vector2d q_ref;
        unpack_plant(state, lo, i, s, q_ref);
        const Eigen::Vector2d slip =
            s.qdot - reference_velocity(states[i], s.q, cfg.controller_gains[i]);
        res.v_node[i].push_back(
            0.5 * slip.dot(mass_matrix(cfg.plants[i], s.q) * slip));
      }
    }
  };

  const auto record_sample = [&](double t, const Eigen::VectorXd& state) {
    const Eigen::VectorXd v = propagate(cfg.leader, t);
    const Eigen::VectorXd y = cfg.leader.e_out * v;
    const NetworkState states = unpack_observer(state, lo);
    res.times.push_back(t);
    res.leader_snapshots.push_back(v);
    res.obs_snapshots.push_back(states);
    if (lo.closed_loop) {
      res.plant_snapshots.emplace_back(lo.n_nodes);
      res.qr_snapshots.emplace_back(lo.n_nodes);
    }
    for (int i = 0; i < lo.n_nodes; ++i) {
      res.err_eta[i].push_back((states[i].eta_hat - v).norm());
      res.err_omega[i].push_back((states[i].omega_hat - cfg.leader.omega).norm());
      res.err_e[i].push_back((states[i].e_hat - cfg.leader.e_out).norm());
      if (lo.closed_loop) {
        ELState s;
        Eigen::Vector2d q_ref;
        unpack_plant(state, lo, i, s, q_ref);
        res.err_track[i].push_back((s.q - Eigen::Vector2d(y)).norm());
        res.plant_snapshots.back()[i] = s;
        res.qr_snapshots.back()[i] = q_ref;
      }
    }
  };

  record_step(0.0, x);
  record_sample(0.0, x);
  const double h = cfg.step;
  for (long k = 0; k < n_steps; ++k) {
    const double t = k * h;
    const Eigen::VectorXd k1 = system_rhs(cfg, lo, t, x);
    const Eigen::VectorXd k2 = system_rhs(cfg, lo, t + 0.5 * h, x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = system_rhs(cfg, lo, t + 0.5 * h, x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = system_rhs(cfg, lo, t + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t_next = (k + 1) * h;
    if (!x.allFinite())
      throw NonFiniteState("integrate: state diverged at t = " +
                           std::to_string(t_next));
    record_step(t_next, x);
    if ((k + 1) % cfg.record_stride == 0 || k + 1 == n_steps)
      record_sample(t_next, x);
  }
  return res;
}

RateFit fit_exponential_rate(const std::vector<double>& times,
                             const std::vector<double>& series, double t0,
                             double t1) {
  if (times.size() != series.size())
    throw std::invalid_argument("fit_exponential_rate: length mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  long n = 0;
  for (size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t0 || times[k] > t1) continue;
    if (!(series[k] > 0))
      throw NonPositiveSeries("fit_exponential_rate: series must be positive");
    const double xv = times[k], yv = std::log(series[k]);
    sx += xv;
    sy += yv;
    sxx += xv * xv;
    sxy += xv * yv;
    syy += yv * yv;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_exponential_rate: window too small");
  RateFit fit;
  fit.t_start = t0;
  fit.t_end = t1;
  const double det = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0;
  for (size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t0 || times[k] > t1) continue;
    const double r = std::log(series[k]) - (fit.intercept + fit.slope * times[k]);
    ss_res += r * r;
  }
  fit.r_squared = ss_tot > 0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
  return fit;
}

PilotSuprema pilot_suprema(const SimResult& pilot, const LeaderParams& leader) {
  if (pilot.obs_snapshots.empty() || pilot.leader_snapshots.empty())
    throw MissingPilot("pilot_suprema: pilot run has no snapshots");
  PilotSuprema sup;
  for (size_t k = 0; k < pilot.obs_snapshots.size(); ++k) {
    double omega_sq = 0, sd_sq = 0;
    for (const auto& node : pilot.obs_snapshots[k]) {
      const Eigen::VectorXd omega_tilde = node.omega_hat - leader.omega;
      omega_sq += omega_tilde.squaredNorm();
      sd_sq += (s_matrix(omega_tilde) * node.eta_hat).squaredNorm();
    }
    sup.sup_omega_tilde_norm =
        std::max(sup.sup_omega_tilde_norm, std::sqrt(omega_sq));
    sup.sup_sd_eta_norm = std::max(sup.sup_sd_eta_norm, std::sqrt(sd_sq));
  }
  return sup;
}

namespace {

SeriesMetric series_metric(const std::vector<std::vector<double>>& per_node,
                           double threshold) {
  SeriesMetric sm;
  if (per_node.empty() || per_node.front().empty()) return sm;
  sm.orders_of_decay = std::numeric_limits<double>::infinity();
  for (const auto& s : per_node) {
    const double peak = *std::max_element(s.begin(), s.end());
    const double final_value = s.back();
    sm.final_value = std::max(sm.final_value, final_value);
    sm.peak = std::max(sm.peak, peak);
    sm.orders_of_decay = std::min(
        sm.orders_of_decay,
        final_value > 0 ? std::log10(peak / final_value)
                        : std::numeric_limits<double>::infinity());
  }
  sm.below_threshold = sm.final_value < threshold;
  return sm;
}

int count_increases(const std::vector<double>& v, double tol) {
  int violations = 0;
  for (size_t k = 1; k < v.size(); ++k)
    if (v[k] - v[k - 1] > tol) ++violations;
  return violations;
}

}  // namespace

MetricReport metrics(const SimResult& result, const Thresholds& thresholds) {
  MetricReport rep;
  rep.eta = series_metric(result.err_eta, thresholds.error);
  rep.omega = series_metric(result.err_omega, thresholds.error);
  rep.e_mat = series_metric(result.err_e, thresholds.error);
  rep.track = series_metric(result.err_track, thresholds.error);

  rep.lyapunov_violations =
      count_increases(result.v_series, thresholds.lyapunov_increase);
  for (const auto& v : result.v_node)
    rep.lyapunov_node_violations +=
        count_increases(v, thresholds.lyapunov_increase);

  if (!result.times.empty() && !result.err_eta.empty()) {
    std::vector<double> combined(result.times.size(), 0.0);
    for (size_t k = 0; k < combined.size(); ++k) {
      double sq = 0;
      for (const auto& s : result.err_eta) sq += s[k] * s[k];
      for (const auto& s : result.err_omega) sq += s[k] * s[k];
      combined[k] = std::sqrt(sq);
    }
    // Stop the fit where the decay bottoms out on the arithmetic floor: a
    // roundoff plateau is not part of the exponential regime and flattens
    // the fitted slope toward zero.
    size_t k_end = combined.size() - 1;
    const double floor_min =
        *std::min_element(combined.begin(), combined.end());
    if (floor_min > 0.0) {
      size_t k = 0;
      while (k + 1 < combined.size() && combined[k] > 10.0 * floor_min) ++k;
      if (k > 0) k_end = k;
    }
    const double t_end = result.times[k_end];
    const double t0 = t_end - thresholds.rate_window_fraction *
                                  (t_end - result.times.front());
    try {
      rep.rate = fit_exponential_rate(result.times, combined, t0, t_end);
    } catch (const std::exception&) {
      rep.rate = std::nullopt;
    }
  }

  rep.converged = rep.eta.below_threshold && rep.omega.below_threshold &&
                  rep.e_mat.below_threshold &&
                  (result.err_track.empty() || rep.track.below_threshold);
  return rep;
}

}  // namespace cotrack
