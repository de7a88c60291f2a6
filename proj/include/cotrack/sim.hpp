#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cotrack/controller.hpp"
#include "cotrack/gains.hpp"
#include "cotrack/graph.hpp"
#include "cotrack/leader.hpp"
#include "cotrack/observer.hpp"
#include "cotrack/plant.hpp"

namespace cotrack {

struct NonFiniteState : std::runtime_error {
  explicit NonFiniteState(const std::string& what) : std::runtime_error(what) {}
};
struct ConfigInvalid : std::runtime_error {
  explicit ConfigInvalid(const std::string& what) : std::runtime_error(what) {}
};
struct NonPositiveSeries : std::runtime_error {
  explicit NonPositiveSeries(const std::string& what) : std::runtime_error(what) {}
};
struct PreconditionFailed : std::runtime_error {
  explicit PreconditionFailed(const std::string& what) : std::runtime_error(what) {}
};
struct RiccatiFailed : std::runtime_error {
  explicit RiccatiFailed(const std::string& what) : std::runtime_error(what) {}
};

enum class SimMode { observer_only, closed_loop, linear_example, adaptive_cascade };

std::string to_string(SimMode mode);
std::optional<SimMode> parse_mode(const std::string& name);

/// All initial conditions; empty containers mean zeros.
struct InitialConditions {
  NetworkState observer;
  std::vector<Eigen::Vector2d> q;
  std::vector<Eigen::Vector2d> qdot;
  std::vector<Eigen::Vector2d> q_ref;
};

struct ScenarioConfig {
  std::string name = "custom";
  AugmentedGraph graph;
  LeaderParams leader;
  ObserverGains observer_gains;
  std::vector<ControllerGains> controller_gains;  // per node (closed loop)
  std::vector<TwoLinkParams> plants;              // per node (closed loop)
  InitialConditions initial;
  SimMode mode = SimMode::observer_only;
  double horizon = 20.0;
  double step = 1e-4;
  int record_stride = 100;
  unsigned seed = 1;

  /// Throws ConfigInvalid listing every violated invariant with its field path.
  void validate() const;
};

struct SimResult {
  // series at the record stride
  std::vector<double> times;
  std::vector<std::vector<double>> err_eta;    // [node][sample] ||eta_tilde_i||
  std::vector<std::vector<double>> err_omega;  // ||omega_tilde_i||
  std::vector<std::vector<double>> err_e;      // ||E_tilde_i||_F
  std::vector<std::vector<double>> err_track;  // ||q_i - y|| (closed loop)

  // Lyapunov series at full step resolution (for per-step monotonicity checks)
  std::vector<double> step_times;
  std::vector<double> v_series;                // Eq.-(21)-style V
  std::vector<std::vector<double>> v_node;     // per-node (1/2) s' M s

  // raw snapshots at the record stride
  std::vector<NetworkState> obs_snapshots;
  std::vector<std::vector<ELState>> plant_snapshots;
  std::vector<std::vector<Eigen::Vector2d>> qr_snapshots;
  std::vector<Eigen::VectorXd> leader_snapshots;

  // generic named series and scalars for the linear/adaptive harnesses
  std::map<std::string, std::vector<double>> extra_series;
  std::map<std::string, double> scalars;
  std::optional<PEReport> psi_pe;
  std::optional<GainSet> gains;  // the set used for the V series
};

/// Fixed-step RK4 over the coupled leader/observer(/plant/controller) system.
/// The leader is advanced analytically at the stage times.
SimResult integrate(const ScenarioConfig& cfg);

struct RateFit {
  double slope = 0;  // 1/s
  double intercept = 0;
  double r_squared = 0;
  double t_start = 0;
  double t_end = 0;
};

/// Least-squares line fit of log(series) against time over [t0, t1].
RateFit fit_exponential_rate(const std::vector<double>& times,
                             const std::vector<double>& series, double t0,
                             double t1);

/// Trajectory suprema of a pilot run, used by mu1_lower_bound.
PilotSuprema pilot_suprema(const SimResult& pilot, const LeaderParams& leader);

struct Thresholds {
  double error = 1e-2;
  double lyapunov_increase = 1e-8;
  double rate_window_fraction = 0.4;  // tail fraction of the horizon
};

struct SeriesMetric {
  double final_value = 0;
  double peak = 0;
  double orders_of_decay = 0;  // log10(peak / final), max over nodes of each
  bool below_threshold = false;
};

struct MetricReport {
  SeriesMetric eta, omega, e_mat, track;
  int lyapunov_violations = 0;       // steps with dV > tolerance
  int lyapunov_node_violations = 0;  // same for the per-node V_i
  std::optional<RateFit> rate;       // tail fit of ||(eta_tilde, omega_tilde)||
  bool converged = false;
};

MetricReport metrics(const SimResult& result, const Thresholds& thresholds);

using SignalFn = std::function<Eigen::MatrixXd(double)>;

/// Simulates
///   xdot = (I_n (x) A_a - Y (x) I_m) x - (I_n (x) psi^T(t)) z
///   zdot = kappa (Y (x) (psi(t) P_a)) x
/// after verifying P_a A_a + A_a^T P_a <= 0 and that Y is diagonalizable with
/// positive eigenvalues. Throws PreconditionFailed naming the violated
/// hypothesis. Records x/z norms and the PE level of psi.
SimResult run_adaptive_cascade(const Eigen::MatrixXd& a_a, const Eigen::MatrixXd& p_a,
                     const Eigen::MatrixXd& y_mat, const SignalFn& psi,
                     double kappa, const Eigen::VectorXd& x0,
                     const Eigen::VectorXd& z0, double horizon, double step);

/// Continuous algebraic Riccati equation A'P + PA + Q - P B R^-1 B' P = 0,
/// solved by the eigenvector method on the Hamiltonian matrix. The residual is
/// certified to 1e-10 relative.
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& q, const Eigen::MatrixXd& r);

/// Cooperative linear-tracking harness: simulates
///   xtilde_dot = (I_N (x) A_o - c DH (x) B_o K) xtilde
/// with K = R_o^-1 B_o' P_1 from the Riccati equation and c taken 1.05x above
/// the coupling bound (c = 1 when the bound degenerates to zero).
SimResult run_linear_example(const Eigen::MatrixXd& a_o, const Eigen::MatrixXd& b_o,
                             const Eigen::MatrixXd& q_o, const Eigen::MatrixXd& r_o,
                             const AugmentedGraph& graph, const GainSet& gs,
                             const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& leader_x0, double horizon,
                             double step);

}  // namespace cotrack
