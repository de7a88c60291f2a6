#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "cotrack/gains.hpp"
#include "cotrack/graph.hpp"
#include "cotrack/leader.hpp"

namespace cotrack {

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct MissingPilot : std::runtime_error {
  explicit MissingPilot(const std::string& what) : std::runtime_error(what) {}
};

/// Per-follower estimates of the leader state, frequencies, and output matrix.
struct NodeObserverState {
  Eigen::VectorXd eta_hat;    // m
  Eigen::VectorXd omega_hat;  // l
  Eigen::MatrixXd e_hat;      // n x m
};

using NetworkState = std::vector<NodeObserverState>;

struct ObserverGains {
  double mu1 = 0;
  double mu2 = 0;
  Eigen::VectorXd d;  // per-node d_i > 0

  void validate(int n_nodes) const;
};

/// Constants of the mu_1 lower-bound formula. omega_star and rho1_star are
/// trajectory suprema estimated from a pilot run (with a 1.25 safety factor),
/// so mu_max under-approximates the worst case over all initial conditions.
struct BoundsReport {
  double m_star = 0;      // 2||P|| + 2||W|| ||DH||
  double omega_star = 0;  // estimated sup ||omega_tilde||
  double q_eta = 0;       // 4 lambda_h ||BDH|| sqrt(2 N b_M / (3 b_m))
  double c_min = 0;
  double mu_max = 0;
  double gamma = 0;       // 3 lambda_h / (4 b_M)
  double delta = 0;       // lambda_h / b_M
  double q0_star = 0;     // 4 N ||BDH||^2 / lambda_h
  double rho1_star = 0;   // estimated sup of 2 b_M N ||v(0)|| ||S_d(omega_tilde) eta_hat||
};

/// e_vi = sum_j a_ij (eta_hat_j - eta_hat_i), including the leader term
/// a_i0 (v - eta_hat_i).
Eigen::VectorXd consensus_error(int i, const NetworkState& states,
                                const Eigen::VectorXd& leader_v,
                                const AugmentedGraph& g);

/// Right-hand sides of the per-node observer:
///   eta_hat_dot_i   = S(omega_hat_i) eta_hat_i + mu1 d_i e_vi
///   omega_hat_dot_i = mu2 d_i phi(e_vi) eta_hat_i
///   E_hat_dot_i     = d_i sum_j a_ij (y_hat_j - y_hat_i) eta_hat_i^T
/// with y_hat_i = E_hat_i eta_hat_i and the leader aliases eta_hat_0 = v,
/// y_hat_0 = y.
NetworkState observer_rhs(const NetworkState& states,
                          const Eigen::VectorXd& leader_v,
                          const Eigen::VectorXd& leader_y,
                          const AugmentedGraph& g, const ObserverGains& gains);

struct StackedErrorRates {
  Eigen::VectorXd eta_tilde_dot;    // N m
  Eigen::VectorXd omega_tilde_dot;  // N l
};

/// Stacked error dynamics
///   eta_tilde_dot   = (I_N (x) S(omega) - mu1 DH (x) I_m) eta_tilde
///                     - phi_d^T(eta_hat) omega_tilde
///   omega_tilde_dot = mu2 phi_d(eta_hat) (DH (x) I_m) eta_tilde.
/// Also evaluates the intermediate form driven by S_d(omega_tilde) eta_hat and
/// phi_d(e_v), and throws CertificationFailed if the two disagree beyond
/// 1e-12 relative.
StackedErrorRates stacked_error_rhs(const Eigen::VectorXd& eta_tilde,
                                    const Eigen::VectorXd& omega_tilde,
                                    const Eigen::VectorXd& eta_hat,
                                    const LeaderParams& leader, double t,
                                    const AugmentedGraph& g,
                                    const ObserverGains& gains);

/// Vectorized output-matrix error dynamics
///   zeta_dot = -(DH (x) (v v^T (x) I_n)) zeta + pi(t),
/// cross-checked against the un-vectorized per-node matrix form to 1e-12.
Eigen::VectorXd output_error_rhs(const Eigen::VectorXd& zeta,
                                 const NetworkState& states,
                                 const LeaderParams& leader, double t,
                                 const AugmentedGraph& g,
                                 const ObserverGains& gains);

/// V = eta_tilde^T (P (x) I_m) eta_tilde
///     + mu2^-1 omega_tilde^T (W (x) I_l) omega_tilde.
double lyapunov_v(const Eigen::VectorXd& eta_tilde,
                  const Eigen::VectorXd& omega_tilde, const GainSet& gs,
                  double mu2);

/// Pilot-trajectory suprema needed by the bound calculator.
struct PilotSuprema {
  double sup_omega_tilde_norm = 0;  // stacked norm
  double sup_sd_eta_norm = 0;       // sup ||S_d(omega_tilde) eta_hat||
};

/// Lower bound mu_max on the coupling gain and the constants behind it.
BoundsReport mu1_lower_bound(const GainSet& gs, const LeaderParams& leader,
                             const PilotSuprema& pilot, int n_nodes);

// Stacking helpers shared with the simulation engine.
Eigen::VectorXd stack_eta(const NetworkState& states);
Eigen::VectorXd stack_omega(const NetworkState& states);

}  // namespace cotrack
