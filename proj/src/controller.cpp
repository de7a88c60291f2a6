#include "cotrack/controller.hpp"

namespace cotrack {

void ControllerGains::validate() const {
  if (!(alpha > 0)) throw std::invalid_argument("controller: alpha must be positive");
  if (!k.isApprox(k.transpose(), 1e-12))
    throw std::invalid_argument("controller: K must be symmetric");
  Eigen::LLT<Eigen::Matrix2d> llt(k);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("controller: K must be positive definite");
}

Eigen::Vector2d reference_velocity(const NodeObserverState& obs,
                                   const Eigen::Vector2d& q,
                                   const ControllerGains& g) {
  if (obs.e_hat.rows() != 2)
    throw DimensionMismatch("reference_velocity: E_hat must have 2 rows");
  return obs.e_hat * (s_matrix(obs.omega_hat) * obs.eta_hat) -
         g.alpha * (q - obs.e_hat * obs.eta_hat);
}

Eigen::Vector2d reference_acceleration(const NodeObserverState& obs,
                                       const NodeObserverState& obs_rhs,
                                       const Eigen::Vector2d& q,
                                       const Eigen::Vector2d& qdot,
                                       const ControllerGains& g) {
  if (obs.e_hat.rows() != 2 || obs_rhs.e_hat.rows() != 2)
    throw DimensionMismatch("reference_acceleration: E_hat must have 2 rows");
  (void)q;
  const Eigen::MatrixXd s_w = s_matrix(obs.omega_hat);
  return obs_rhs.e_hat * (s_w * obs.eta_hat) + obs.e_hat * (s_w * obs_rhs.eta_hat) +
         obs.e_hat * (s_matrix(obs_rhs.omega_hat) * obs.eta_hat) -
         g.alpha * (qdot - obs_rhs.e_hat * obs.eta_hat - obs.e_hat * obs_rhs.eta_hat);
}

Eigen::Vector2d torque(const TwoLinkParams& plant, const ELState& state,
                       const NodeObserverState& obs,
                       const NodeObserverState& obs_rhs, const ControllerGains& g) {
  const Eigen::Vector2d qr_dot = reference_velocity(obs, state.q, g);
  const Eigen::Vector2d qr_ddot =
      reference_acceleration(obs, obs_rhs, state.q, state.qdot, g);
  const Eigen::Vector2d s = state.qdot - qr_dot;
  return -g.k * s + mass_matrix(plant, state.q) * qr_ddot +
         coriolis_matrix(plant, state.q, state.qdot) * qr_dot +
         gravity_vector(plant, state.q);
}

}  // namespace cotrack
