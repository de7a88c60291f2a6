#pragma once

#include <Eigen/Dense>

#include "cotrack/observer.hpp"
#include "cotrack/plant.hpp"

namespace cotrack {

struct ControllerGains {
  Eigen::Matrix2d k;  // symmetric positive definite
  double alpha = 0;

  void validate() const;  // throws std::invalid_argument
};

/// qr_dot = Ehat S(omega_hat) eta_hat - alpha (q - Ehat eta_hat).
Eigen::Vector2d reference_velocity(const NodeObserverState& obs,
                                   const Eigen::Vector2d& q,
                                   const ControllerGains& g);

/// Analytic qr_ddot from the observer rates at the same instant; no numerical
/// differentiation.
Eigen::Vector2d reference_acceleration(const NodeObserverState& obs,
                                       const NodeObserverState& obs_rhs,
                                       const Eigen::Vector2d& q,
                                       const Eigen::Vector2d& qdot,
                                       const ControllerGains& g);

/// tau = -K s + M(q) qr_ddot + C(q, qdot) qr_dot + G(q), s = qdot - qr_dot.
Eigen::Vector2d torque(const TwoLinkParams& plant, const ELState& state,
                       const NodeObserverState& obs,
                       const NodeObserverState& obs_rhs, const ControllerGains& g);

}  // namespace cotrack
