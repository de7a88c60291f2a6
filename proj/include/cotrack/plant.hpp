#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace cotrack {

struct SingularMass : std::runtime_error {
  explicit SingularMass(const std::string& what) : std::runtime_error(what) {}
};

/// Two-link robot arm with lumped mass-geometry parameters
/// theta = (a1, ..., a5) and gravitational acceleration g.
struct TwoLinkParams {
  Eigen::Matrix<double, 5, 1> theta;
  double gravity = 9.8;
};

struct ELState {
  Eigen::Vector2d q;
  Eigen::Vector2d qdot;
};

Eigen::Matrix2d mass_matrix(const TwoLinkParams& p, const Eigen::Vector2d& q);

Eigen::Matrix2d coriolis_matrix(const TwoLinkParams& p, const Eigen::Vector2d& q,
                                const Eigen::Vector2d& qdot);

Eigen::Vector2d gravity_vector(const TwoLinkParams& p, const Eigen::Vector2d& q);

/// Analytic d/dt of the mass matrix along (q, qdot); used by the
/// skew-symmetry checks.
Eigen::Matrix2d mass_matrix_rate(const TwoLinkParams& p, const Eigen::Vector2d& q,
                                 const Eigen::Vector2d& qdot);

/// qddot = M(q)^-1 (tau - C(q, qdot) qdot - G(q)).
Eigen::Vector2d forward_dynamics(const TwoLinkParams& p, const ELState& s,
                                 const Eigen::Vector2d& tau);

}  // namespace cotrack
