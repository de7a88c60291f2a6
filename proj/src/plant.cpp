#include "cotrack/plant.hpp"

#include <cmath>

namespace cotrack {

Eigen::Matrix2d mass_matrix(const TwoLinkParams& p, const Eigen::Vector2d& q) {
  const double c2 = std::cos(q[1]);
  const double a1 = p.theta[0], a2 = p.theta[1], a3 = p.theta[2];
  Eigen::Matrix2d m;
  m << a1 + a2 + 2.0 * a3 * c2, a2 + a3 * c2,  //
      a2 + a3 * c2, a2;
  return m;
}

Eigen::Matrix2d coriolis_matrix(const TwoLinkParams& p, const Eigen::Vector2d& q,
                                const Eigen::Vector2d& qdot) {
  const double s2 = std::sin(q[1]);
  const double a3 = p.theta[2];
  Eigen::Matrix2d c;
  c << -a3 * s2 * qdot[1], -a3 * s2 * (qdot[0] + qdot[1]),  //
      a3 * s2 * qdot[0], 0.0;
  return c;
}

Eigen::Vector2d gravity_vector(const TwoLinkParams& p, const Eigen::Vector2d& q) {
  const double a4 = p.theta[3], a5 = p.theta[4], g = p.gravity;
  return {a4 * g * std::cos(q[0]) + a5 * g * std::cos(q[0] + q[1]),
          a5 * g * std::cos(q[0] + q[1])};
}

Eigen::Matrix2d mass_matrix_rate(const TwoLinkParams& p, const Eigen::Vector2d& q,
                                 const Eigen::Vector2d& qdot) {
  const double a3 = p.theta[2];
  const double rate = -a3 * std::sin(q[1]) * qdot[1];
  Eigen::Matrix2d md;
  md << 2.0 * rate, rate,  //
      rate, 0.0;
  return md;
}

Eigen::Vector2d forward_dynamics(const TwoLinkParams& p, const ELState& s,
                                 const Eigen::Vector2d& tau) {
  const Eigen::Matrix2d m = mass_matrix(p, s.q);
  const double det = m.determinant();
  if (!(std::abs(det) > 1e-12))
    throw SingularMass("forward_dynamics: mass matrix is singular");
  return m.inverse() *
         (tau - coriolis_matrix(p, s.q, s.qdot) * s.qdot - gravity_vector(p, s.q));
}

}  // namespace cotrack
