#include "cotrack/observer.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

namespace cotrack {

namespace {

Eigen::VectorXd vec(const Eigen::MatrixXd& a) {
  return Eigen::Map<const Eigen::VectorXd>(a.data(), a.size());
}

Eigen::MatrixXd unvec(const Eigen::VectorXd& x, int rows, int cols) {
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), rows, cols);
}

void check_close(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double rel,
                 const char* what) {
  const double scale = std::max(1.0, std::max(a.norm(), b.norm()));
  if ((a - b).norm() > rel * scale) throw CertificationFailed(what);
}

}  // namespace

void ObserverGains::validate(int n_nodes) const {
  if (!(mu1 > 0) || !(mu2 > 0))
    throw std::invalid_argument("observer gains: mu1, mu2 must be positive");
  if (d.size() != n_nodes || (d.array() <= 0).any())
    throw std::invalid_argument("observer gains: need n positive d_i");
}

Eigen::VectorXd stack_eta(const NetworkState& states) {
  const int m = static_cast<int>(states.front().eta_hat.size());
  Eigen::VectorXd out(states.size() * m);
  for (size_t i = 0; i < states.size(); ++i)
    out.segment(i * m, m) = states[i].eta_hat;
  return out;
}

Eigen::VectorXd stack_omega(const NetworkState& states) {
  const int l = static_cast<int>(states.front().omega_hat.size());
  Eigen::VectorXd out(states.size() * l);
  for (size_t i = 0; i < states.size(); ++i)
    out.segment(i * l, l) = states[i].omega_hat;
  return out;
}

Eigen::VectorXd consensus_error(int i, const NetworkState& states,
                                const Eigen::VectorXd& leader_v,
                                const AugmentedGraph& g) {
  const int n = g.size();
  if (i < 0 || i >= n || static_cast<int>(states.size()) != n)
    throw DimensionMismatch("consensus_error: bad node index or state count");
  const Eigen::VectorXd& eta_i = states[i].eta_hat;
  if (leader_v.size() != eta_i.size())
    throw DimensionMismatch("consensus_error: leader state dimension");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(eta_i.size());
  for (int j = 0; j < n; ++j)
    if (g.adjacency(i, j) > 0.0)
      e += g.adjacency(i, j) * (states[j].eta_hat - eta_i);
  if (g.pinning(i) > 0.0) e += g.pinning(i) * (leader_v - eta_i);
  return e;
}

NetworkState observer_rhs(const NetworkState& states,
                          const Eigen::VectorXd& leader_v,
                          const Eigen::VectorXd& leader_y,
                          const AugmentedGraph& g, const ObserverGains& gains) {
  const int n = g.size();
  gains.validate(n);
  if (static_cast<int>(states.size()) != n)
    throw DimensionMismatch("observer_rhs: state count");

  std::vector<Eigen::VectorXd> y_hat(n);
  for (int i = 0; i < n; ++i) y_hat[i] = states[i].e_hat * states[i].eta_hat;

  NetworkState rates(n);
  for (int i = 0; i < n; ++i) {
    const auto& st = states[i];
    const double di = gains.d[i];
    const Eigen::VectorXd e_vi = consensus_error(i, states, leader_v, g);

    rates[i].eta_hat = s_matrix(st.omega_hat) * st.eta_hat + gains.mu1 * di * e_vi;
    rates[i].omega_hat = gains.mu2 * di * (phi(e_vi) * st.eta_hat);

    Eigen::VectorXd e_yi = Eigen::VectorXd::Zero(leader_y.size());
    for (int j = 0; j < n; ++j)
      if (g.adjacency(i, j) > 0.0)
        e_yi += g.adjacency(i, j) * (y_hat[j] - y_hat[i]);
    if (g.pinning(i) > 0.0) e_yi += g.pinning(i) * (leader_y - y_hat[i]);
    rates[i].e_hat = di * e_yi * st.eta_hat.transpose();
  }
  return rates;
}

StackedErrorRates stacked_error_rhs(const Eigen::VectorXd& eta_tilde,
                                    const Eigen::VectorXd& omega_tilde,
                                    const Eigen::VectorXd& eta_hat,
                                    const LeaderParams& leader, double t,
                                    const AugmentedGraph& g,
                                    const ObserverGains& gains) {
  const int n = g.size();
  const int m = leader.m();
  const int l = leader.l();
  gains.validate(n);
  if (eta_tilde.size() != n * m || eta_hat.size() != n * m ||
      omega_tilde.size() != n * l)
    throw DimensionMismatch("stacked_error_rhs: stacking dimensions");

  const Eigen::VectorXd v = propagate(leader, t);
  const Eigen::MatrixXd s_omega = s_matrix(leader.omega);
  const GraphMatrices gm = build_matrices(g);
  const Eigen::MatrixXd dh = gains.d.asDiagonal() * gm.h;

  // err-form: driven by phi_d^T(eta_hat) omega_tilde and phi_d(eta_hat) DH eta_tilde
  StackedErrorRates out;
  out.eta_tilde_dot.resize(n * m);
  out.omega_tilde_dot.resize(n * l);
  std::vector<Eigen::VectorXd> dh_eta(n);  // [(DH (x) I_m) eta_tilde]_i
  for (int i = 0; i < n; ++i) {
    dh_eta[i] = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < n; ++j)
      if (dh(i, j) != 0.0) dh_eta[i] += dh(i, j) * eta_tilde.segment(j * m, m);
  }
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd phi_i = phi(eta_hat.segment(i * m, m));
    out.eta_tilde_dot.segment(i * m, m) =
        s_omega * eta_tilde.segment(i * m, m) - gains.mu1 * dh_eta[i] -
        phi_i.transpose() * omega_tilde.segment(i * l, l);
    out.omega_tilde_dot.segment(i * l, l) = gains.mu2 * phi_i * dh_eta[i];
  }

  // intermediate form: driven by S_d(omega_tilde) eta_hat and phi_d(e_v)
  Eigen::VectorXd eta_alt(n * m), omega_alt(n * l);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e_vi = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < n; ++j)
      if (gm.h(i, j) != 0.0) e_vi -= gm.h(i, j) * eta_tilde.segment(j * m, m);
    eta_alt.segment(i * m, m) =
        s_omega * eta_tilde.segment(i * m, m) - gains.mu1 * dh_eta[i] +
        s_matrix(omega_tilde.segment(i * l, l)) * eta_hat.segment(i * m, m);
    omega_alt.segment(i * l, l) =
        gains.mu2 * gains.d[i] * (phi(e_vi) * eta_hat.segment(i * m, m));
  }
  check_close(out.eta_tilde_dot, eta_alt, 1e-12,
              "stacked_error_rhs: eta forms disagree");
  check_close(out.omega_tilde_dot, omega_alt, 1e-12,
              "stacked_error_rhs: omega forms disagree");
  (void)v;
  return out;
}

Eigen::VectorXd output_error_rhs(const Eigen::VectorXd& zeta,
                                 const NetworkState& states,
                                 const LeaderParams& leader, double t,
                                 const AugmentedGraph& g,
                                 const ObserverGains& gains) {
  const int n_nodes = g.size();
  const int m = leader.m();
  const int n = leader.n_out();
  const int nm = n * m;
  gains.validate(n_nodes);
  if (zeta.size() != n_nodes * nm || static_cast<int>(states.size()) != n_nodes)
    throw DimensionMismatch("output_error_rhs: zeta stacking dimensions");

  const Eigen::VectorXd v = propagate(leader, t);
  const GraphMatrices gm = build_matrices(g);
  const Eigen::MatrixXd dh = gains.d.asDiagonal() * gm.h;

  std::vector<Eigen::MatrixXd> e_tilde(n_nodes);
  std::vector<Eigen::VectorXd> eta_tilde(n_nodes), e_v(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    e_tilde[i] = unvec(zeta.segment(i * nm, nm), n, m);
    eta_tilde[i] = states[i].eta_hat - v;
    e_v[i] = consensus_error(i, states, v, g);
  }

  // matrix form: Etilde_dot_i = d_i sum_j a_ij (Etilde_j - Etilde_i) v v^T + psi_i
  Eigen::VectorXd out(zeta.size());
  for (int i = 0; i < n_nodes; ++i) {
    const double di = gains.d[i];
    const Eigen::VectorXd& eta_i = states[i].eta_hat;
    Eigen::MatrixXd rate = Eigen::MatrixXd::Zero(n, m);
    for (int j = 0; j < n_nodes; ++j) {
      const double a = g.adjacency(i, j);
      if (a == 0.0) continue;
      const Eigen::MatrixXd diff = e_tilde[j] - e_tilde[i];
      rate += di * a * (diff * (v * v.transpose()) + diff * (v * eta_tilde[i].transpose()) +
                        e_tilde[j] * (eta_tilde[j] * eta_i.transpose()) -
                        e_tilde[i] * (eta_tilde[i] * eta_i.transpose()));
    }
    if (g.pinning(i) > 0.0) {
      // leader edge: Etilde_0 = 0, eta_tilde_0 = 0
      const double a = g.pinning(i);
      rate += di * a * (-e_tilde[i] * (v * v.transpose()) -
                        e_tilde[i] * (v * eta_tilde[i].transpose()) -
                        e_tilde[i] * (eta_tilde[i] * eta_i.transpose()));
    }
    rate += di * leader.e_out * (e_v[i] * eta_i.transpose());
    out.segment(i * nm, nm) = vec(rate);
  }

  // vectorized form with materialized per-node Kronecker blocks
  const Eigen::VectorXd zeta0 = vec(leader.e_out);
  const Eigen::MatrixXd eye_n = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd alt(zeta.size());
  for (int i = 0; i < n_nodes; ++i) {
    const double di = gains.d[i];
    const Eigen::VectorXd& eta_i = states[i].eta_hat;
    const Eigen::MatrixXd kr_vv =
        Eigen::kroneckerProduct((v * v.transpose()).transpose(), eye_n);
    Eigen::VectorXd zdot = Eigen::VectorXd::Zero(nm);
    for (int j = 0; j < n_nodes; ++j)
      if (dh(i, j) != 0.0) zdot -= dh(i, j) * (kr_vv * zeta.segment(j * nm, nm));
    Eigen::VectorXd pi_i = Eigen::VectorXd::Zero(nm);
    for (int j = 0; j <= n_nodes; ++j) {
      const double a = j < n_nodes ? g.adjacency(i, j) : g.pinning(i);
      if (a == 0.0) continue;
      const Eigen::VectorXd zeta_j =
          j < n_nodes ? Eigen::VectorXd(zeta.segment(j * nm, nm))
                      : Eigen::VectorXd(Eigen::VectorXd::Zero(nm));
      const Eigen::VectorXd eta_tilde_j =
          j < n_nodes ? eta_tilde[j] : Eigen::VectorXd(Eigen::VectorXd::Zero(m));
      // vec(E M) = (M^T (x) I_n) vec(E); the factors below are already M^T
      pi_i += di * a *
              (Eigen::kroneckerProduct((eta_tilde[i] * v.transpose()).eval(), eye_n) *
                   (zeta_j - zeta.segment(i * nm, nm)) +
               Eigen::kroneckerProduct((eta_i * eta_tilde_j.transpose()).eval(), eye_n) *
                   zeta_j -
               Eigen::kroneckerProduct((eta_i * eta_tilde[i].transpose()).eval(), eye_n) *
                   zeta.segment(i * nm, nm));
    }
    pi_i += di *
            Eigen::kroneckerProduct((eta_i * e_v[i].transpose()).eval(), eye_n) *
            zeta0;
    alt.segment(i * nm, nm) = zdot + pi_i;
  }
  check_close(out, alt, 1e-12, "output_error_rhs: vec and matrix forms disagree");
  return out;
}

double lyapunov_v(const Eigen::VectorXd& eta_tilde,
                  const Eigen::VectorXd& omega_tilde, const GainSet& gs,
                  double mu2) {
  const int n = static_cast<int>(gs.p.rows());
  const int m = static_cast<int>(eta_tilde.size()) / n;
  const int l = static_cast<int>(omega_tilde.size()) / n;
  double out = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (gs.p(i, j) != 0.0)
        out += gs.p(i, j) *
               eta_tilde.segment(i * m, m).dot(eta_tilde.segment(j * m, m));
      if (gs.w(i, j) != 0.0)
        out += gs.w(i, j) / mu2 *
               omega_tilde.segment(i * l, l).dot(omega_tilde.segment(j * l, l));
    }
  return out;
}

BoundsReport mu1_lower_bound(const GainSet& gs, const LeaderParams& leader,
                             const PilotSuprema& pilot, int n_nodes) {
  if (!(pilot.sup_omega_tilde_norm >= 0) || !(pilot.sup_sd_eta_norm >= 0))
    throw MissingPilot("mu1_lower_bound: pilot suprema unavailable");
  constexpr double kSafety = 1.25;
  BoundsReport rep;
  rep.m_star = 2.0 * gs.norm_p + 2.0 * gs.norm_w * gs.norm_dh;
  rep.omega_star = kSafety * pilot.sup_omega_tilde_norm;
  rep.q_eta = 4.0 * gs.lambda_h * gs.norm_bdh *
              std::sqrt(2.0 * n_nodes * gs.b_max / (3.0 * gs.b_min));
  rep.c_min = c_min(leader.v0);
  rep.gamma = 3.0 * gs.lambda_h / (4.0 * gs.b_max);
  rep.delta = gs.lambda_h / gs.b_max;
  rep.q0_star = 4.0 * n_nodes * gs.norm_bdh * gs.norm_bdh / gs.lambda_h;
  rep.rho1_star = kSafety * 2.0 * gs.b_max * n_nodes * leader.v0.norm() *
                  pilot.sup_sd_eta_norm;
  const double v0_sq = leader.v0.squaredNorm();
  const double term1 = (rep.omega_star * rep.m_star + 1.0) / gs.lambda_q;
  const double term2 = 32.0 * rep.omega_star * gs.b_max * gs.b_max * n_nodes *
                       v0_sq * rep.q_eta /
                       (rep.c_min * rep.c_min * gs.lambda_h * gs.b_min);
  rep.mu_max = std::max(term1, term2);
  return rep;
}

}  // namespace cotrack
