#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "cotrack/observer.hpp"
#include "helpers.hpp"

using namespace cotrack;
namespace ct = cotrack::testing;

namespace {

LeaderParams demo_leader() {
  LeaderParams p;
  p.omega.resize(3);
  p.omega << 10, 20, 30;
  p.e_out.resize(2, 6);
  p.e_out << 1, 0, 2, 0, 3, 0,
             0, 3, 0, 2, 0, 1;
  p.v0.resize(6);
  p.v0 << 2, 0.6, 2, 0.8, 2, 1;
  return p;
}

ObserverGains demo_gains() {
  ObserverGains g;
  g.mu1 = 80;
  g.mu2 = 60;
  g.d.resize(4);
  g.d << 1, 2, 3, 4;
  return g;
}

NetworkState random_states(int n, int m, int l, int n_out, std::mt19937& rng) {
  std::normal_distribution<double> dist;
  NetworkState states(n);
  for (auto& s : states) {
    s.eta_hat = Eigen::VectorXd::NullaryExpr(m, [&] { return dist(rng); });
    s.omega_hat = Eigen::VectorXd::NullaryExpr(l, [&] { return dist(rng); });
    s.e_hat =
        Eigen::MatrixXd::NullaryExpr(n_out, m, [&] { return dist(rng); });
  }
  return states;
}

}  // namespace

TEST_CASE("consensus_error at consensus and for a single pinned node") {
  const LeaderParams leader = demo_leader();
  const AugmentedGraph g = ct::demo_graph();
  const Eigen::VectorXd v = propagate(leader, 0.3);

  NetworkState states(4);
  for (auto& s : states) {
    s.eta_hat = v;
    s.omega_hat = leader.omega;
    s.e_hat = leader.e_out;
  }
  for (int i = 0; i < 4; ++i)
    CHECK(consensus_error(i, states, v, g).norm() < 1e-14);

  AugmentedGraph single;
  single.adjacency = Eigen::MatrixXd::Zero(1, 1);
  single.pinning = Eigen::VectorXd::Ones(1);
  NetworkState one(1);
  one[0].eta_hat = Eigen::VectorXd::Constant(6, 0.5);
  one[0].omega_hat = leader.omega;
  one[0].e_hat = leader.e_out;
  CHECK((consensus_error(0, one, v, single) - (v - one[0].eta_hat)).norm() <
        1e-14);
}

TEST_CASE("stacked consensus-error identity") {
  const LeaderParams leader = demo_leader();
  const AugmentedGraph g = ct::demo_graph();
  const Eigen::MatrixXd h = build_matrices(g).h;
  const Eigen::VectorXd v = propagate(leader, 1.7);

  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const NetworkState states = random_states(4, 6, 3, 2, rng);
    Eigen::VectorXd eta_tilde(24), stacked(24);
    for (int i = 0; i < 4; ++i) {
      eta_tilde.segment(6 * i, 6) = states[i].eta_hat - v;
      stacked.segment(6 * i, 6) = consensus_error(i, states, v, g);
    }
    const Eigen::MatrixXd hm =
        Eigen::kroneckerProduct(h, Eigen::MatrixXd::Identity(6, 6));
    CHECK((stacked + hm * eta_tilde).norm() <
          1e-13 * std::max(1.0, eta_tilde.norm()));
  }
}

TEST_CASE("observer_rhs at the error equilibrium") {
  const LeaderParams leader = demo_leader();
  const AugmentedGraph g = ct::demo_graph();
  const Eigen::VectorXd v = propagate(leader, 0.9);
  const Eigen::VectorXd y = leader.e_out * v;

  NetworkState states(4);
  for (auto& s : states) {
    s.eta_hat = v;
    s.omega_hat = leader.omega;
    s.e_hat = leader.e_out;
  }
  const NetworkState rates = observer_rhs(states, v, y, g, demo_gains());
  const Eigen::VectorXd v_dot = s_matrix(leader.omega) * v;
  for (const auto& r : rates) {
    CHECK((r.eta_hat - v_dot).norm() < 1e-12);
    CHECK(r.omega_hat.norm() < 1e-12);
    CHECK(r.e_hat.norm() < 1e-12);
  }
}

TEST_CASE("observer_rhs for one pinned node at the origin") {
  const LeaderParams leader = demo_leader();
  AugmentedGraph g;
  g.adjacency = Eigen::MatrixXd::Zero(1, 1);
  g.pinning = Eigen::VectorXd::Ones(1);
  ObserverGains gains = demo_gains();
  gains.d = Eigen::VectorXd::Constant(1, 2.0);

  const Eigen::VectorXd v = propagate(leader, 0.4);
  NetworkState states(1);
  states[0].eta_hat = Eigen::VectorXd::Zero(6);
  states[0].omega_hat = Eigen::VectorXd::Zero(3);
  states[0].e_hat = Eigen::MatrixXd::Zero(2, 6);

  const NetworkState rates =
      observer_rhs(states, v, leader.e_out * v, g, gains);
  CHECK((rates[0].eta_hat - gains.mu1 * 2.0 * v).norm() < 1e-12);
  CHECK(rates[0].omega_hat.norm() < 1e-14);
  CHECK(rates[0].e_hat.norm() < 1e-14);
}

TEST_CASE("per-node rhs equals the stacked form") {
  const LeaderParams leader = demo_leader();
  const AugmentedGraph g = ct::demo_graph();
  const ObserverGains gains = demo_gains();
  const Eigen::MatrixXd h = build_matrices(g).h;
  const Eigen::MatrixXd dh = gains.d.asDiagonal() * h;
  const double t = 0.6;
  const Eigen::VectorXd v = propagate(leader, t);

  std::mt19937 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const NetworkState states = random_states(4, 6, 3, 2, rng);
    const NetworkState rates =
        observer_rhs(states, v, leader.e_out * v, g, gains);

    Eigen::VectorXd eta_hat(24), eta_rate(24);
    for (int i = 0; i < 4; ++i) {
      eta_hat.segment(6 * i, 6) = states[i].eta_hat;
      eta_rate.segment(6 * i, 6) = rates[i].eta_hat;
    }
    Eigen::VectorXd expect(24);
    const Eigen::MatrixXd hm =
        Eigen::kroneckerProduct(dh, Eigen::MatrixXd::Identity(6, 6));
    Eigen::VectorXd vbar(24);
    for (int i = 0; i < 4; ++i) vbar.segment(6 * i, 6) = v;
    for (int i = 0; i < 4; ++i)
      expect.segment(6 * i, 6) =
          s_matrix(states[i].omega_hat) * states[i].eta_hat;
    expect -= gains.mu1 * (hm * (eta_hat - vbar));
    CHECK((eta_rate - expect).norm() < 1e-12 * std::max(1.0, expect.norm()));
  }
}

TEST_CASE("stacked error dynamics: equilibrium and consistency") {
  const LeaderParams leader = demo_leader();
  const AugmentedGraph g = ct::demo_graph();
  const ObserverGains gains = demo_gains();
  const double t = 0.8;
  const Eigen::VectorXd v = propagate(leader, t);

  {
    Eigen::VectorXd eta_hat(24);
    for (int i = 0; i < 4; ++i) eta_hat.segment(6 * i, 6) = v;
    const StackedErrorRates r = stacked_error_rhs(
        Eigen::VectorXd::Zero(24), Eigen::VectorXd::Zero(12), eta_hat, leader,
        t, g, gains);
    CHECK(r.eta_tilde_dot.norm() < 1e-12);
    CHECK(r.omega_tilde_dot.norm() < 1e-12);
  }

  std::mt19937 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const NetworkState states = random_states(4, 6, 3, 2, rng);
    Eigen::VectorXd eta_tilde(24), omega_tilde(12), eta_hat(24);
    for (int i = 0; i < 4; ++i) {
      eta_tilde.segment(6 * i, 6) = states[i].eta_hat - v;
      omega_tilde.segment(3 * i, 3) = states[i].omega_hat - leader.omega;
      eta_hat.segment(6 * i, 6) = states[i].eta_hat;
    }
    // the forms-(8)/(9) agreement is certified inside the call
    const StackedErrorRates r =
        stacked_error_rhs(eta_tilde, omega_tilde, eta_hat, leader, t, g, gains);

    const NetworkState rates =
        observer_rhs(states, v, leader.e_out * v, g, gains);
    const Eigen::VectorXd v_dot = s_matrix(leader.omega) * v;
    for (int i = 0; i < 4; ++i) {
      CHECK((r.eta_tilde_dot.segment(6 * i, 6) - (rates[i].eta_hat - v_dot))
                .norm() < 1e-12 * std::max(1.0, rates[i].eta_hat.norm()));
      CHECK((r.omega_tilde_dot.segment(3 * i, 3) - rates[i].omega_hat).norm() <
            1e-12 * std::max(1.0, rates[i].omega_hat.norm()));
    }
  }
}

TEST_CASE("output-matrix error dynamics") {
  const LeaderParams leader = demo_leader();
  const AugmentedGraph g = ct::demo_graph();
  const ObserverGains gains = demo_gains();
  const double t = 0.2;
  const Eigen::VectorXd v = propagate(leader, t);

  // zero errors stay at rest
  NetworkState on_leader(4);
  for (auto& s : on_leader) {
    s.eta_hat = v;
    s.omega_hat = leader.omega;
    s.e_hat = leader.e_out;
  }
  CHECK(output_error_rhs(Eigen::VectorXd::Zero(48), on_leader, leader, t, g,
                         gains)
            .norm() < 1e-12);

  // with eta_tilde = 0 the dynamics are exactly -(DH (x) (v v' (x) I_n)) zeta
  std::mt19937 rng(9);
  std::normal_distribution<double> dist;
  const Eigen::MatrixXd h = build_matrices(g).h;
  const Eigen::MatrixXd dh = gains.d.asDiagonal() * h;
  for (int trial = 0; trial < 10; ++trial) {
    NetworkState states = on_leader;
    Eigen::VectorXd zeta(48);
    for (int i = 0; i < 4; ++i) {
      Eigen::MatrixXd e_tilde =
          Eigen::MatrixXd::NullaryExpr(2, 6, [&] { return dist(rng); });
      states[i].e_hat = leader.e_out + e_tilde;
      zeta.segment(12 * i, 12) =
          Eigen::Map<Eigen::VectorXd>(e_tilde.data(), 12);
    }
    const Eigen::MatrixXd op = Eigen::kroneckerProduct(
        dh,
        Eigen::kroneckerProduct(
            (v * v.transpose()).eval(), Eigen::MatrixXd::Identity(2, 2))
            .eval());
    const Eigen::VectorXd got =
        output_error_rhs(zeta, states, leader, t, g, gains);
    CHECK((got + op * zeta).norm() < 1e-11 * std::max(1.0, zeta.norm()));
  }

  // vectorized-vs-matrix agreement is certified inside the call
  for (int trial = 0; trial < 10; ++trial) {
    const NetworkState states = random_states(4, 6, 3, 2, rng);
    Eigen::VectorXd zeta(48);
    for (int i = 0; i < 4; ++i) {
      const Eigen::MatrixXd e_tilde = states[i].e_hat - leader.e_out;
      zeta.segment(12 * i, 12) =
          Eigen::Map<const Eigen::VectorXd>(e_tilde.data(), 12);
    }
    CHECK_NOTHROW(output_error_rhs(zeta, states, leader, t, g, gains));
  }
}

TEST_CASE("lyapunov_v positivity") {
  const GainSet gs = synthesize_gains(ct::demo_h(), 1);
  CHECK(lyapunov_v(Eigen::VectorXd::Zero(24), Eigen::VectorXd::Zero(12), gs,
                   60.0) == 0.0);
  std::mt19937 rng(10);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd eta =
        Eigen::VectorXd::NullaryExpr(24, [&] { return dist(rng); });
    const Eigen::VectorXd om =
        Eigen::VectorXd::NullaryExpr(12, [&] { return dist(rng); });
    CHECK(lyapunov_v(eta, om, gs, 60.0) > 0.0);
  }
}

TEST_CASE("mu1 lower bound") {
  const GainSet gs = synthesize_gains(ct::demo_h(), 1);
  const LeaderParams leader = demo_leader();

  PilotSuprema quiet;  // perfect initial frequency knowledge
  quiet.sup_omega_tilde_norm = 0;
  quiet.sup_sd_eta_norm = 0;
  const BoundsReport b0 = mu1_lower_bound(gs, leader, quiet, 4);
  CHECK(b0.mu_max == doctest::Approx(1.0 / gs.lambda_q));

  double prev = b0.mu_max;
  for (double w = 1; w <= 64; w *= 4) {
    PilotSuprema p;
    p.sup_omega_tilde_norm = w;
    p.sup_sd_eta_norm = w;
    const BoundsReport b = mu1_lower_bound(gs, leader, p, 4);
    CHECK(b.mu_max >= prev);
    CHECK(b.mu_max > 0);
    prev = b.mu_max;
  }
}
