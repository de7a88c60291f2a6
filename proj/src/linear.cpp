#include <unsupported/Eigen/KroneckerProduct>

#include "cotrack/sim.hpp"

namespace cotrack {

namespace {

double spectral_norm_of(const Eigen::MatrixXd& m) {
  return m.jacobiSvd().singularValues()(0);
}

}  // namespace

SimResult run_adaptive_cascade(const Eigen::MatrixXd& a_a, const Eigen::MatrixXd& p_a,
                     const Eigen::MatrixXd& y_mat, const SignalFn& psi,
                     double kappa, const Eigen::VectorXd& x0,
                     const Eigen::VectorXd& z0, double horizon, double step) {
  const int m = static_cast<int>(a_a.rows());
  const int n = static_cast<int>(y_mat.rows());
  if (a_a.cols() != m || p_a.rows() != m || p_a.cols() != m)
    throw std::invalid_argument("run_adaptive_cascade: A/P dimension mismatch");
  if (y_mat.cols() != n)
    throw std::invalid_argument("run_adaptive_cascade: Y must be square");
  if (x0.size() != n * m)
    throw std::invalid_argument("run_adaptive_cascade: x0 must have length n*m");
  if (!(step > 0) || !(horizon >= step))
    throw ConfigInvalid("run_adaptive_cascade: need step > 0 and horizon >= step");

  // hypothesis checks
  if (!p_a.isApprox(p_a.transpose(), 1e-10))
    throw PreconditionFailed("run_adaptive_cascade: P is not symmetric");
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p_a);
    if (!(es.eigenvalues().minCoeff() > 0))
      throw PreconditionFailed("run_adaptive_cascade: P is not positive definite");
    const Eigen::MatrixXd lyap = p_a * a_a + a_a.transpose() * p_a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ls(
        0.5 * (lyap + lyap.transpose()));
    if (ls.eigenvalues().maxCoeff() > 1e-10 * std::max(1.0, spectral_norm_of(p_a)))
      throw PreconditionFailed("run_adaptive_cascade: P A + A' P is not negative semidefinite");
  }
  {
    Eigen::EigenSolver<Eigen::MatrixXd> es(y_mat);
    if (es.info() != Eigen::Success)
      throw PreconditionFailed("run_adaptive_cascade: eigendecomposition of Y failed");
    for (int i = 0; i < n; ++i) {
      const auto lam = es.eigenvalues()(i);
      if (!(lam.real() > 0) || std::abs(lam.imag()) > 1e-10 * std::abs(lam))
        throw PreconditionFailed(
            "run_adaptive_cascade: Y must have real positive eigenvalues");
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
    if (svd.singularValues()(0) / svd.singularValues()(n - 1) > 1e12)
      throw PreconditionFailed("run_adaptive_cascade: Y is not diagonalizable");
  }

  const int s = static_cast<int>(psi(0.0).rows());
  if (psi(0.0).cols() != m)
    throw std::invalid_argument("run_adaptive_cascade: psi(t) must have m columns");
  if (z0.size() != n * s)
    throw std::invalid_argument("run_adaptive_cascade: z0 must have length n*s");

  const auto rhs = [&](double t, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& z, Eigen::VectorXd& dx,
                       Eigen::VectorXd& dz) {
    const Eigen::MatrixXd ps = psi(t);
    for (int i = 0; i < n; ++i) {
      dx.segment(i * m, m) = a_a * x.segment(i * m, m) -
                             ps.transpose() * z.segment(i * s, s);
      dz.segment(i * s, s).setZero();
      for (int j = 0; j < n; ++j) {
        if (y_mat(i, j) == 0) continue;
        dx.segment(i * m, m) -= y_mat(i, j) * x.segment(j * m, m);
        dz.segment(i * s, s) +=
            kappa * y_mat(i, j) * (ps * (p_a * x.segment(j * m, m)));
      }
    }
  };

  SimResult res;
  const long n_steps = std::lround(horizon / step);
  Eigen::VectorXd x = x0, z = z0;
  Eigen::VectorXd kx1(n * m), kx2(n * m), kx3(n * m), kx4(n * m);
  Eigen::VectorXd kz1(n * s), kz2(n * s), kz3(n * s), kz4(n * s);
  std::vector<Eigen::MatrixXd> psi_samples;
  const auto record = [&](double t) {
    res.times.push_back(t);
    res.extra_series["x_norm"].push_back(x.norm());
    res.extra_series["z_norm"].push_back(z.norm());
    psi_samples.push_back(psi(t));
  };
  record(0.0);
  for (long k = 0; k < n_steps; ++k) {
    const double t = k * step;
    rhs(t, x, z, kx1, kz1);
    rhs(t + 0.5 * step, x + 0.5 * step * kx1, z + 0.5 * step * kz1, kx2, kz2);
    rhs(t + 0.5 * step, x + 0.5 * step * kx2, z + 0.5 * step * kz2, kx3, kz3);
    rhs(t + step, x + step * kx3, z + step * kz3, kx4, kz4);
    x += (step / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
    z += (step / 6.0) * (kz1 + 2.0 * kz2 + 2.0 * kz3 + kz4);
    if (!x.allFinite() || !z.allFinite())
      throw NonFiniteState("run_adaptive_cascade: state diverged at t = " +
                           std::to_string((k + 1) * step));
    record((k + 1) * step);
  }

  const double window = std::min(1.0, horizon / 4.0);
  res.psi_pe = pe_level(psi_samples, step, window);
  res.scalars["x_norm_final"] = x.norm();
  res.scalars["z_norm_final"] = z.norm();
  return res;
}

Eigen::MatrixXd solve_care(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& q, const Eigen::MatrixXd& r) {
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXd r_inv = r.inverse();
  Eigen::MatrixXd ham(2 * n, 2 * n);
  ham << a, -b * r_inv * b.transpose(), -q, -a.transpose();

  Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(ham);
  if (es.info() != Eigen::Success)
    throw RiccatiFailed("solve_care: Hamiltonian eigendecomposition failed");

  Eigen::MatrixXcd basis(2 * n, n);
  int count = 0;
  for (int i = 0; i < 2 * n && count < n; ++i) {
    if (es.eigenvalues()(i).real() < 0) basis.col(count++) = es.eigenvectors().col(i);
  }
  if (count != n)
    throw RiccatiFailed("solve_care: stable subspace has wrong dimension");

  const Eigen::MatrixXcd x1 = basis.topRows(n);
  const Eigen::MatrixXcd x2 = basis.bottomRows(n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(x1);
  if (!lu.isInvertible())
    throw RiccatiFailed("solve_care: stable subspace is not a graph subspace");
  Eigen::MatrixXd p = (x2 * lu.inverse()).real();
  p = 0.5 * (p + p.transpose()).eval();

  const Eigen::MatrixXd residual =
      a.transpose() * p + p * a + q - p * b * r_inv * b.transpose() * p;
  const double scale = std::max({1.0, spectral_norm_of(p), spectral_norm_of(q)});
  if (spectral_norm_of(residual) > 1e-10 * scale)
    throw RiccatiFailed("solve_care: residual exceeds certification tolerance");
  return p;
}

SimResult run_linear_example(const Eigen::MatrixXd& a_o, const Eigen::MatrixXd& b_o,
                             const Eigen::MatrixXd& q_o, const Eigen::MatrixXd& r_o,
                             const AugmentedGraph& graph, const GainSet& gs,
                             const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& leader_x0, double horizon,
                             double step) {
  graph.validate();
  const int n_nodes = graph.size();
  const int n = static_cast<int>(a_o.rows());
  if (x0.size() != n_nodes * n || leader_x0.size() != n)
    throw std::invalid_argument("run_linear_example: bad state dimensions");
  if (!(step > 0) || !(horizon >= step))
    throw ConfigInvalid("run_linear_example: need step > 0 and horizon >= step");

  const GraphMatrices gm = build_matrices(graph);
  const Eigen::MatrixXd p1 = solve_care(a_o, b_o, q_o, r_o);
  const Eigen::MatrixXd k_gain = r_o.inverse() * b_o.transpose() * p1;
  const Eigen::MatrixXd krk = k_gain.transpose() * r_o * k_gain;

  const Eigen::MatrixXd& d = gs.d;  // already the diagonal matrix
  const Eigen::MatrixXd wdh = gs.w * d * gm.h;
  const Eigen::MatrixXd hdwdh = gm.h.transpose() * d * wdh;

  const Eigen::MatrixXd numer =
      Eigen::kroneckerProduct(wdh, q_o - krk).eval();
  const Eigen::MatrixXd denom = Eigen::kroneckerProduct(hdwdh, krk).eval();
  const double sigma_min = denom.jacobiSvd().singularValues().minCoeff();
  const double bound =
      sigma_min > 1e-14 ? spectral_norm_of(numer) / sigma_min : 0.0;
  const double c = bound > 0 ? 1.05 * bound : 1.0;

  const Eigen::MatrixXd dh = d * gm.h;
  const Eigen::MatrixXd sys =
      Eigen::kroneckerProduct(Eigen::MatrixXd::Identity(n_nodes, n_nodes), a_o) -
      c * Eigen::kroneckerProduct(dh, b_o * k_gain);

  SimResult res;
  res.scalars["c"] = c;
  res.scalars["c_bound"] = bound;
  res.scalars["k_00"] = k_gain(0, 0);
  res.scalars["p1_00"] = p1(0, 0);
  res.err_eta.assign(n_nodes, {});

  Eigen::VectorXd xt(n_nodes * n);
  for (int i = 0; i < n_nodes; ++i)
    xt.segment(i * n, n) = x0.segment(i * n, n) - leader_x0;

  const long n_steps = std::lround(horizon / step);
  const auto record = [&](double t) {
    res.times.push_back(t);
    res.extra_series["x_norm"].push_back(xt.norm());
    for (int i = 0; i < n_nodes; ++i)
      res.err_eta[i].push_back(xt.segment(i * n, n).norm());
  };
  record(0.0);
  for (long k = 0; k < n_steps; ++k) {
    // xtilde' = sys * xtilde is autonomous (leader matrix A_o cancels)
    const Eigen::VectorXd k1 = sys * xt;
    const Eigen::VectorXd k2 = sys * (xt + 0.5 * step * k1);
    const Eigen::VectorXd k3 = sys * (xt + 0.5 * step * k2);
    const Eigen::VectorXd k4 = sys * (xt + step * k3);
    xt += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!xt.allFinite())
      throw NonFiniteState("run_linear_example: state diverged at t = " +
                           std::to_string((k + 1) * step));
    record((k + 1) * step);
  }
  res.scalars["x_norm_final"] = xt.norm();
  return res;
}

}  // namespace cotrack
