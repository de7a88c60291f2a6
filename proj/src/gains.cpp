#include "cotrack/gains.hpp"

#include <algorithm>
#include <random>

#include "cotrack/graph.hpp"

namespace cotrack {

namespace {

constexpr double kDistinctGap = 1e-8;  // relative eigenvalue gap for DH

bool positive_leading_minors(const Eigen::MatrixXd& h) {
  for (int k = 1; k <= h.rows(); ++k)
    if (h.topLeftCorner(k, k).determinant() <= 0.0) return false;
  return true;
}

bool spd(const Eigen::MatrixXd& s, double tol) {
  if (!s.isApprox(s.transpose(), 1e-12)) return false;
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym - tol * Eigen::MatrixXd::Identity(s.rows(), s.cols()));
  return llt.info() == Eigen::Success;
}

}  // namespace

double min_symmetric_eigenvalue(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
  return es.eigenvalues().minCoeff();
}

double spectral_norm(const Eigen::MatrixXd& a) {
  return a.jacobiSvd().singularValues().maxCoeff();
}

DCertificate certify_d(const Eigen::MatrixXd& h, const Eigen::VectorXd& d_diag) {
  DCertificate cert;
  const Eigen::MatrixXd dh = d_diag.asDiagonal() * h;
  Eigen::EigenSolver<Eigen::MatrixXd> es(dh, /*computeEigenvectors=*/false);
  Eigen::VectorXd re = es.eigenvalues().real();
  std::sort(re.data(), re.data() + re.size());
  cert.eigenvalues = re;
  cert.max_imag = es.eigenvalues().imag().cwiseAbs().maxCoeff();
  const double scale = std::max(1e-300, re.cwiseAbs().maxCoeff());
  cert.min_rel_gap = 1.0;
  for (int i = 0; i + 1 < re.size(); ++i)
    cert.min_rel_gap = std::min(cert.min_rel_gap, (re[i + 1] - re[i]) / scale);
  if (re.size() == 1) cert.min_rel_gap = 1.0;
  cert.ok = cert.max_imag <= 1e-9 * scale && re.minCoeff() > 0.0 &&
            cert.min_rel_gap > kDistinctGap;
  return cert;
}

namespace {

// Numerical quality of a certifying scaling. Two things feed the
// certification margins of W, P and Q downstream: the eigenvalue spread of
// DH (tiny eigenvalues flatten Q) and the conditioning of its eigenvector
// basis (W = V^-T V^-1 squares cond(V)). A nearly defective basis is
// penalized even when the eigenvalues themselves are well separated.
double d_quality(const Eigen::MatrixXd& h, const Eigen::VectorXd& dd) {
  const DCertificate c = certify_d(h, dd);
  if (!c.ok) return -1.0;
  const Eigen::MatrixXd dh = dd.asDiagonal() * h;
  const Eigen::EigenSolver<Eigen::MatrixXd> es(dh);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(es.eigenvectors().real());
  const double cond = svd.singularValues()(0) /
                      std::max(1e-300, svd.singularValues().tail(1)(0));
  const double spread = c.eigenvalues.minCoeff() / c.eigenvalues.maxCoeff();
  return spread / (1.0 + 1e-6 * cond * cond);
}

// The halving search stops at the first scaling that certifies, which can be
// orders of magnitude smaller than necessary; tiny entries square into the
// conditioning of the downstream Lyapunov matrices. Grow shrunken entries
// back toward 1 as long as certification holds and the quality does not
// degrade.
Eigen::VectorXd rebalance_d(const Eigen::MatrixXd& h, Eigen::VectorXd d) {
  const auto quality = [&](const Eigen::VectorXd& dd) {
    return d_quality(h, dd);
  };
  double best = quality(d);
  for (int sweep = 0; sweep < 64; ++sweep) {
    bool improved = false;
    for (int i = 0; i < d.size(); ++i) {
      if (d[i] >= 1.0) continue;
      Eigen::VectorXd cand = d;
      cand[i] = std::min(1.0, 2.0 * d[i]);
      const double q = quality(cand);
      if (q >= best) {
        d = cand;
        best = q;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return d;
}

}  // namespace

Eigen::VectorXd synthesize_d(const Eigen::MatrixXd& h, unsigned seed) {
  const int n = static_cast<int>(h.rows());
  if (!positive_leading_minors(h))
    throw NotMMatrix("synthesize_d: H lacks positive leading principal minors");

  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  if (d_quality(h, d) >= 1e-3) return d;

  // Recursive scaling: with the leading (k-1)-block certified, shrink d_k
  // until the k-block spectrum is real, positive and distinct again. The new
  // eigenvalue enters near d_k times the k-th Schur complement, which is
  // positive for an M-matrix, so a small enough d_k always exists.
  d.setOnes();
  bool ok = true;
  for (int k = 2; k <= n && ok; ++k) {
    ok = false;
    double dk = 1.0;
    for (int halvings = 0; halvings < 200; ++halvings) {
      d[k - 1] = dk;
      if (certify_d(h.topLeftCorner(k, k), d.head(k)).ok) {
        ok = true;
        break;
      }
      dk *= 0.5;
    }
  }
  const auto quality = [&](const Eigen::VectorXd& dd) {
    return d_quality(h, dd);
  };

  Eigen::VectorXd best_d;
  double best_q = -1.0;
  {
    const double q_ones = quality(Eigen::VectorXd::Ones(n));
    if (q_ones > 0.0) {
      best_d = Eigen::VectorXd::Ones(n);
      best_q = q_ones;
    }
  }
  if (ok && certify_d(h, d).ok) {
    const Eigen::VectorXd cand = rebalance_d(h, d);
    const double q = quality(cand);
    if (q > best_q) {
      best_d = cand;
      best_q = q;
    }
  }

  // The one-entry-at-a-time ladder can be forced into an extreme scaling
  // (a complex pair that only splits for tiny d_k) even when jointly varied
  // entries certify with a far better spread. If the spectrum came out badly
  // flattened, search for a better-conditioned scaling.
  if (best_q < 1e-3) {
    std::mt19937 rng(seed + 0x9e3779b9u);
    std::uniform_real_distribution<double> log_u(-3.0, 3.0);
    for (int trial = 0; trial < 5000; ++trial) {
      Eigen::VectorXd cand(n);
      for (int i = 0; i < n; ++i) cand[i] = std::pow(10.0, log_u(rng));
      const double q = quality(cand);
      if (q > best_q) {
        best_q = q;
        best_d = cand;
      }
      if (best_q >= 1e-2 && trial >= 500) break;
    }
    if (best_q > 0.0) best_d = rebalance_d(h, best_d);
  }

  if (best_q > 0.0) return best_d;
  throw SynthesisFailed("synthesize_d: search budget exhausted");
}

Eigen::MatrixXd synthesize_w(const Eigen::MatrixXd& dh) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(dh);
  const double scale = std::max(1e-300, es.eigenvalues().real().cwiseAbs().maxCoeff());
  if (es.eigenvalues().imag().cwiseAbs().maxCoeff() > 1e-7 * scale ||
      es.eigenvalues().real().minCoeff() <= 0.0)
    throw NotDiagonalizable("synthesize_w: DH eigenvalues not real positive");
  const Eigen::MatrixXd v = es.eigenvectors().real();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v);
  const double cond = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
  if (!(cond < 1e10))
    throw NotDiagonalizable("synthesize_w: eigenvector matrix ill-conditioned");
  const Eigen::MatrixXd v_inv = v.inverse();
  Eigen::MatrixXd w = v_inv.transpose() * v_inv;
  w = (0.5 * (w + w.transpose())).eval();
  const double tol = 1e-12 * spectral_norm(w);
  if (!spd(w, tol) || !spd(0.5 * (w * dh + dh.transpose() * w), tol))
    throw CertificationFailed("synthesize_w: W or WDH failed the SPD check");
  return w;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> compute_p_q(const Eigen::MatrixXd& w,
                                                        const Eigen::MatrixXd& d,
                                                        const Eigen::MatrixXd& h) {
  const Eigen::MatrixXd dh = d * h;
  Eigen::MatrixXd p = w * dh;
  p = (0.5 * (p + p.transpose())).eval();
  Eigen::MatrixXd q = p * dh + dh.transpose() * p;
  q = (0.5 * (q + q.transpose())).eval();
  // PD margin at roundoff scale: badly conditioned D scalings can push
  // lambda_min(Q) many orders below ||Q|| while Q stays genuinely PD
  const double tol_p = 1e-13 * std::max(1.0, spectral_norm(p));
  const double tol_q = 1e-13 * std::max(1.0, spectral_norm(q));
  if (!spd(p, tol_p) || !spd(q, tol_q))
    throw CertificationFailed("compute_p_q: P or Q failed the SPD check");
  return {p, q};
}

Eigen::VectorXd synthesize_b(const Eigen::MatrixXd& d, const Eigen::MatrixXd& h,
                             unsigned seed) {
  const int n = static_cast<int>(h.rows());
  const Eigen::MatrixXd dh = d * h;
  const auto certify = [&](const Eigen::VectorXd& b_diag) {
    if ((b_diag.array() <= 0.0).any()) return false;
    const Eigen::MatrixXd hbar =
        b_diag.asDiagonal() * dh + dh.transpose() * b_diag.asDiagonal();
    return min_symmetric_eigenvalue(hbar) > 1e-12 * spectral_norm(hbar);
  };

  // b_i = e_i / u_i with u = (DH)^-1 1 and e = (DH)^-T 1. Then Hbar has
  // nonpositive off-diagonals and Hbar u > 0 with u > 0, so it is a symmetric
  // nonsingular M-matrix, hence positive definite.
  const Eigen::VectorXd u = dh.lu().solve(Eigen::VectorXd::Ones(n));
  const Eigen::VectorXd e = dh.transpose().lu().solve(Eigen::VectorXd::Ones(n));
  if ((u.array() > 0.0).all() && (e.array() > 0.0).all()) {
    const Eigen::VectorXd b = e.cwiseQuotient(u);
    if (certify(b)) return b;
  }

  std::mt19937 rng(seed + 0x2545f491u);
  std::uniform_real_distribution<double> log_u(-3.0, 3.0);
  Eigen::VectorXd b(n);
  for (int trial = 0; trial < 5000; ++trial) {
    for (int i = 0; i < n; ++i) b[i] = std::pow(10.0, log_u(rng));
    if (certify(b)) return b;
  }
  throw SynthesisFailed("synthesize_b: search budget exhausted");
}

void spectral_constants(GainSet& gs, const Eigen::MatrixXd& h) {
  const Eigen::MatrixXd dh = gs.d * h;
  gs.lambda_q = min_symmetric_eigenvalue(gs.q);
  gs.lambda_h = min_symmetric_eigenvalue(gs.h_bar);
  gs.b_min = gs.b.diagonal().minCoeff();
  gs.b_max = gs.b.diagonal().maxCoeff();
  gs.norm_p = spectral_norm(gs.p);
  gs.norm_w = spectral_norm(gs.w);
  gs.norm_dh = spectral_norm(dh);
  gs.norm_bdh = spectral_norm(gs.b * dh);
}

GainSet gains_for_d(const Eigen::MatrixXd& h, const Eigen::VectorXd& d_diag,
                    unsigned seed) {
  const DCertificate cert = certify_d(h, d_diag);
  if (!cert.ok)
    throw CertificationFailed(
        "gains_for_d: spectrum of DH is not real, positive, and distinct");
  GainSet gs;
  gs.d = d_diag.asDiagonal();
  gs.w = synthesize_w(gs.d * h);
  std::tie(gs.p, gs.q) = compute_p_q(gs.w, gs.d, h);
  const Eigen::VectorXd b_diag = synthesize_b(gs.d, h, seed);
  gs.b = b_diag.asDiagonal();
  const Eigen::MatrixXd dh = gs.d * h;
  gs.h_bar = gs.b * dh + dh.transpose() * gs.b;
  spectral_constants(gs, h);
  if (gs.lambda_q <= 0.0 || gs.lambda_h <= 0.0)
    throw CertificationFailed("gains_for_d: nonpositive lambda_q or lambda_h");
  return gs;
}

GainSet synthesize_gains(const Eigen::MatrixXd& h, unsigned seed) {
  GainSet gs;
  const Eigen::VectorXd d_diag = synthesize_d(h, seed);
  gs.d = d_diag.asDiagonal();
  gs.w = synthesize_w(gs.d * h);
  std::tie(gs.p, gs.q) = compute_p_q(gs.w, gs.d, h);
  const Eigen::VectorXd b_diag = synthesize_b(gs.d, h, seed);
  gs.b = b_diag.asDiagonal();
  const Eigen::MatrixXd dh = gs.d * h;
  gs.h_bar = gs.b * dh + dh.transpose() * gs.b;
  spectral_constants(gs, h);
  if (gs.lambda_q <= 0.0 || gs.lambda_h <= 0.0)
    throw CertificationFailed("synthesize_gains: nonpositive lambda_q or lambda_h");
  return gs;
}

}  // namespace cotrack
