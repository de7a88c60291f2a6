#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

namespace cotrack {

struct NotMMatrix : std::runtime_error {
  explicit NotMMatrix(const std::string& what) : std::runtime_error(what) {}
};
struct SynthesisFailed : std::runtime_error {
  explicit SynthesisFailed(const std::string& what) : std::runtime_error(what) {}
};
struct NotDiagonalizable : std::runtime_error {
  explicit NotDiagonalizable(const std::string& what) : std::runtime_error(what) {}
};
struct CertificationFailed : std::runtime_error {
  explicit CertificationFailed(const std::string& what) : std::runtime_error(what) {}
};

/// Certified graph Lyapunov-equation data: positive diagonal D and B, the
/// symmetric positive definite W, P = WDH, Q = PDH + H'DP, Hbar = BDH + H'DB,
/// and the spectral constants used by the observer bounds.
struct GainSet {
  Eigen::MatrixXd d;      // positive diagonal
  Eigen::MatrixXd w;      // symmetric positive definite
  Eigen::MatrixXd p;      // WDH
  Eigen::MatrixXd q;      // PDH + H'DP
  Eigen::MatrixXd b;      // positive diagonal
  Eigen::MatrixXd h_bar;  // BDH + H'DB
  double lambda_q = 0;    // smallest eigenvalue of Q
  double lambda_h = 0;    // smallest eigenvalue of Hbar
  double b_min = 0;
  double b_max = 0;
  double norm_p = 0;    // induced 2-norms
  double norm_w = 0;
  double norm_dh = 0;
  double norm_bdh = 0;
};

/// Spectrum certificate for a candidate D: eigenvalues of DH must be real,
/// positive, and pairwise distinct (relative gap > 1e-8).
struct DCertificate {
  bool ok = false;
  Eigen::VectorXd eigenvalues;  // sorted real parts
  double max_imag = 0;
  double min_rel_gap = 0;
};

DCertificate certify_d(const Eigen::MatrixXd& h, const Eigen::VectorXd& d_diag);

/// Finds a positive diagonal D making the spectrum of DH real, positive and
/// distinct. Tries D = I, then recursive Fisher-Fuller-style scaling of the
/// leading blocks, then a seeded random log-uniform search.
Eigen::VectorXd synthesize_d(const Eigen::MatrixXd& h, unsigned seed = 0);

/// Symmetric positive definite W with WDH symmetric positive definite, built
/// from the eigendecomposition DH = V Lambda V^-1 as W = V^-T V^-1.
Eigen::MatrixXd synthesize_w(const Eigen::MatrixXd& dh);

/// P = WDH and Q = PDH + H'DP, both certified symmetric positive definite.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> compute_p_q(const Eigen::MatrixXd& w,
                                                        const Eigen::MatrixXd& d,
                                                        const Eigen::MatrixXd& h);

/// Positive diagonal B with BDH + H'DB symmetric positive definite. Primary
/// candidate b_i = e_i / d_i with d = (DH)^-1 1 and e = (DH)^-T 1; seeded
/// random search as fallback.
Eigen::VectorXd synthesize_b(const Eigen::MatrixXd& d, const Eigen::MatrixXd& h,
                             unsigned seed = 0);

/// Fills lambda_q, lambda_h, b_min, b_max and the norms of an otherwise
/// complete GainSet.
void spectral_constants(GainSet& gs, const Eigen::MatrixXd& h);

/// Full pipeline: D, W, P, Q, B, Hbar plus constants, all certified.
GainSet synthesize_gains(const Eigen::MatrixXd& h, unsigned seed = 0);

/// Same pipeline for a caller-supplied D; throws CertificationFailed if the
/// spectrum of DH is not real, positive, and distinct.
GainSet gains_for_d(const Eigen::MatrixXd& h, const Eigen::VectorXd& d_diag,
                    unsigned seed = 0);

/// Smallest eigenvalue of a symmetric matrix.
double min_symmetric_eigenvalue(const Eigen::MatrixXd& s);

/// Induced 2-norm (largest singular value).
double spectral_norm(const Eigen::MatrixXd& a);

}  // namespace cotrack
