#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace cotrack {

struct OddLength : std::runtime_error {
  explicit OddLength(const std::string& what) : std::runtime_error(what) {}
};
struct WindowTooShort : std::runtime_error {
  explicit WindowTooShort(const std::string& what) : std::runtime_error(what) {}
};

/// Multi-tone exosystem vdot = S(omega) v, y = E v, with m = 2l states.
struct LeaderParams {
  Eigen::VectorXd omega;  // l frequencies, rad/s
  Eigen::MatrixXd e_out;  // n x m output matrix E
  Eigen::VectorXd v0;     // initial state, length m

  int l() const { return static_cast<int>(omega.size()); }
  int m() const { return 2 * l(); }
  int n_out() const { return static_cast<int>(e_out.rows()); }
  void validate() const;
};

/// Persistent-excitation levels of a sampled matrix signal.
struct PEReport {
  double level_low = 0;   // alpha_0
  double level_high = 0;  // alpha_1
  double window = 0;      // T, seconds
  double start = 0;       // T_0, seconds
  bool is_pe = false;
};

/// S(omega): block diagonal of omega_k * [[0,1],[-1,0]]; skew-symmetric.
Eigen::MatrixXd s_matrix(const Eigen::VectorXd& omega);

/// The l x 2l regressor operator: row k holds (-x_{2k}, x_{2k-1}) in columns
/// (2k-1, 2k). Satisfies S(omega) x = -phi(x)^T omega.
Eigen::MatrixXd phi(const Eigen::VectorXd& x);

/// Exact analytic state at time t: each block rotates with constant amplitude
/// C_k = sqrt(v_{2k-1}(0)^2 + v_{2k}(0)^2).
Eigen::VectorXd propagate(const LeaderParams& p, double t);

/// min_k C_k over the blocks of v0; zero iff some block is zero.
double c_min(const Eigen::VectorXd& v0);

/// Windowed-Gram excitation levels over a uniformly sampled series (spacing
/// dt). Trapezoidal quadrature; is_pe when level_low > 1e-9.
PEReport pe_level(const std::vector<Eigen::MatrixXd>& samples, double dt,
                  double window);

}  // namespace cotrack
