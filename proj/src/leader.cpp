#include "cotrack/leader.hpp"

#include <cmath>

namespace cotrack {

void LeaderParams::validate() const {
  if (omega.size() < 1) throw std::invalid_argument("leader: empty omega");
  if (!omega.allFinite() || !v0.allFinite() || !e_out.allFinite())
    throw std::invalid_argument("leader: non-finite entries");
  if (v0.size() != m()) throw std::invalid_argument("leader: v0 length must be 2l");
  if (e_out.cols() != m())
    throw std::invalid_argument("leader: E must have 2l columns");
}

Eigen::MatrixXd s_matrix(const Eigen::VectorXd& omega) {
  const int l = static_cast<int>(omega.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * l, 2 * l);
  for (int k = 0; k < l; ++k) {
    s(2 * k, 2 * k + 1) = omega[k];
    s(2 * k + 1, 2 * k) = -omega[k];
  }
  return s;
}

Eigen::MatrixXd phi(const Eigen::VectorXd& x) {
  if (x.size() % 2 != 0) throw OddLength("phi: input length must be even");
  const int l = static_cast<int>(x.size()) / 2;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(l, 2 * l);
  for (int k = 0; k < l; ++k) {
    out(k, 2 * k) = -x[2 * k + 1];
    out(k, 2 * k + 1) = x[2 * k];
  }
  return out;
}

Eigen::VectorXd propagate(const LeaderParams& p, double t) {
  p.validate();
  Eigen::VectorXd v(p.m());
  for (int k = 0; k < p.l(); ++k) {
    const double a = p.v0[2 * k];
    const double b = p.v0[2 * k + 1];
    const double amp = std::hypot(a, b);
    if (amp == 0.0) {
      v[2 * k] = v[2 * k + 1] = 0.0;
      continue;
    }
    const double phase = std::atan2(a, b);  // matches v0 exactly at t = 0
    const double arg = p.omega[k] * t + phase;
    v[2 * k] = amp * std::sin(arg);
    v[2 * k + 1] = amp * std::cos(arg);
  }
  return v;
}

double c_min(const Eigen::VectorXd& v0) {
  const int l = static_cast<int>(v0.size()) / 2;
  double out = std::numeric_limits<double>::infinity();
  for (int k = 0; k < l; ++k)
    out = std::min(out, std::hypot(v0[2 * k], v0[2 * k + 1]));
  return l > 0 ? out : 0.0;
}

PEReport pe_level(const std::vector<Eigen::MatrixXd>& samples, double dt,
                  double window) {
  const int n_win = static_cast<int>(std::lround(window / dt));
  if (samples.size() < 2 || n_win < 1 ||
      n_win + 1 > static_cast<int>(samples.size()))
    throw WindowTooShort("pe_level: window must span at least 2 samples");
  const int s = static_cast<int>(samples.front().rows());

  std::vector<Eigen::MatrixXd> gram(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    gram[i] = samples[i] * samples[i].transpose();

  PEReport rep;
  rep.window = n_win * dt;
  rep.start = 0.0;
  rep.level_low = std::numeric_limits<double>::infinity();
  rep.level_high = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(s, s);
  for (int i = 0; i < n_win; ++i) acc += 0.5 * (gram[i] + gram[i + 1]);
  for (size_t start = 0;; ++start) {
    const Eigen::MatrixXd avg = acc * (dt / rep.window);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(avg);
    rep.level_low = std::min(rep.level_low, es.eigenvalues().minCoeff());
    rep.level_high = std::max(rep.level_high, es.eigenvalues().maxCoeff());
    if (start + n_win + 1 >= samples.size()) break;
    acc += 0.5 * (gram[start + n_win] + gram[start + n_win + 1]);
    acc -= 0.5 * (gram[start] + gram[start + 1]);
  }
  rep.is_pe = rep.level_low > 1e-9;
  return rep;
}

}  // namespace cotrack
