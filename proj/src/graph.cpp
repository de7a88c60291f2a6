#include "cotrack/graph.hpp"

#include <queue>
#include <stdexcept>
#include <vector>

namespace cotrack {

void AugmentedGraph::validate() const {
  const int n = size();
  if (n <= 0) throw std::invalid_argument("graph: need at least one follower");
  if (adjacency.rows() != n || adjacency.cols() != n)
    throw std::invalid_argument("graph: adjacency must be N x N");
  for (int i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0)
      throw std::invalid_argument("graph: adjacency diagonal must be zero");
    if (pinning(i) < 0.0)
      throw std::invalid_argument("graph: negative pinning weight");
    for (int j = 0; j < n; ++j)
      if (adjacency(i, j) < 0.0)
        throw std::invalid_argument("graph: negative adjacency weight");
  }
}

GraphMatrices build_matrices(const AugmentedGraph& g) {
  g.validate();
  const int n = g.size();
  GraphMatrices m;
  m.laplacian = -g.adjacency;
  for (int i = 0; i < n; ++i) m.laplacian(i, i) = g.adjacency.row(i).sum();
  m.pinning_diag = g.pinning.asDiagonal();
  m.h = m.laplacian + m.pinning_diag;
  return m;
}

bool has_leader_spanning_tree(const AugmentedGraph& g) {
  g.validate();
  const int n = g.size();
  std::vector<char> seen(n, 0);
  std::queue<int> frontier;
  for (int i = 0; i < n; ++i)
    if (g.pinning(i) > 0.0) {
      seen[i] = 1;
      frontier.push(i);
    }
  while (!frontier.empty()) {
    const int j = frontier.front();
    frontier.pop();
    // edge j -> i exists when a_ij > 0
    for (int i = 0; i < n; ++i)
      if (!seen[i] && g.adjacency(i, j) > 0.0) {
        seen[i] = 1;
        frontier.push(i);
      }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) return false;
  return true;
}

bool is_nonsingular_m_matrix(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) return false;
  const int n = static_cast<int>(a.rows());
  const double tol = 1e-9 * std::max(1.0, a.cwiseAbs().colwise().sum().maxCoeff());
  for (int i = 0; i < n; ++i) {
    if (a(i, i) <= 0.0) return false;
    for (int j = 0; j < n; ++j)
      if (i != j && a(i, j) > 0.0) return false;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  return (es.eigenvalues().real().array() > tol).all();
}

}  // namespace cotrack
