#pragma once

#include <Eigen/Dense>

namespace cotrack {

/// Follower digraph plus leader pinning edges. adjacency(i,j) = a_ij is the
/// weight of the edge j -> i between followers; pinning(i) = a_i0 is the
/// weight of the leader edge into follower i.
struct AugmentedGraph {
  Eigen::MatrixXd adjacency;  // N x N, zero diagonal, entries >= 0
  Eigen::VectorXd pinning;    // N, entries >= 0

  int size() const { return static_cast<int>(pinning.size()); }

  /// Throws std::invalid_argument on shape mismatch, negative weights, or a
  /// nonzero diagonal.
  void validate() const;
};

struct GraphMatrices {
  Eigen::MatrixXd laplacian;     // L
  Eigen::MatrixXd pinning_diag;  // G
  Eigen::MatrixXd h;             // H = L + G
};

/// L, G and H = L + G of the augmented graph.
GraphMatrices build_matrices(const AugmentedGraph& g);

/// True iff every follower is reachable from the leader node along directed
/// edges (breadth-first search on the in-neighbor convention).
bool has_leader_spanning_tree(const AugmentedGraph& g);

/// Nonsingular M-matrix test: nonpositive off-diagonals, positive diagonal,
/// and all eigenvalues in the open right half plane. Eigenvalue positivity is
/// tested to a tolerance of 1e-9 relative to the matrix 1-norm, so boundary
/// (singular) M-matrices report false.
bool is_nonsingular_m_matrix(const Eigen::MatrixXd& a);

}  // namespace cotrack
