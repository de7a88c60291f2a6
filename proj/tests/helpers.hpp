#pragma once

#include <random>

#include "cotrack/graph.hpp"

namespace cotrack::testing {

/// Random digraph over n followers that always keeps a directed spanning tree
/// rooted at the leader: node 0 is pinned and node k attaches below some
/// earlier node, then extra edges are sprinkled on top.
inline AugmentedGraph random_spanning_graph(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> weight(0.2, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  AugmentedGraph g;
  g.adjacency = Eigen::MatrixXd::Zero(n, n);
  g.pinning = Eigen::VectorXd::Zero(n);
  g.pinning(0) = weight(rng);
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> parent(0, i - 1);
    g.adjacency(i, parent(rng)) = weight(rng);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && coin(rng) < 0.15) g.adjacency(i, j) = weight(rng);
  for (int i = 0; i < n; ++i)
    if (coin(rng) < 0.2) g.pinning(i) = weight(rng);
  return g;
}

/// The four-follower demonstration topology.
inline AugmentedGraph demo_graph() {
  AugmentedGraph g;
  g.adjacency = Eigen::MatrixXd::Zero(4, 4);
  g.adjacency(0, 3) = 1;
  g.adjacency(1, 0) = 1;
  g.adjacency(1, 2) = 1;
  g.adjacency(2, 1) = 1;
  g.adjacency(3, 1) = 1;
  g.adjacency(3, 2) = 1;
  g.pinning = Eigen::VectorXd::Zero(4);
  g.pinning(0) = 1;
  return g;
}

inline Eigen::MatrixXd demo_h() {
  Eigen::MatrixXd h(4, 4);
  h << 2, 0, 0, -1,
      -1, 2, -1, 0,
       0, -1, 1, 0,
       0, -1, -1, 2;
  return h;
}

}  // namespace cotrack::testing
