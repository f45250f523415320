#pragma once

#include <utility>
#include <vector>

#include "dpilqr/dynamics.hpp"
#include "dpilqr/types.hpp"

namespace dpilqr {

/// Undirected proximity graph over agent indices. Edges are stored as
/// (i, j) with i < j; neighborhoods are sorted and derived from the edges.
struct InteractionGraph {
  int n_agents = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> neighborhoods;

  bool has_edge(int i, int j) const;
  int num_edges() const { return static_cast<int>(edges.size()); }
};

InteractionGraph make_graph(int n_agents,
                            std::vector<std::pair<int, int>> edges);

/// Edge (i, j) iff the predicted positions come strictly closer than
/// alpha * d_prox at any step k in [0, T). The terminal state is excluded.
/// alpha must be >= 1.
InteractionGraph build_graph(const JointTrajectory& predicted,
                             const JointDynamics& dyn, double d_prox,
                             double alpha);

/// The membership of agent i's subproblem: its neighborhood plus itself,
/// sorted by agent index.
std::vector<int> subproblem_agents(const InteractionGraph& g, int i);

}  // namespace dpilqr
