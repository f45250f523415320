#include "dpilqr/graph.hpp"

#include <algorithm>

namespace dpilqr {

bool InteractionGraph::has_edge(int i, int j) const {
  if (i == j) return false;
  const auto& nbrs = neighborhoods[i];
  return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

InteractionGraph make_graph(int n_agents,
                            std::vector<std::pair<int, int>> edges) {
  InteractionGraph g;
  g.n_agents = n_agents;
  g.neighborhoods.assign(n_agents, {});
  for (auto& [i, j] : edges) {
    if (i == j) throw ConfigError("interaction graph: self-loop");
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= n_agents) {
      throw ConfigError("interaction graph: edge index out of range");
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const auto& [i, j] : edges) {
    g.neighborhoods[i].push_back(j);
    g.neighborhoods[j].push_back(i);
  }
  for (auto& nbrs : g.neighborhoods) std::sort(nbrs.begin(), nbrs.end());
  g.edges = std::move(edges);
  return g;
}

InteractionGraph build_graph(const JointTrajectory& predicted,
                             const JointDynamics& dyn, double d_prox,
                             double alpha) {
  if (alpha < 1.0) {
    throw ConfigError("interaction graph: alpha must be >= 1");
  }
  const int N = dyn.num_agents();
  const int T = predicted.horizon();
  const double threshold = alpha * d_prox;

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      for (int k = 0; k < T; ++k) {
        const Vec x = predicted.states.col(k);
        if ((dyn.agent_position(x, i) - dyn.agent_position(x, j)).norm() <
            threshold) {
          edges.emplace_back(i, j);
          break;
        }
      }
    }
  }
  return make_graph(N, std::move(edges));
}

std::vector<int> subproblem_agents(const InteractionGraph& g, int i) {
  if (i < 0 || i >= g.n_agents) {
    throw ConfigError("subproblem_agents: agent index out of range");
  }
  std::vector<int> agents = g.neighborhoods[i];
  agents.push_back(i);
  std::sort(agents.begin(), agents.end());
  return agents;
}

}  // namespace dpilqr
