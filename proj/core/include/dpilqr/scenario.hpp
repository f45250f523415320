#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dpilqr/planner.hpp"
#include "dpilqr/types.hpp"

namespace dpilqr {

/// Diagonal tracking-weight template expanded per model: q_pos on position
/// coordinates, q_aux on the rest (velocities, heading), R = r * I,
/// Q_f = qf_scale * Q.
struct CostWeights {
  double q_pos = 1.0;
  double q_aux = 0.1;
  double r = 0.1;
  double qf_scale = 100.0;
  double beta = 50.0;
};

struct ScenarioConfig {
  int n_agents = 2;
  std::string model = "double_integrator";
  double dt = 0.1;
  int horizon = 40;
  double d_prox = 0.5;
  double alpha = 1.5;
  std::uint64_t seed = 0;
  int n_steps = 100;
  std::vector<double> workspace_min;  // defaults per model dimension
  std::vector<double> workspace_max;
  double min_separation = 0.0;  // effective max(2 * d_prox, this)
  double goal_tolerance = 0.1;
  CostWeights weights;
  SolverOptions solver;
  std::optional<double> budget_s;
  BudgetScope budget_scope = BudgetScope::PerAgent;

  /// Fills workspace bounds for the model dimension if unset and validates
  /// every field; throws ConfigError naming the offending entry.
  void resolve_and_validate();
};

struct Scenario {
  ScenarioConfig config;
  Vec x0;                  // joint initial state
  std::vector<Vec> goals;  // per-agent goal states
};

/// Rejection-sample start and goal positions in the workspace with pairwise
/// separation >= max(2*d_prox, min_separation); zero initial velocities.
/// Deterministic given the seed. Throws ConfigError if 10,000 consecutive
/// samples are rejected (workspace too small).
Scenario generate_scenario(const ScenarioConfig& cfg);

/// Per-agent diagonal tracking costs from the weight template and goals.
std::vector<TrackingCost> build_tracking_costs(
    const std::vector<ModelPtr>& models, const std::vector<Vec>& goals,
    const CostWeights& weights);

/// Planner over the generated scenario with its configured options.
Planner build_planner(const Scenario& scenario, int jobs = 1);

}  // namespace dpilqr
