#pragma once

#include <optional>
#include <vector>

#include "dpilqr/costs.hpp"
#include "dpilqr/dynamics.hpp"
#include "dpilqr/graph.hpp"
#include "dpilqr/ilqr.hpp"
#include "dpilqr/types.hpp"

namespace dpilqr {

enum class PlannerKind { Centralized, Distributed };

/// How a per-step wall-clock budget is shared in distributed mode: each
/// subproblem gets the full allowance, or all subproblems of one step share
/// a single deadline.
enum class BudgetScope { PerAgent, Global };

struct CostParams {
  std::vector<TrackingCost> tracking;  // one per agent, agent-index order
  ProximityCost coupling{50.0, 0.5};
};

struct PlannerOptions {
  SolverOptions solver;
  double alpha = 1.5;
  std::optional<double> step_budget_s;
  BudgetScope budget_scope = BudgetScope::PerAgent;
  /// Worker threads for the per-agent solves; 1 = serial, 0 = hardware
  /// concurrency.
  int jobs = 1;
  /// An agent counts as arrived when its position is within this of the
  /// goal position.
  double goal_tolerance = 0.1;
  double divergence_bound = 1e4;
};

/// One agent's local problem: the members of its neighborhood plus itself,
/// coupled only through pairs that contain the owner.
struct Subproblem {
  int owner = 0;
  std::vector<int> agents;  // global ids, sorted, owner included
  JointDynamics dyn;
  PotentialSpec spec;
  Vec x0;
  Mat u_init;
};

/// Rolling planner state: the true joint state, each agent's communicated
/// plan for itself (the bulletin), each agent's full-system prediction, and
/// warm-start bookkeeping.
struct PlannerState {
  Vec current_state;
  std::vector<Mat> self_plan_states;    // per agent, n_i x (T+1)
  std::vector<Mat> self_plan_controls;  // per agent, m_i x T
  std::vector<JointTrajectory> predictions;  // per agent, full system
  std::vector<std::vector<int>> prev_agents;  // last subproblem membership
  std::vector<Mat> prev_controls;             // last local solution (stacked)
  Mat prev_central_controls;
  std::vector<Vec> applied_controls;
  int step_count = 0;
};

struct StepMetrics {
  std::vector<double> solve_times;  // one entry per solve
  std::vector<int> iterations;
  std::vector<char> converged;
  std::vector<char> fallback;
  std::vector<int> subproblem_sizes;
  std::vector<double> solve_costs;
  int n_edges = 0;
  double graph_time_s = 0.0;
  double min_distance = 0.0;  // pairwise, at the post-step state
};

struct StepResult {
  Vec joint_control;
  std::vector<SolveReport> reports;
  StepMetrics metrics;
};

struct SimulationTrace {
  Mat states;    // n x (steps_taken + 1)
  Mat controls;  // m x steps_taken
  std::vector<StepMetrics> steps;
  int steps_taken = 0;
  bool diverged = false;
  bool goal_reached = false;
  double min_pairwise_distance = 0.0;
  std::vector<double> final_goal_distances;
  double wall_time_s = 0.0;
};

/// Receding-horizon planner over a fixed multi-agent problem. Immutable
/// once constructed; all evolving data lives in PlannerState, so separate
/// states may be advanced concurrently.
class Planner {
 public:
  Planner(JointDynamics dyn, CostParams costs, double dt, int horizon,
          PlannerOptions opts);

  const JointDynamics& dynamics() const { return dyn_; }
  const CostParams& costs() const { return costs_; }
  const PlannerOptions& options() const { return opts_; }
  double dt() const { return dt_; }
  int horizon() const { return horizon_; }

  /// Bootstrap: every agent's plan is a neutral-control rollout from x0.
  PlannerState init(const Vec& x0) const;

  /// One distributed step: build the interaction graph from the
  /// communicated plans, solve every agent's subproblem independently,
  /// execute each agent's own first control, then refresh plans and
  /// predictions. A failed subproblem falls back to that agent's previous
  /// plan shifted by one step.
  StepResult dp_ilqr_step(PlannerState& state) const;

  /// One centralized step: a single solve of the full potential,
  /// warm-started from the previous solution shifted by one step.
  StepResult centralized_step(PlannerState& state) const;

  /// Exposed for inspection/tests.
  InteractionGraph current_graph(const PlannerState& state) const;
  Subproblem assemble_subproblem(const PlannerState& state,
                                 const InteractionGraph& graph, int owner) const;

  double goal_distance(const Vec& joint_state, int agent) const;
  bool all_at_goals(const Vec& joint_state) const;
  double min_pairwise_distance(const Vec& joint_state) const;

 private:
  StepResult finish_step(PlannerState& state, const Vec& joint_control,
                         StepMetrics metrics,
                         std::vector<SolveReport> reports) const;

  JointDynamics dyn_;
  CostParams costs_;
  double dt_;
  int horizon_;
  PlannerOptions opts_;
  PotentialSpec central_spec_;
};

/// Run `n_steps` receding-horizon steps (or stop early once every agent is
/// within goal tolerance, or on divergence).
SimulationTrace run_receding_horizon(const Planner& planner, PlannerKind kind,
                                     const Vec& x0, int n_steps);

}  // namespace dpilqr
