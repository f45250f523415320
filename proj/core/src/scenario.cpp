#include "dpilqr/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace dpilqr {
namespace {

std::vector<Vec> sample_separated_positions(Rng& rng, int count,
                                            const std::vector<double>& lo,
                                            const std::vector<double>& hi,
                                            double min_separation) {
  const int dim = static_cast<int>(lo.size());
  std::vector<Vec> placed;
  placed.reserve(count);
  int rejections = 0;
  while (static_cast<int>(placed.size()) < count) {
    Vec p(dim);
    for (int d = 0; d < dim; ++d) p[d] = rng.uniform(lo[d], hi[d]);
    bool ok = true;
    for (const Vec& q : placed) {
      if ((p - q).norm() < min_separation) {
        ok = false;
        break;
      }
    }
    if (ok) {
      placed.push_back(std::move(p));
    } else if (++rejections >= 10000) {
      throw ConfigError(
          "scenario generation: workspace cannot fit " +
          std::to_string(count) + " agents with separation >= " +
          std::to_string(min_separation) + " (10000 samples rejected)");
    }
  }
  return placed;
}

Vec make_state(const ModelPtr& model, const Vec& position, double heading) {
  Vec x = Vec::Zero(model->state_dim());
  x.head(model->position_dim()) = position;
  if (model->name() == "unicycle") x[2] = heading;
  return x;
}

}  // namespace

void ScenarioConfig::resolve_and_validate() {
  const ModelPtr model_ptr = make_model(model);  // validates the key
  const int dim = model_ptr->position_dim();

  if (workspace_min.empty() && workspace_max.empty()) {
    workspace_min.assign(dim, 0.0);
    workspace_max.assign(dim, 10.0);
    if (dim == 3) workspace_max[2] = 4.0;
  }
  if (static_cast<int>(workspace_min.size()) != dim ||
      static_cast<int>(workspace_max.size()) != dim) {
    throw ConfigError("workspace bounds must have " + std::to_string(dim) +
                      " coordinates for model '" + model + "'");
  }
  for (int d = 0; d < dim; ++d) {
    if (workspace_min[d] >= workspace_max[d]) {
      throw ConfigError("workspace: min must be strictly below max");
    }
  }
  if (n_agents < 1) throw ConfigError("n_agents must be >= 1");
  if (dt <= 0.0) throw ConfigError("dt must be positive");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
  if (d_prox <= 0.0) throw ConfigError("d_prox must be positive");
  if (alpha < 1.0) throw ConfigError("alpha must be >= 1");
  if (goal_tolerance <= 0.0) throw ConfigError("goal_tolerance must be positive");
  if (min_separation < 0.0) throw ConfigError("min_separation must be >= 0");
  if (weights.beta <= 0.0) throw ConfigError("beta must be positive");
  if (weights.r <= 0.0) throw ConfigError("cost weight r must be positive");
  if (weights.q_pos < 0.0 || weights.q_aux < 0.0 || weights.qf_scale < 0.0) {
    throw ConfigError("cost weights must be non-negative");
  }
  if (budget_s && *budget_s <= 0.0) throw ConfigError("budget must be positive");
  if (solver.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (solver.convergence_tol <= 0.0) throw ConfigError("convergence_tol must be positive");
}

Scenario generate_scenario(const ScenarioConfig& raw) {
  ScenarioConfig cfg = raw;
  cfg.resolve_and_validate();
  const ModelPtr model = make_model(cfg.model);
  const double separation = std::max(2.0 * cfg.d_prox, cfg.min_separation);

  Rng rng(cfg.seed);
  const auto starts = sample_separated_positions(
      rng, cfg.n_agents, cfg.workspace_min, cfg.workspace_max, separation);
  const auto goal_positions = sample_separated_positions(
      rng, cfg.n_agents, cfg.workspace_min, cfg.workspace_max, separation);

  Scenario scenario;
  scenario.config = cfg;
  scenario.x0.resize(cfg.n_agents * model->state_dim());
  scenario.goals.reserve(cfg.n_agents);
  for (int i = 0; i < cfg.n_agents; ++i) {
    const Vec to_goal = goal_positions[i] - starts[i];
    const double heading = std::atan2(to_goal[1], to_goal[0]);
    scenario.x0.segment(i * model->state_dim(), model->state_dim()) =
        make_state(model, starts[i], heading);
    scenario.goals.push_back(make_state(model, goal_positions[i], heading));
  }
  return scenario;
}

std::vector<TrackingCost> build_tracking_costs(
    const std::vector<ModelPtr>& models, const std::vector<Vec>& goals,
    const CostWeights& weights) {
  if (models.size() != goals.size()) {
    throw ConfigError("build_tracking_costs: one goal per model required");
  }
  std::vector<TrackingCost> out;
  out.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    Vec q_diag = Vec::Constant(m->state_dim(), weights.q_aux);
    q_diag.head(m->position_dim()).setConstant(weights.q_pos);
    const Mat Q = q_diag.asDiagonal();
    const Mat R = weights.r * Mat::Identity(m->control_dim(), m->control_dim());
    out.push_back(make_tracking_cost(Q, R, weights.qf_scale * Q, goals[i],
                                     m->neutral_control()));
  }
  return out;
}

Planner build_planner(const Scenario& scenario, int jobs) {
  const ScenarioConfig& cfg = scenario.config;
  std::vector<ModelPtr> models(cfg.n_agents, make_model(cfg.model));
  JointDynamics dyn(models);

  CostParams costs;
  costs.tracking = build_tracking_costs(models, scenario.goals, cfg.weights);
  costs.coupling = ProximityCost{cfg.weights.beta, cfg.d_prox};

  PlannerOptions opts;
  opts.solver = cfg.solver;
  opts.alpha = cfg.alpha;
  opts.step_budget_s = cfg.budget_s;
  opts.budget_scope = cfg.budget_scope;
  opts.jobs = jobs;
  opts.goal_tolerance = cfg.goal_tolerance;
  return Planner(std::move(dyn), std::move(costs), cfg.dt, cfg.horizon, opts);
}

}  // namespace dpilqr
