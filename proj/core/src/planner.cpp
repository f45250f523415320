#include "dpilqr/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace dpilqr {
namespace {

using detail::parallel_for;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Mat shift_controls(const Mat& controls) {
  Mat shifted(controls.rows(), controls.cols());
  const int T = static_cast<int>(controls.cols());
  shifted.leftCols(T - 1) = controls.rightCols(T - 1);
  shifted.col(T - 1) = controls.col(T - 1);
  return shifted;
}

}  // namespace

Planner::Planner(JointDynamics dyn, CostParams costs, double dt, int horizon,
                 PlannerOptions opts)
    : dyn_(std::move(dyn)),
      costs_(std::move(costs)),
      dt_(dt),
      horizon_(horizon),
      opts_(std::move(opts)) {
  if (static_cast<int>(costs_.tracking.size()) != dyn_.num_agents()) {
    throw ConfigError("planner: one tracking cost per agent required");
  }
  if (horizon_ < 1) throw ConfigError("planner: horizon must be >= 1");
  if (dt_ <= 0.0) throw ConfigError("planner: dt must be positive");
  if (opts_.alpha < 1.0) throw ConfigError("planner: alpha must be >= 1");
  central_spec_ = make_centralized_spec(costs_.tracking, costs_.coupling);
}

PlannerState Planner::init(const Vec& x0) const {
  if (x0.size() != dyn_.state_dim()) {
    throw ConfigError("planner: initial state dimension mismatch");
  }
  const int N = dyn_.num_agents();
  PlannerState st;
  st.current_state = x0;
  st.self_plan_states.resize(N);
  st.self_plan_controls.resize(N);
  st.prev_agents.assign(N, {});
  st.prev_controls.assign(N, Mat());

  for (int i = 0; i < N; ++i) {
    const auto& m = dyn_.model(i);
    JointDynamics solo({m});
    const Mat u0 = m->neutral_control().replicate(1, horizon_);
    const JointTrajectory traj =
        rollout(solo, dyn_.agent_state(x0, i), u0, dt_);
    st.self_plan_states[i] = traj.states;
    st.self_plan_controls[i] = traj.controls;
  }

  JointTrajectory joint;
  joint.states.resize(dyn_.state_dim(), horizon_ + 1);
  joint.controls.resize(dyn_.control_dim(), horizon_);
  for (int i = 0; i < N; ++i) {
    joint.states.middleRows(dyn_.state_offset(i), dyn_.model(i)->state_dim()) =
        st.self_plan_states[i];
    joint.controls.middleRows(dyn_.control_offset(i),
                              dyn_.model(i)->control_dim()) =
        st.self_plan_controls[i];
  }
  st.predictions.assign(N, joint);
  return st;
}

InteractionGraph Planner::current_graph(const PlannerState& state) const {
  JointTrajectory bulletin;
  bulletin.states.resize(dyn_.state_dim(), horizon_ + 1);
  bulletin.controls.resize(dyn_.control_dim(), horizon_);
  for (int i = 0; i < dyn_.num_agents(); ++i) {
    bulletin.states.middleRows(dyn_.state_offset(i),
                               dyn_.model(i)->state_dim()) =
        state.self_plan_states[i];
    bulletin.controls.middleRows(dyn_.control_offset(i),
                                 dyn_.model(i)->control_dim()) =
        state.self_plan_controls[i];
  }
  return build_graph(bulletin, dyn_, costs_.coupling.d_prox, opts_.alpha);
}

Subproblem Planner::assemble_subproblem(const PlannerState& state,
                                        const InteractionGraph& graph,
                                        int owner) const {
  std::vector<int> agents = subproblem_agents(graph, owner);
  std::vector<ModelPtr> models;
  models.reserve(agents.size());
  for (int g : agents) models.push_back(dyn_.model(g));
  Subproblem sp{owner, std::move(agents), JointDynamics(std::move(models)),
                PotentialSpec{}, Vec{}, Mat{}};

  sp.spec.agents = sp.agents;
  for (int g : sp.agents) sp.spec.tracking.push_back(costs_.tracking[g]);
  sp.spec.coupling = costs_.coupling;
  const int local_owner = static_cast<int>(
      std::find(sp.agents.begin(), sp.agents.end(), owner) -
      sp.agents.begin());
  // Couple the owner to each neighbor; neighbor-neighbor pairs stay out of
  // the local potential.
  for (int l = 0; l < static_cast<int>(sp.agents.size()); ++l) {
    if (l == local_owner) continue;
    sp.spec.pairs.emplace_back(std::min(l, local_owner),
                               std::max(l, local_owner));
  }
  std::sort(sp.spec.pairs.begin(), sp.spec.pairs.end());

  sp.x0.resize(sp.dyn.state_dim());
  sp.u_init.resize(sp.dyn.control_dim(), horizon_);
  const auto& prev_members = state.prev_agents[owner];
  for (int l = 0; l < static_cast<int>(sp.agents.size()); ++l) {
    const int g = sp.agents[l];
    sp.x0.segment(sp.dyn.state_offset(l), sp.dyn.model(l)->state_dim()) =
        dyn_.agent_state(state.current_state, g);

    const auto it =
        std::find(prev_members.begin(), prev_members.end(), g);
    if (it != prev_members.end() && state.prev_controls[owner].size() > 0) {
      // Member carried over: shift its rows of the owner's last solution.
      int prev_offset = 0;
      for (auto jt = prev_members.begin(); jt != it; ++jt) {
        prev_offset += dyn_.model(*jt)->control_dim();
      }
      sp.u_init.middleRows(sp.dyn.control_offset(l),
                           sp.dyn.model(l)->control_dim()) =
          shift_controls(state.prev_controls[owner].middleRows(
              prev_offset, dyn_.model(g)->control_dim()));
    } else {
      sp.u_init.middleRows(sp.dyn.control_offset(l),
                           sp.dyn.model(l)->control_dim()) =
          dyn_.model(g)->neutral_control().replicate(1, horizon_);
    }
  }
  return sp;
}

StepResult Planner::finish_step(PlannerState& state, const Vec& joint_control,
                                StepMetrics metrics,
                                std::vector<SolveReport> reports) const {
  state.current_state = dyn_.step(state.current_state, joint_control, dt_);
  state.applied_controls.push_back(joint_control);
  state.step_count += 1;
  metrics.min_distance = min_pairwise_distance(state.current_state);

  StepResult out;
  out.joint_control = joint_control;
  out.reports = std::move(reports);
  out.metrics = std::move(metrics);
  return out;
}

StepResult Planner::dp_ilqr_step(PlannerState& state) const {
  const int N = dyn_.num_agents();
  const auto step_start = Clock::now();

  const auto graph_start = Clock::now();
  const InteractionGraph graph = current_graph(state);
  StepMetrics metrics;
  metrics.graph_time_s = seconds_since(graph_start);
  metrics.n_edges = graph.num_edges();

  std::vector<Subproblem> subproblems;
  subproblems.reserve(N);
  for (int i = 0; i < N; ++i) {
    subproblems.push_back(assemble_subproblem(state, graph, i));
  }

  SolverOptions solver_opts = opts_.solver;
  if (opts_.step_budget_s) {
    if (opts_.budget_scope == BudgetScope::PerAgent) {
      solver_opts.time_budget_s = *opts_.step_budget_s;
    } else {
      solver_opts.deadline =
          step_start + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(*opts_.step_budget_s));
    }
  }

  std::vector<SolveReport> reports(N);
  std::vector<char> failed(N, 0);
  parallel_for(N, opts_.jobs, [&](int i) {
    const Subproblem& sp = subproblems[i];
    try {
      reports[i] =
          solve(sp.dyn, sp.spec, sp.x0, dt_, sp.u_init, solver_opts);
    } catch (const NumericalError& err) {
      failed[i] = 1;
      reports[i].diagnostic = err.what();
    }
  });

  // Extraction: each agent executes only its own block of its own solution.
  Vec joint_control(dyn_.control_dim());
  metrics.solve_times.resize(N);
  metrics.iterations.resize(N);
  metrics.converged.resize(N);
  metrics.fallback.resize(N);
  metrics.subproblem_sizes.resize(N);
  metrics.solve_costs.resize(N);

  for (int i = 0; i < N; ++i) {
    const Subproblem& sp = subproblems[i];
    const int local = static_cast<int>(
        std::find(sp.agents.begin(), sp.agents.end(), i) - sp.agents.begin());
    const int mi = dyn_.model(i)->control_dim();
    const int ni = dyn_.model(i)->state_dim();

    if (!failed[i]) {
      const SolveReport& rep = reports[i];
      joint_control.segment(dyn_.control_offset(i), mi) =
          rep.controls.block(sp.dyn.control_offset(local), 0, mi, 1);
      state.self_plan_controls[i] =
          rep.controls.middleRows(sp.dyn.control_offset(local), mi);
      state.self_plan_states[i] =
          rep.trajectory.states.middleRows(sp.dyn.state_offset(local), ni);
      state.prev_agents[i] = sp.agents;
      state.prev_controls[i] = rep.controls;
    } else {
      // Fall back to the previous plan shifted by one step.
      const Mat shifted = shift_controls(state.self_plan_controls[i]);
      joint_control.segment(dyn_.control_offset(i), mi) = shifted.col(0);
      JointDynamics solo({dyn_.model(i)});
      const JointTrajectory fb = rollout(
          solo, dyn_.agent_state(state.current_state, i), shifted, dt_);
      state.self_plan_controls[i] = fb.controls;
      state.self_plan_states[i] = fb.states;
      state.prev_agents[i] = {i};
      state.prev_controls[i] = fb.controls;
    }

    metrics.solve_times[i] = reports[i].wall_time_s;
    metrics.iterations[i] = reports[i].iterations;
    metrics.converged[i] = reports[i].converged ? 1 : 0;
    metrics.fallback[i] = failed[i];
    metrics.subproblem_sizes[i] = static_cast<int>(sp.agents.size());
    metrics.solve_costs[i] = reports[i].cost;
  }

  // Each agent's full-system prediction: its own solve for subproblem
  // members, the communicated plans for everyone else.
  for (int i = 0; i < N; ++i) {
    const Subproblem& sp = subproblems[i];
    JointTrajectory& pred = state.predictions[i];
    for (int j = 0; j < N; ++j) {
      const auto it = std::find(sp.agents.begin(), sp.agents.end(), j);
      const int nj = dyn_.model(j)->state_dim();
      const int mj = dyn_.model(j)->control_dim();
      if (!failed[i] && it != sp.agents.end()) {
        const int local = static_cast<int>(it - sp.agents.begin());
        pred.states.middleRows(dyn_.state_offset(j), nj) =
            reports[i].trajectory.states.middleRows(sp.dyn.state_offset(local),
                                                    nj);
        pred.controls.middleRows(dyn_.control_offset(j), mj) =
            reports[i].controls.middleRows(sp.dyn.control_offset(local), mj);
      } else {
        pred.states.middleRows(dyn_.state_offset(j), nj) =
            state.self_plan_states[j];
        pred.controls.middleRows(dyn_.control_offset(j), mj) =
            state.self_plan_controls[j];
      }
    }
  }

  return finish_step(state, joint_control, std::move(metrics),
                     std::move(reports));
}

StepResult Planner::centralized_step(PlannerState& state) const {
  const int N = dyn_.num_agents();

  Mat u_init;
  if (state.prev_central_controls.size() > 0) {
    u_init = shift_controls(state.prev_central_controls);
  } else {
    u_init = dyn_.neutral_controls(horizon_);
  }

  SolverOptions solver_opts = opts_.solver;
  if (opts_.step_budget_s) solver_opts.time_budget_s = *opts_.step_budget_s;

  std::vector<SolveReport> reports(1);
  reports[0] = solve(dyn_, central_spec_, state.current_state, dt_, u_init,
                     solver_opts);
  const SolveReport& rep = reports[0];

  state.prev_central_controls = rep.controls;
  for (int i = 0; i < N; ++i) {
    state.self_plan_states[i] = rep.trajectory.states.middleRows(
        dyn_.state_offset(i), dyn_.model(i)->state_dim());
    state.self_plan_controls[i] = rep.controls.middleRows(
        dyn_.control_offset(i), dyn_.model(i)->control_dim());
    state.predictions[i] = rep.trajectory;
  }

  StepMetrics metrics;
  metrics.solve_times = {rep.wall_time_s};
  metrics.iterations = {rep.iterations};
  metrics.converged = {static_cast<char>(rep.converged ? 1 : 0)};
  metrics.fallback = {0};
  metrics.subproblem_sizes = {N};
  metrics.solve_costs = {rep.cost};

  const Vec joint_control = rep.controls.col(0);
  return finish_step(state, joint_control, std::move(metrics),
                     std::move(reports));
}

double Planner::goal_distance(const Vec& joint_state, int agent) const {
  const auto& m = dyn_.model(agent);
  const Vec pos = dyn_.agent_position(joint_state, agent);
  const Vec goal_pos = costs_.tracking[agent].x_goal.head(m->position_dim());
  return (pos - goal_pos).norm();
}

bool Planner::all_at_goals(const Vec& joint_state) const {
  for (int i = 0; i < dyn_.num_agents(); ++i) {
    if (goal_distance(joint_state, i) > opts_.goal_tolerance) return false;
  }
  return true;
}

double Planner::min_pairwise_distance(const Vec& joint_state) const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dyn_.num_agents(); ++i) {
    for (int j = i + 1; j < dyn_.num_agents(); ++j) {
      best = std::min(best, (dyn_.agent_position(joint_state, i) -
                             dyn_.agent_position(joint_state, j))
                                .norm());
    }
  }
  return best;
}

SimulationTrace run_receding_horizon(const Planner& planner, PlannerKind kind,
                                     const Vec& x0, int n_steps) {
  if (n_steps < 1) throw ConfigError("run: n_steps must be >= 1");
  const auto& dyn = planner.dynamics();
  const auto start = Clock::now();

  PlannerState state = planner.init(x0);
  SimulationTrace trace;
  trace.states.resize(dyn.state_dim(), n_steps + 1);
  trace.controls.resize(dyn.control_dim(), n_steps);
  trace.states.col(0) = x0;
  trace.min_pairwise_distance = planner.min_pairwise_distance(x0);

  int steps = 0;
  while (steps < n_steps) {
    if (planner.all_at_goals(state.current_state)) break;

    StepResult result = (kind == PlannerKind::Distributed)
                            ? planner.dp_ilqr_step(state)
                            : planner.centralized_step(state);
    trace.controls.col(steps) = result.joint_control;
    trace.states.col(steps + 1) = state.current_state;
    trace.min_pairwise_distance =
        std::min(trace.min_pairwise_distance, result.metrics.min_distance);
    trace.steps.push_back(std::move(result.metrics));
    ++steps;

    if (!state.current_state.allFinite() ||
        state.current_state.cwiseAbs().maxCoeff() >
            planner.options().divergence_bound) {
      trace.diverged = true;
      break;
    }
  }

  trace.steps_taken = steps;
  trace.states.conservativeResize(Eigen::NoChange, steps + 1);
  trace.controls.conservativeResize(Eigen::NoChange, steps);
  trace.goal_reached = !trace.diverged && planner.all_at_goals(state.current_state);
  for (int i = 0; i < dyn.num_agents(); ++i) {
    trace.final_goal_distances.push_back(
        planner.goal_distance(state.current_state, i));
  }
  trace.wall_time_s = seconds_since(start);
  return trace;
}

}  // namespace dpilqr
