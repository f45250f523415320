// Microbenchmarks for the solver hot path and the planner step. Run with
// build/benchmarks/dpilqr_bench; not part of the ctest suite.

#include <benchmark/benchmark.h>

#include "dpilqr/campaign.hpp"
#include "dpilqr/ilqr.hpp"
#include "dpilqr/planner.hpp"
#include "dpilqr/scenario.hpp"

namespace {

using namespace dpilqr;

Scenario make_scenario(int n_agents, const std::string& model,
                       std::uint64_t seed = 42) {
  ScenarioConfig cfg;
  cfg.n_agents = n_agents;
  cfg.model = model;
  cfg.seed = seed;
  return generate_scenario(cfg);
}

void BM_Rollout(benchmark::State& state) {
  const auto scenario = make_scenario(static_cast<int>(state.range(0)),
                                      "double_integrator");
  const Planner planner = build_planner(scenario);
  const auto& dyn = planner.dynamics();
  const Mat U = dyn.neutral_controls(scenario.config.horizon);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout(dyn, scenario.x0, U, scenario.config.dt));
  }
}
BENCHMARK(BM_Rollout)->Arg(2)->Arg(4)->Arg(8);

void BM_Quadraticize(benchmark::State& state) {
  const auto scenario = make_scenario(static_cast<int>(state.range(0)),
                                      "double_integrator");
  const Planner planner = build_planner(scenario);
  const auto& dyn = planner.dynamics();
  const auto spec =
      make_centralized_spec(planner.costs().tracking, planner.costs().coupling);
  const auto traj = rollout(dyn, scenario.x0,
                            dyn.neutral_controls(scenario.config.horizon),
                            scenario.config.dt);
  for (auto _ : state) {
    for (int k = 0; k < traj.horizon(); ++k) {
      benchmark::DoNotOptimize(quadraticize(spec, dyn, traj, k));
    }
  }
}
BENCHMARK(BM_Quadraticize)->Arg(2)->Arg(8);

void BM_CentralizedSolve(benchmark::State& state) {
  const auto scenario = make_scenario(static_cast<int>(state.range(0)),
                                      "double_integrator");
  const Planner planner = build_planner(scenario);
  const auto spec =
      make_centralized_spec(planner.costs().tracking, planner.costs().coupling);
  SolverOptions opts;
  const Mat u0 = planner.dynamics().neutral_controls(scenario.config.horizon);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(planner.dynamics(), spec, scenario.x0,
                                   scenario.config.dt, u0, opts));
  }
}
BENCHMARK(BM_CentralizedSolve)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_DistributedStep(benchmark::State& state) {
  const auto scenario = make_scenario(static_cast<int>(state.range(0)),
                                      "double_integrator");
  const Planner planner = build_planner(scenario);
  for (auto _ : state) {
    PlannerState st = planner.init(scenario.x0);
    benchmark::DoNotOptimize(planner.dp_ilqr_step(st));
  }
}
BENCHMARK(BM_DistributedStep)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_GraphBuild(benchmark::State& state) {
  const auto scenario = make_scenario(10, "double_integrator");
  const Planner planner = build_planner(scenario);
  PlannerState st = planner.init(scenario.x0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(planner.current_graph(st));
  }
}
BENCHMARK(BM_GraphBuild);

}  // namespace

BENCHMARK_MAIN();
