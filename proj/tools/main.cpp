// Command-line front end: single receding-horizon runs, Monte Carlo
// campaigns, and scenario validation.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dpilqr/campaign.hpp"
#include "dpilqr/config_io.hpp"
#include "dpilqr/scenario.hpp"

namespace {

using namespace dpilqr;

struct CommonFlags {
  std::string out_dir;
  std::optional<double> alpha;
  std::optional<double> budget;
  std::optional<std::string> budget_scope;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  bool serial = false;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("DPILQR_OUT")) return env;
  return "out";
}

void apply_overrides(ScenarioConfig& cfg, const CommonFlags& flags) {
  if (flags.alpha) cfg.alpha = *flags.alpha;
  if (flags.budget) cfg.budget_s = *flags.budget;
  if (flags.budget_scope) cfg.budget_scope = parse_budget_scope(*flags.budget_scope);
  if (flags.seed) cfg.seed = *flags.seed;
}

int cmd_solve(const std::string& scenario_path, const std::string& planner_name,
              const CommonFlags& flags) {
  ScenarioConfig cfg = load_scenario_file(scenario_path);
  apply_overrides(cfg, flags);
  cfg.resolve_and_validate();
  const PlannerKind kind = parse_planner_kind(planner_name);

  const Scenario scenario = generate_scenario(cfg);
  const int planner_jobs = flags.serial ? 1 : flags.jobs;
  const Planner planner = build_planner(scenario, planner_jobs);

  const SimulationTrace trace =
      run_receding_horizon(planner, kind, scenario.x0, cfg.n_steps);
  const MetricsRecord record = trace_to_record(scenario, kind, trace);

  std::filesystem::create_directories(flags.out_dir);
  const std::string stem = run_file_stem(cfg.seed, cfg.n_agents, cfg.model,
                                         planner_kind_name(kind));
  write_trajectory_csv(flags.out_dir + "/" + stem + ".csv", planner.dynamics(),
                       trace, cfg.dt);
  {
    std::ofstream out(flags.out_dir + "/" + stem + "_metrics.json");
    out << record_to_json(record).dump(2) << "\n";
  }
  {
    std::ofstream out(flags.out_dir + "/" + stem + "_manifest.json");
    out << make_run_manifest(cfg, kind, "solve").dump(2) << "\n";
  }

  std::cout << "run: " << stem << "\n"
            << "  steps:           " << trace.steps_taken << "\n"
            << "  goal reached:    " << (trace.goal_reached ? "yes" : "no")
            << "\n"
            << "  min distance:    " << trace.min_pairwise_distance << " m\n"
            << "  mean dist left:  " << record.mean_final_goal_distance
            << " m\n"
            << "  mean solve time: " << 1e3 * record.solve_time_mean
            << " ms\n";
  if (trace.diverged) {
    std::cerr << "error: trajectory diverged\n";
    return 2;
  }
  return 0;
}

int cmd_campaign(const std::string& campaign_path, const CommonFlags& flags) {
  CampaignConfig cfg = load_campaign_file(campaign_path);
  apply_overrides(cfg.base, flags);

  CampaignOptions opts;
  opts.out_dir = flags.out_dir;
  opts.jobs = flags.serial ? 1 : (flags.jobs == 0 ? 0 : flags.jobs);

  const CampaignResult result = run_campaign(cfg, opts);
  std::cout << format_summary_table(result.summary);

  int failures = 0;
  for (const auto& r : result.records) {
    if (r.failed) {
      ++failures;
      std::cerr << "run failed (seed=" << r.seed << ", n=" << r.n_agents
                << ", planner=" << r.planner << "): " << r.error << "\n";
    }
  }
  std::cout << result.records.size() << " runs, " << failures
            << " failures; records written to " << flags.out_dir << "\n";
  return 0;
}

int cmd_check(const std::string& scenario_path, const CommonFlags& flags) {
  ScenarioConfig cfg = load_scenario_file(scenario_path);
  apply_overrides(cfg, flags);
  cfg.resolve_and_validate();
  const Scenario scenario = generate_scenario(cfg);  // exercises feasibility
  std::cout << "scenario ok: " << cfg.n_agents << " x " << cfg.model
            << ", horizon " << cfg.horizon << ", dt " << cfg.dt << ", seed "
            << cfg.seed << "\n"
            << "  x0/goals sampled successfully ("
            << scenario.goals.size() << " goals)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent interactive trajectory planning via potential-game iLQR"};
  app.require_subcommand(1);

  CommonFlags flags;
  flags.out_dir = default_out_dir();

  std::string scenario_path;
  std::string campaign_path;
  std::string planner_name = "distributed";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", flags.out_dir, "Output directory")
        ->capture_default_str();
    cmd->add_option("--alpha", flags.alpha,
                    "Interaction-graph aggressiveness (>= 1)");
    cmd->add_option("--budget", flags.budget,
                    "Per-step wall-clock budget in seconds");
    cmd->add_option("--budget-scope", flags.budget_scope,
                    "Budget scope: per-agent | global");
    cmd->add_option("--seed", flags.seed, "Scenario seed override");
    cmd->add_option("--jobs", flags.jobs,
                    "Worker threads (0 = all cores)");
    cmd->add_flag("--serial", flags.serial,
                  "Force fully serial execution (deterministic order)");
  };

  CLI::App* solve =
      app.add_subcommand("solve", "Run one receding-horizon episode");
  solve->add_option("scenario", scenario_path, "Scenario file (JSON)")
      ->required();
  solve->add_option("--planner", planner_name, "central | distributed")
      ->capture_default_str();
  add_common(solve);

  CLI::App* campaign =
      app.add_subcommand("campaign", "Run a Monte Carlo campaign");
  campaign->add_option("campaign", campaign_path, "Campaign file (JSON)")
      ->required();
  add_common(campaign);

  CLI::App* check =
      app.add_subcommand("check", "Validate a scenario file without running");
  check->add_option("scenario", scenario_path, "Scenario file (JSON)")
      ->required();
  add_common(check);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(scenario_path, planner_name, flags);
    if (campaign->parsed()) return cmd_campaign(campaign_path, flags);
    if (check->parsed()) return cmd_check(scenario_path, flags);
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 1;
}
