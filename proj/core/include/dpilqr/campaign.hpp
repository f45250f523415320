#pragma once

#include <string>
#include <vector>

#include "dpilqr/config_io.hpp"
#include "dpilqr/planner.hpp"
#include "dpilqr/scenario.hpp"

namespace dpilqr {

/// Outcome of one (scenario, planner) run. Serialized one-per-line in
/// records.jsonl; schema documented in the README.
struct MetricsRecord {
  std::uint64_t seed = 0;
  int n_agents = 0;
  std::string model;
  std::string planner;
  int steps_taken = 0;
  bool goal_reached = false;
  bool diverged = false;
  bool failed = false;  // run aborted (error recorded, campaign continues)
  std::string error;
  double min_pairwise_distance = 0.0;
  bool collision = false;  // min pairwise distance < 0.8 * d_prox
  std::vector<double> final_goal_distances;
  double mean_final_goal_distance = 0.0;
  double max_final_goal_distance = 0.0;
  /// Per step, one entry per solve: a single entry for the centralized
  /// planner, one per agent for the distributed planner.
  std::vector<std::vector<double>> solve_times_per_step;
  double solve_time_mean = 0.0;
  double solve_time_total = 0.0;
  double graph_time_total = 0.0;
  long total_iterations = 0;
  double convergence_rate = 0.0;  // fraction of solves that converged
  int fallback_count = 0;
  double wall_time_s = 0.0;
};

struct CampaignSummaryRow {
  int n_agents = 0;
  std::string model;
  std::string planner;
  int runs = 0;
  double solve_time_mean = 0.0;
  double solve_time_std = 0.0;
  double solve_time_p50 = 0.0;
  double solve_time_p90 = 0.0;
  double dist_left_mean = 0.0;
  double dist_left_std = 0.0;
  double dist_left_var = 0.0;
  double min_distance_mean = 0.0;
  double collision_rate = 0.0;
  double goal_rate = 0.0;
  double convergence_rate = 0.0;
};

struct CampaignOptions {
  /// Output directory; empty disables all file output.
  std::string out_dir;
  bool write_trajectories = true;
  /// Campaign worker threads; runs are independent. 1 = serial, 0 = all
  /// cores. Within-run subproblem solves stay serial so recorded solve
  /// times are not polluted by oversubscription.
  int jobs = 1;
};

struct CampaignResult {
  std::vector<MetricsRecord> records;  // ordered by (seed, n_agents, planner)
  std::vector<CampaignSummaryRow> summary;
};

/// Single receding-horizon episode for a prepared scenario.
SimulationTrace execute_run(const Scenario& scenario, PlannerKind kind,
                            int planner_jobs = 1);

MetricsRecord trace_to_record(const Scenario& scenario, PlannerKind kind,
                              const SimulationTrace& trace);

/// Full paired Monte Carlo sweep. Every (n_agents, seed) scenario is run
/// under every planner; per-run failures are recorded, not fatal.
CampaignResult run_campaign(const CampaignConfig& cfg,
                            const CampaignOptions& opts);

std::vector<CampaignSummaryRow> summarize(
    const std::vector<MetricsRecord>& records);

/// Tidy CSV: one row per (time, agent) with state and control columns
/// named after the model's coordinates. Controls are blank on the final
/// row of each agent.
void write_trajectory_csv(const std::string& path, const JointDynamics& dyn,
                          const SimulationTrace& trace, double dt);

void write_records_jsonl(const std::string& path,
                         const std::vector<MetricsRecord>& records);
void write_summary_csv(const std::string& path,
                       const std::vector<CampaignSummaryRow>& summary);

/// Aggregate table (per n_agents/planner: solve time, distance left,
/// collision rate) for console output.
std::string format_summary_table(const std::vector<CampaignSummaryRow>& rows);

std::string run_file_stem(std::uint64_t seed, int n_agents,
                          const std::string& model, const std::string& planner);

nlohmann::json record_to_json(const MetricsRecord& r);

}  // namespace dpilqr
