#include "dpilqr/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "parallel.hpp"

namespace dpilqr {
namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double rank = std::ceil(q * static_cast<double>(v.size())) - 1.0;
  rank = std::clamp(rank, 0.0, static_cast<double>(v.size()) - 1.0);
  return v[static_cast<std::size_t>(rank)];
}

}  // namespace

SimulationTrace execute_run(const Scenario& scenario, PlannerKind kind,
                            int planner_jobs) {
  const Planner planner = build_planner(scenario, planner_jobs);
  return run_receding_horizon(planner, kind, scenario.x0,
                              scenario.config.n_steps);
}

MetricsRecord trace_to_record(const Scenario& scenario, PlannerKind kind,
                              const SimulationTrace& trace) {
  const ScenarioConfig& cfg = scenario.config;
  MetricsRecord r;
  r.seed = cfg.seed;
  r.n_agents = cfg.n_agents;
  r.model = cfg.model;
  r.planner = planner_kind_name(kind);
  r.steps_taken = trace.steps_taken;
  r.goal_reached = trace.goal_reached;
  r.diverged = trace.diverged;
  r.min_pairwise_distance = trace.min_pairwise_distance;
  r.collision = trace.min_pairwise_distance < 0.8 * cfg.d_prox;
  r.final_goal_distances = trace.final_goal_distances;
  r.mean_final_goal_distance = mean_of(trace.final_goal_distances);
  r.max_final_goal_distance =
      trace.final_goal_distances.empty()
          ? 0.0
          : *std::max_element(trace.final_goal_distances.begin(),
                              trace.final_goal_distances.end());
  r.wall_time_s = trace.wall_time_s;

  int solves = 0;
  int converged = 0;
  for (const StepMetrics& step : trace.steps) {
    r.solve_times_per_step.push_back(step.solve_times);
    for (double t : step.solve_times) {
      r.solve_time_total += t;
      ++solves;
    }
    for (char c : step.converged) converged += c ? 1 : 0;
    for (char f : step.fallback) r.fallback_count += f ? 1 : 0;
    for (int it : step.iterations) r.total_iterations += it;
    r.graph_time_total += step.graph_time_s;
  }
  r.solve_time_mean = solves > 0 ? r.solve_time_total / solves : 0.0;
  r.convergence_rate =
      solves > 0 ? static_cast<double>(converged) / solves : 0.0;
  return r;
}

CampaignResult run_campaign(const CampaignConfig& cfg,
                            const CampaignOptions& opts) {
  struct Task {
    std::uint64_t seed;
    int n_agents;
    PlannerKind kind;
  };
  std::vector<Task> tasks;
  for (std::uint64_t seed : cfg.seeds) {
    for (int n : cfg.agent_counts) {
      for (PlannerKind kind : cfg.planners) {
        tasks.push_back({seed, n, kind});
      }
    }
  }

  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
  }

  std::vector<MetricsRecord> records(tasks.size());
  detail::parallel_for(
      static_cast<int>(tasks.size()), opts.jobs, [&](int idx) {
        const Task& task = tasks[idx];
        ScenarioConfig scfg = cfg.base;
        scfg.n_agents = task.n_agents;
        scfg.seed = task.seed;
        try {
          const Scenario scenario = generate_scenario(scfg);
          const Planner planner = build_planner(scenario, 1);
          const SimulationTrace trace = run_receding_horizon(
              planner, task.kind, scenario.x0, scfg.n_steps);
          records[idx] = trace_to_record(scenario, task.kind, trace);
          if (!opts.out_dir.empty() && opts.write_trajectories) {
            const auto stem =
                run_file_stem(task.seed, task.n_agents, scfg.model,
                              planner_kind_name(task.kind));
            write_trajectory_csv(opts.out_dir + "/" + stem + ".csv",
                                 planner.dynamics(), trace, scfg.dt);
          }
        } catch (const std::exception& err) {
          MetricsRecord& r = records[idx];
          r.seed = task.seed;
          r.n_agents = task.n_agents;
          r.model = scfg.model;
          r.planner = planner_kind_name(task.kind);
          r.failed = true;
          r.error = err.what();
        }
      });

  CampaignResult result;
  result.records = std::move(records);
  result.summary = summarize(result.records);

  if (!opts.out_dir.empty()) {
    write_records_jsonl(opts.out_dir + "/records.jsonl", result.records);
    write_summary_csv(opts.out_dir + "/summary.csv", result.summary);
  }
  return result;
}

std::vector<CampaignSummaryRow> summarize(
    const std::vector<MetricsRecord>& records) {
  // group key: (n_agents, model, planner)
  std::map<std::tuple<int, std::string, std::string>,
           std::vector<const MetricsRecord*>>
      groups;
  for (const auto& r : records) {
    if (r.failed) continue;
    groups[{r.n_agents, r.model, r.planner}].push_back(&r);
  }

  std::vector<CampaignSummaryRow> rows;
  for (const auto& [key, group] : groups) {
    CampaignSummaryRow row;
    row.n_agents = std::get<0>(key);
    row.model = std::get<1>(key);
    row.planner = std::get<2>(key);
    row.runs = static_cast<int>(group.size());

    std::vector<double> solve_times;
    std::vector<double> dist_left;
    std::vector<double> min_dists;
    double collisions = 0.0;
    double goals = 0.0;
    double conv = 0.0;
    for (const MetricsRecord* r : group) {
      for (const auto& step : r->solve_times_per_step) {
        solve_times.insert(solve_times.end(), step.begin(), step.end());
      }
      dist_left.push_back(r->mean_final_goal_distance);
      if (std::isfinite(r->min_pairwise_distance)) {
        min_dists.push_back(r->min_pairwise_distance);
      }
      collisions += r->collision ? 1.0 : 0.0;
      goals += r->goal_reached ? 1.0 : 0.0;
      conv += r->convergence_rate;
    }
    row.solve_time_mean = mean_of(solve_times);
    row.solve_time_std = std::sqrt(variance_of(solve_times));
    row.solve_time_p50 = quantile_of(solve_times, 0.5);
    row.solve_time_p90 = quantile_of(solve_times, 0.9);
    row.dist_left_mean = mean_of(dist_left);
    row.dist_left_var = variance_of(dist_left);
    row.dist_left_std = std::sqrt(row.dist_left_var);
    row.min_distance_mean = mean_of(min_dists);
    row.collision_rate = collisions / row.runs;
    row.goal_rate = goals / row.runs;
    row.convergence_rate = conv / row.runs;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string run_file_stem(std::uint64_t seed, int n_agents,
                          const std::string& model,
                          const std::string& planner) {
  return "traj_s" + std::to_string(seed) + "_n" + std::to_string(n_agents) +
         "_" + model + "_" + planner;
}

void write_trajectory_csv(const std::string& path, const JointDynamics& dyn,
                          const SimulationTrace& trace, double dt) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trajectory file: " + path);

  // Header from the first model; heterogeneous runs pad to the widest block.
  std::size_t max_nx = 0;
  std::size_t max_nu = 0;
  for (int i = 0; i < dyn.num_agents(); ++i) {
    max_nx = std::max(max_nx, dyn.model(i)->state_names().size());
    max_nu = std::max(max_nu, dyn.model(i)->control_names().size());
  }
  const auto names_x = dyn.model(0)->state_names();
  const auto names_u = dyn.model(0)->control_names();
  out << "time,agent";
  for (std::size_t c = 0; c < max_nx; ++c) {
    out << "," << (c < names_x.size() ? names_x[c] : "x" + std::to_string(c));
  }
  for (std::size_t c = 0; c < max_nu; ++c) {
    out << "," << (c < names_u.size() ? names_u[c] : "u" + std::to_string(c));
  }
  out << "\n";

  for (int k = 0; k <= trace.steps_taken; ++k) {
    for (int i = 0; i < dyn.num_agents(); ++i) {
      out << fmt_double(k * dt) << "," << i;
      const Vec xi = dyn.agent_state(trace.states.col(k), i);
      for (std::size_t c = 0; c < max_nx; ++c) {
        out << ",";
        if (c < static_cast<std::size_t>(xi.size())) out << fmt_double(xi[c]);
      }
      for (std::size_t c = 0; c < max_nu; ++c) {
        out << ",";
        if (k < trace.steps_taken) {
          const Vec ui = dyn.agent_control(trace.controls.col(k), i);
          if (c < static_cast<std::size_t>(ui.size())) out << fmt_double(ui[c]);
        }
      }
      out << "\n";
    }
  }
}

nlohmann::json record_to_json(const MetricsRecord& r) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["n_agents"] = r.n_agents;
  j["model"] = r.model;
  j["planner"] = r.planner;
  j["steps_taken"] = r.steps_taken;
  j["goal_reached"] = r.goal_reached;
  j["diverged"] = r.diverged;
  j["failed"] = r.failed;
  if (r.failed) j["error"] = r.error;
  j["min_pairwise_distance"] =
      std::isfinite(r.min_pairwise_distance)
          ? nlohmann::json(r.min_pairwise_distance)
          : nlohmann::json(nullptr);
  j["collision"] = r.collision;
  j["final_goal_distances"] = r.final_goal_distances;
  j["mean_final_goal_distance"] = r.mean_final_goal_distance;
  j["max_final_goal_distance"] = r.max_final_goal_distance;
  j["solve_times_per_step"] = r.solve_times_per_step;
  j["solve_time_mean"] = r.solve_time_mean;
  j["solve_time_total"] = r.solve_time_total;
  j["graph_time_total"] = r.graph_time_total;
  j["total_iterations"] = r.total_iterations;
  j["convergence_rate"] = r.convergence_rate;
  j["fallback_count"] = r.fallback_count;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

void write_records_jsonl(const std::string& path,
                         const std::vector<MetricsRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write records file: " + path);
  for (const auto& r : records) {
    out << record_to_json(r).dump() << "\n";
  }
}

void write_summary_csv(const std::string& path,
                       const std::vector<CampaignSummaryRow>& summary) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write summary file: " + path);
  out << "n_agents,model,planner,runs,solve_time_mean,solve_time_std,"
         "solve_time_p50,solve_time_p90,dist_left_mean,dist_left_std,"
         "dist_left_var,min_distance_mean,collision_rate,goal_rate,"
         "convergence_rate\n";
  for (const auto& s : summary) {
    out << s.n_agents << "," << s.model << "," << s.planner << "," << s.runs
        << "," << fmt_double(s.solve_time_mean) << ","
        << fmt_double(s.solve_time_std) << "," << fmt_double(s.solve_time_p50)
        << "," << fmt_double(s.solve_time_p90) << ","
        << fmt_double(s.dist_left_mean) << "," << fmt_double(s.dist_left_std)
        << "," << fmt_double(s.dist_left_var) << ","
        << fmt_double(s.min_distance_mean) << ","
        << fmt_double(s.collision_rate) << "," << fmt_double(s.goal_rate)
        << "," << fmt_double(s.convergence_rate) << "\n";
  }
}

std::string format_summary_table(const std::vector<CampaignSummaryRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %-18s %-12s %5s %14s %12s %11s\n",
                "agents", "model", "planner", "runs", "solve_time[ms]",
                "dist_left[m]", "collisions");
  out << line;
  for (const auto& s : rows) {
    std::snprintf(line, sizeof(line),
                  "%-8d %-18s %-12s %5d %14.3f %12.3f %10.1f%%\n", s.n_agents,
                  s.model.c_str(), s.planner.c_str(), s.runs,
                  1e3 * s.solve_time_mean, s.dist_left_mean,
                  100.0 * s.collision_rate);
    out << line;
  }
  return out.str();
}

}  // namespace dpilqr
