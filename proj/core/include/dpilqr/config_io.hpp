#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "dpilqr/scenario.hpp"

namespace dpilqr {

/// Campaign grid: every (n_agents, seed) scenario is evaluated under every
/// listed planner; both planners of one seed see bit-identical scenarios.
struct CampaignConfig {
  std::vector<int> agent_counts;
  std::vector<std::uint64_t> seeds;
  std::vector<PlannerKind> planners;
  ScenarioConfig base;
};

std::string planner_kind_name(PlannerKind kind);
PlannerKind parse_planner_kind(const std::string& name);

std::string budget_scope_name(BudgetScope scope);
BudgetScope parse_budget_scope(const std::string& name);

/// Unknown keys anywhere in the tree are rejected with an error naming the
/// key. Missing keys take their documented defaults.
ScenarioConfig parse_scenario_config(const nlohmann::json& j);
nlohmann::json scenario_config_to_json(const ScenarioConfig& cfg);

/// Reads a scenario file. A file whose top level carries a "scenario" key
/// is treated as a run manifest and re-ingests the embedded scenario.
ScenarioConfig load_scenario_file(const std::string& path);

CampaignConfig parse_campaign_config(const nlohmann::json& j);
CampaignConfig load_campaign_file(const std::string& path);

/// Full resolved configuration of a run, sufficient to reproduce it.
nlohmann::json make_run_manifest(const ScenarioConfig& cfg, PlannerKind kind,
                                 const std::string& command);

}  // namespace dpilqr
