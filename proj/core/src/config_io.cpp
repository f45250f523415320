#include "dpilqr/config_io.hpp"

#include <fstream>

namespace dpilqr {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& context,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown key '" + key + "' in " + context);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + std::string(key) +
                        "': " + e.what());
    }
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  try {
    return json::parse(in);  // parse errors carry line/column info
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("in ") + path + ": " + e.what());
  }
}

}  // namespace

std::string planner_kind_name(PlannerKind kind) {
  return kind == PlannerKind::Centralized ? "central" : "distributed";
}

PlannerKind parse_planner_kind(const std::string& name) {
  if (name == "central" || name == "centralized") {
    return PlannerKind::Centralized;
  }
  if (name == "distributed") return PlannerKind::Distributed;
  throw ConfigError("unknown planner '" + name +
                    "' (expected 'central' or 'distributed')");
}

std::string budget_scope_name(BudgetScope scope) {
  return scope == BudgetScope::PerAgent ? "per-agent" : "global";
}

BudgetScope parse_budget_scope(const std::string& name) {
  if (name == "per-agent") return BudgetScope::PerAgent;
  if (name == "global") return BudgetScope::Global;
  throw ConfigError("unknown budget scope '" + name +
                    "' (expected 'per-agent' or 'global')");
}

ScenarioConfig parse_scenario_config(const json& j) {
  check_keys(j, "scenario",
             {"n_agents", "model", "dt", "horizon", "d_prox", "alpha", "seed",
              "n_steps", "workspace", "min_separation", "goal_tolerance",
              "costs", "solver", "budget", "budget_scope"});
  ScenarioConfig cfg;
  read(j, "n_agents", cfg.n_agents);
  read(j, "model", cfg.model);
  read(j, "dt", cfg.dt);
  read(j, "horizon", cfg.horizon);
  read(j, "d_prox", cfg.d_prox);
  read(j, "alpha", cfg.alpha);
  read(j, "seed", cfg.seed);
  read(j, "n_steps", cfg.n_steps);
  read(j, "min_separation", cfg.min_separation);
  read(j, "goal_tolerance", cfg.goal_tolerance);

  if (j.contains("workspace") && !j.at("workspace").is_null()) {
    const json& w = j.at("workspace");
    check_keys(w, "workspace", {"min", "max"});
    read(w, "min", cfg.workspace_min);
    read(w, "max", cfg.workspace_max);
  }
  if (j.contains("costs") && !j.at("costs").is_null()) {
    const json& c = j.at("costs");
    check_keys(c, "costs", {"q_pos", "q_aux", "r", "qf_scale", "beta"});
    read(c, "q_pos", cfg.weights.q_pos);
    read(c, "q_aux", cfg.weights.q_aux);
    read(c, "r", cfg.weights.r);
    read(c, "qf_scale", cfg.weights.qf_scale);
    read(c, "beta", cfg.weights.beta);
  }
  if (j.contains("solver") && !j.at("solver").is_null()) {
    const json& s = j.at("solver");
    check_keys(s, "solver",
               {"max_iterations", "convergence_tol", "reg_init", "reg_growth",
                "reg_max", "line_search_steps"});
    read(s, "max_iterations", cfg.solver.max_iterations);
    read(s, "convergence_tol", cfg.solver.convergence_tol);
    read(s, "reg_init", cfg.solver.reg_init);
    read(s, "reg_growth", cfg.solver.reg_growth);
    read(s, "reg_max", cfg.solver.reg_max);
    read(s, "line_search_steps", cfg.solver.line_search_steps);
  }
  if (j.contains("budget") && !j.at("budget").is_null()) {
    cfg.budget_s = j.at("budget").get<double>();
  }
  if (j.contains("budget_scope") && !j.at("budget_scope").is_null()) {
    cfg.budget_scope = parse_budget_scope(j.at("budget_scope").get<std::string>());
  }
  return cfg;
}

json scenario_config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["n_agents"] = cfg.n_agents;
  j["model"] = cfg.model;
  j["dt"] = cfg.dt;
  j["horizon"] = cfg.horizon;
  j["d_prox"] = cfg.d_prox;
  j["alpha"] = cfg.alpha;
  j["seed"] = cfg.seed;
  j["n_steps"] = cfg.n_steps;
  j["workspace"] = {{"min", cfg.workspace_min}, {"max", cfg.workspace_max}};
  j["min_separation"] = cfg.min_separation;
  j["goal_tolerance"] = cfg.goal_tolerance;
  j["costs"] = {{"q_pos", cfg.weights.q_pos},
                {"q_aux", cfg.weights.q_aux},
                {"r", cfg.weights.r},
                {"qf_scale", cfg.weights.qf_scale},
                {"beta", cfg.weights.beta}};
  j["solver"] = {{"max_iterations", cfg.solver.max_iterations},
                 {"convergence_tol", cfg.solver.convergence_tol},
                 {"reg_init", cfg.solver.reg_init},
                 {"reg_growth", cfg.solver.reg_growth},
                 {"reg_max", cfg.solver.reg_max},
                 {"line_search_steps", cfg.solver.line_search_steps}};
  if (cfg.budget_s) {
    j["budget"] = *cfg.budget_s;
  } else {
    j["budget"] = nullptr;
  }
  j["budget_scope"] = budget_scope_name(cfg.budget_scope);
  return j;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  const json j = load_json_file(path);
  if (j.is_object() && j.contains("scenario")) {
    return parse_scenario_config(j.at("scenario"));  // run manifest
  }
  return parse_scenario_config(j);
}

CampaignConfig parse_campaign_config(const json& j) {
  check_keys(j, "campaign",
             {"agent_counts", "seeds", "n_seeds", "base_seed", "planners",
              "scenario"});
  CampaignConfig cfg;
  read(j, "agent_counts", cfg.agent_counts);

  if (j.contains("seeds") && j.contains("n_seeds")) {
    throw ConfigError("campaign: give either 'seeds' or 'n_seeds', not both");
  }
  if (j.contains("seeds")) {
    read(j, "seeds", cfg.seeds);
  } else if (j.contains("n_seeds")) {
    const int n = j.at("n_seeds").get<int>();
    if (n < 0) throw ConfigError("campaign: n_seeds must be >= 0");
    std::uint64_t base = 0;
    read(j, "base_seed", base);
    for (int s = 0; s < n; ++s) cfg.seeds.push_back(base + s);
  }

  std::vector<std::string> planner_names = {"central", "distributed"};
  read(j, "planners", planner_names);
  for (const auto& name : planner_names) {
    cfg.planners.push_back(parse_planner_kind(name));
  }

  if (j.contains("scenario") && !j.at("scenario").is_null()) {
    cfg.base = parse_scenario_config(j.at("scenario"));
  }
  return cfg;
}

CampaignConfig load_campaign_file(const std::string& path) {
  return parse_campaign_config(load_json_file(path));
}

json make_run_manifest(const ScenarioConfig& cfg, PlannerKind kind,
                       const std::string& command) {
  json j;
  j["dpilqr_version"] = std::string(kVersion);
  j["command"] = command;
  j["planner"] = planner_kind_name(kind);
  j["scenario"] = scenario_config_to_json(cfg);
  return j;
}

}  // namespace dpilqr
