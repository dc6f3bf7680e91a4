#include "symq/config.hpp"

#include <json.hpp>
#include <set>

namespace symq {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& rule) { throw ConfigError(key + " " + rule); }

double number(const json& j, const std::string& key) {
  if (!j.is_number()) bad(key, "must be a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) bad(key, "must be a non-negative integer");
  return j.get<std::size_t>();
}

std::uint64_t seed_value(const json& j, const std::string& key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    bad(key, "must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

bool flag(const json& j, const std::string& key) {
  if (!j.is_boolean()) bad(key, "must be true or false");
  return j.get<bool>();
}

std::string text(const json& j, const std::string& key) {
  if (!j.is_string()) bad(key, "must be a string");
  return j.get<std::string>();
}

Vec vector_of(const json& j, const std::string& key) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array() || j.empty()) bad(key, "must be a number or a non-empty array of numbers");
  Vec v;
  for (const auto& e : j) v.push_back(number(e, key));
  return v;
}

std::vector<std::size_t> counts_of(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) bad(key, "must be a non-empty array of integers");
  std::vector<std::size_t> v;
  for (const auto& e : j) v.push_back(count(e, key));
  return v;
}

template <typename E>
E choice(const json& j, const std::string& key, std::initializer_list<std::pair<const char*, E>> options) {
  const std::string s = text(j, key);
  std::string allowed;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  bad(key, "must be one of: " + allowed);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& experiment) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  std::string system = experiment == "vdp" ? "van_der_pol" : "mountain_car";
  if (root.contains("system")) system = text(root["system"], "system");
  if (system != "mountain_car" && system != "van_der_pol") bad("system", "must be mountain_car or van_der_pol");
  RunConfig c;
  c.spec = experiment_defaults(experiment, system);
  if (experiment.empty()) c.spec.initial_state = system == "van_der_pol" ? Vec{1.5, 0.0} : Vec{-0.5, 0.0};
  ExperimentSpec& s = c.spec;
  LearnConfig& l = s.learn;

  for (const auto& [key, v] : root.items()) {
    if (key == "system") {
      continue;
    } else if (v.is_null() && (key == "reward_mode" || key == "admissible_constant" || key == "target_epsilon")) {
      if (key == "reward_mode") s.reward_mode.reset();
      if (key == "admissible_constant") s.admissible.reset();
      if (key == "target_epsilon") c.target_epsilon.reset();
    } else if (key == "n_state_cells") {
      s.n_state_cells = count(v, key);
      s.eta.clear();
    } else if (key == "eta") {
      s.eta = vector_of(v, key);
      for (double e : s.eta) {
        if (!(e > 0.0)) bad(key, "must be positive");
      }
      if (s.eta.size() == 1) s.eta.assign(2, s.eta.front());
    } else if (key == "n_action_cells") {
      s.n_action_cells = count(v, key);
    } else if (key == "action_encoding") {
      s.action_encoding = choice<ActionEncoding>(v, key, {{"levels", ActionEncoding::levels}, {"cells", ActionEncoding::cells}});
    } else if (key == "reward_mode") {
      s.reward_mode = choice<RewardBoundMode>(v, key,
                                              {{"lipschitz", RewardBoundMode::lipschitz},
                                               {"corner_sampling", RewardBoundMode::corner_sampling},
                                               {"exact_callback", RewardBoundMode::exact_callback}});
    } else if (key == "enabling") {
      s.enabling = choice<EnablingMode>(v, key, {{"clip", EnablingMode::clip}, {"strict", EnablingMode::strict}});
    } else if (key == "gamma") {
      l.gamma = number(v, key);
    } else if (key == "alpha") {
      l.alpha = number(v, key);
    } else if (key == "alpha_schedule") {
      l.alpha_schedule = choice<AlphaSchedule>(
          v, key, {{"constant", AlphaSchedule::constant}, {"visit_harmonic", AlphaSchedule::visit_harmonic}});
    } else if (key == "epsilon_explore") {
      l.epsilon_explore = number(v, key);
    } else if (key == "episodes") {
      l.episodes = count(v, key);
    } else if (key == "max_steps") {
      l.max_steps_per_episode = count(v, key);
    } else if (key == "seed") {
      l.seed = seed_value(v, key);
    } else if (key == "successor_selection") {
      l.successor_selection = choice<SuccessorSelection>(v, key,
                                                         {{"uniform_random", SuccessorSelection::uniform_random},
                                                          {"min_value", SuccessorSelection::min_value},
                                                          {"max_value", SuccessorSelection::max_value}});
    } else if (key == "greedy_table") {
      l.greedy_table = choice<GreedyTable>(v, key, {{"q_max", GreedyTable::q_max}, {"q_min", GreedyTable::q_min}});
    } else if (key == "q_init") {
      l.q_init = number(v, key);
    } else if (key == "train_from_initial_state") {
      s.train_from_initial_state = flag(v, key);
    } else if (key == "initial_state") {
      s.initial_state = vector_of(v, key);
    } else if (key == "horizon") {
      s.horizon = count(v, key);
    } else if (key == "goal_radius") {
      s.goal_radius = number(v, key);
    } else if (key == "admissible_constant") {
      s.admissible = number(v, key);
    } else if (key == "bound_horizon") {
      s.bound_horizon = count(v, key);
    } else if (key == "grid_state_cells") {
      s.grid_state_cells = counts_of(v, key);
    } else if (key == "grid_action_cells") {
      s.grid_action_cells = counts_of(v, key);
    } else if (key == "rho_state_cells") {
      s.rho_state_cells = counts_of(v, key);
    } else if (key == "output_dir") {
      c.output_dir = text(v, key);
    } else if (key == "abstraction_file") {
      c.abstraction_file = text(v, key);
    } else if (key == "qtable_file") {
      c.qtable_file = text(v, key);
    } else if (key == "policy_file") {
      c.policy_file = text(v, key);
    } else if (key == "policy_source") {
      c.policy_source =
          choice<PolicySource>(v, key, {{"q_max", PolicySource::from_q_max}, {"q_min", PolicySource::from_q_min}});
    } else if (key == "train_method") {
      c.train_method = choice<TrainMethod>(
          v, key, {{"learning", TrainMethod::learning}, {"value_iteration", TrainMethod::value_iteration}});
    } else if (key == "vi_tolerance") {
      c.vi_tolerance = number(v, key);
      if (!(c.vi_tolerance > 0.0)) bad(key, "must be positive");
    } else if (key == "vi_max_sweeps") {
      c.vi_max_sweeps = count(v, key);
      if (c.vi_max_sweeps < 1) bad(key, "must be >= 1");
    } else if (key == "target_epsilon") {
      c.target_epsilon = number(v, key);
      if (!(*c.target_epsilon > 0.0)) bad(key, "must be positive");
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::size_t dim = builtin_model(s.system).state_space.dim();
  if (s.initial_state.size() != dim) bad("initial_state", "must have one entry per state axis");
  if (!s.eta.empty() && s.eta.size() != dim) bad("eta", "must have one entry per state axis");
  return c;
}

std::string config_json(const RunConfig& c) {
  const ExperimentSpec& s = c.spec;
  const LearnConfig& l = s.learn;
  json j = json::object();
  j["system"] = s.system;
  if (s.eta.empty()) j["n_state_cells"] = s.n_state_cells;
  else j["eta"] = s.eta;
  j["n_action_cells"] = s.n_action_cells;
  j["action_encoding"] = s.action_encoding == ActionEncoding::levels ? "levels" : "cells";
  j["reward_mode"] = s.reward_mode ? json(reward_mode_name(*s.reward_mode)) : json(nullptr);
  j["enabling"] = s.enabling == EnablingMode::clip ? "clip" : "strict";
  j["gamma"] = l.gamma;
  j["alpha"] = l.alpha;
  j["alpha_schedule"] = l.alpha_schedule == AlphaSchedule::constant ? "constant" : "visit_harmonic";
  j["epsilon_explore"] = l.epsilon_explore;
  j["episodes"] = l.episodes;
  j["max_steps"] = l.max_steps_per_episode;
  j["seed"] = l.seed;
  j["successor_selection"] = selection_name(l.successor_selection);
  j["greedy_table"] = l.greedy_table == GreedyTable::q_max ? "q_max" : "q_min";
  j["q_init"] = l.q_init;
  j["train_from_initial_state"] = s.train_from_initial_state;
  j["initial_state"] = s.initial_state;
  j["horizon"] = s.horizon;
  j["goal_radius"] = s.goal_radius;
  j["admissible_constant"] = s.admissible ? json(*s.admissible) : json(nullptr);
  j["bound_horizon"] = s.bound_horizon;
  j["grid_state_cells"] = s.grid_state_cells;
  j["grid_action_cells"] = s.grid_action_cells;
  j["rho_state_cells"] = s.rho_state_cells;
  j["output_dir"] = c.output_dir;
  j["abstraction_file"] = c.abstraction_file;
  j["qtable_file"] = c.qtable_file;
  j["policy_file"] = c.policy_file;
  j["policy_source"] = c.policy_source == PolicySource::from_q_max ? "q_max" : "q_min";
  j["train_method"] = c.train_method == TrainMethod::learning ? "learning" : "value_iteration";
  j["vi_tolerance"] = c.vi_tolerance;
  j["vi_max_sweeps"] = c.vi_max_sweeps;
  j["target_epsilon"] = c.target_epsilon ? json(*c.target_epsilon) : json(nullptr);
  return j.dump(2) + "\n";
}

}  // namespace symq
