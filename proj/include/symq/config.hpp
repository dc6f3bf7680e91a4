#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "symq/experiments.hpp"

namespace symq {

/// Invalid or unknown configuration; the message names the key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class TrainMethod { learning, value_iteration };

struct RunConfig {
  ExperimentSpec spec;
  std::string output_dir;        // empty: SYMQ_OUT_DIR, then the working directory
  std::string abstraction_file;  // input of train / analyze
  std::string qtable_file;       // input of policy
  std::string policy_file;       // input of simulate
  PolicySource policy_source = PolicySource::from_q_max;
  TrainMethod train_method = TrainMethod::learning;
  double vi_tolerance = 1e-8;
  std::size_t vi_max_sweeps = 100000;
  std::optional<double> target_epsilon;  // analyze: discretization for this precision
};

/// Parses a JSON object on top of `defaults`. Every key is optional; unknown
/// keys and ill-typed or out-of-range values raise ConfigError. The
/// "experiment" and "system" keys select the defaults themselves, so they are
/// applied before all other keys.
RunConfig parse_run_config(const std::string& json_text, const std::string& experiment = "");

/// The effective configuration as JSON, every default materialized.
std::string config_json(const RunConfig& config);

}  // namespace symq
