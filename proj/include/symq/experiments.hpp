#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "symq/abstraction.hpp"
#include "symq/analysis.hpp"
#include "symq/io.hpp"
#include "symq/learner.hpp"
#include "symq/refinement.hpp"

namespace symq {

/// Everything a pipeline run depends on. Built-in defaults per experiment
/// come from experiment_defaults(); a config file overrides single fields.
struct ExperimentSpec {
  std::string system = "mountain_car";
  std::size_t n_state_cells = 160;  // per axis, used when eta is empty
  Vec eta;                          // explicit state spacing per axis
  std::size_t n_action_cells = 3;
  ActionEncoding action_encoding = ActionEncoding::levels;
  std::optional<RewardBoundMode> reward_mode;  // default: exact_callback if the model has one
  EnablingMode enabling = EnablingMode::clip;
  LearnConfig learn;
  bool train_from_initial_state = false;  // episodes start at the cell of initial_state
  Vec initial_state;                      // default: per system
  std::size_t horizon = 1000;
  double goal_radius = 0.2;
  std::optional<double> admissible;   // L_A override
  std::size_t bound_horizon = 200;    // k range of the reported precision bound
  std::vector<std::size_t> grid_state_cells{40, 80, 160};    // Experiment 2 columns
  std::vector<std::size_t> grid_action_cells{3, 6, 12};      // Experiment 2 rows
  std::vector<std::size_t> rho_state_cells{40, 60, 80, 100, 120, 140, 160};  // Experiment 3
  unsigned jobs = 1;

  void validate() const;
};

/// Defaults for "exp1", "exp2", "exp3", "vdp" or "" (plain commands on the
/// given system).
ExperimentSpec experiment_defaults(const std::string& experiment, const std::string& system = "mountain_car");

struct OutputFile {
  std::string name;
  std::string content;
};

/// Files of a run, to be written into its run directory. Contents depend
/// only on the spec and seed.
struct ExperimentOutput {
  std::string experiment;
  std::vector<OutputFile> files;
  Metadata metadata;
};

/// A model plus the partitions, symbolic model and analysis constants that a
/// spec resolves to.
struct Setup {
  SystemModel model;
  GridPartition state_grid;
  GridPartition action_grid;
  AbstractionResult abstraction;
  std::vector<std::uint8_t> terminal;
  LipschitzBounds bounds;  // grid-scale constants
  LipschitzSequence sequence;
  double implied_epsilon = 0.0;  // L_ξ^max η_max + L_v^max μ_max
  std::string content_hash;
};

GridPartition state_grid_for(const SystemModel& model, const ExperimentSpec& spec);
Setup prepare(const ExperimentSpec& spec);
void describe_setup(const Setup& setup, Metadata& meta, const std::string& prefix = "");
void describe_spec(const ExperimentSpec& spec, Metadata& meta);
/// Learner settings of a spec, with the start state resolved.
LearnConfig learn_config_for(const ExperimentSpec& spec, const Setup& setup);
GoalPredicate goal_predicate_for(const ExperimentSpec& spec, const SystemModel& model);

struct Experiment1Result {
  ClosedLoopResult lower;  // controller refined from q_min
  ClosedLoopResult upper;  // from q_max
  TrainingReport report;
  double q_distance = 0.0;
  ExperimentOutput output;
};

struct Experiment2Cell {
  std::size_t n_state_cells = 0;
  std::size_t n_action_cells = 0;
  double eta = 0.0;  // max state spacing
  double mu = 0.0;   // max action spacing
  double q_distance = 0.0;
  double bound = 0.0;  // max over k <= bound_horizon of L_ξ^(k) η + L_v^(k) μ
  std::optional<double> reference;  // published single-run value
};

struct Experiment2Result {
  std::vector<Experiment2Cell> cells;  // row-major over (action cells, state cells)
  ExperimentOutput output;
};

struct Experiment3Point {
  std::size_t n_state_cells = 0;
  double rho = 0.0;
};

struct Experiment3Result {
  std::vector<Experiment3Point> points;
  ExperimentOutput output;
};

/// The symbolic controller of the comparison is the one refined from q_min
/// (worst-case values); the q_max controller is simulated and reported too.
struct VdpResult {
  ClosedLoopResult symbolic;        // from q_min
  ClosedLoopResult symbolic_upper;  // from q_max
  ClosedLoopResult uniform;
  ExperimentOutput output;
};

Experiment1Result run_experiment_1(const ExperimentSpec& spec);
Experiment2Result run_experiment_2(const ExperimentSpec& spec);
Experiment3Result run_experiment_3(const ExperimentSpec& spec);
VdpResult run_vdp_comparison(const ExperimentSpec& spec);

const char* reward_mode_name(RewardBoundMode mode);
const char* selection_name(SuccessorSelection selection);

/// Published Experiment 2 values, indexed by (n_v, n_ξ).
std::optional<double> published_precision(std::size_t n_action_cells, std::size_t n_state_cells);

}  // namespace symq
