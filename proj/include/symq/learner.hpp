#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "symq/abstraction.hpp"
#include "symq/mdp.hpp"

namespace symq {

enum class AlphaSchedule {
  constant,        // α fixed
  visit_harmonic,  // α = 1 / (1 + visits(s, a)); satisfies the Robbins-Monro conditions
};

enum class SuccessorSelection { uniform_random, min_value, max_value };

enum class GreedyTable { q_max, q_min };

struct LearnConfig {
  double gamma = 0.9;
  double alpha = 0.5;
  AlphaSchedule alpha_schedule = AlphaSchedule::constant;
  double epsilon_explore = 0.1;
  std::size_t episodes = 1000;
  std::size_t max_steps_per_episode = 1000;
  std::uint64_t seed = 0;
  SuccessorSelection successor_selection = SuccessorSelection::uniform_random;
  GreedyTable greedy_table = GreedyTable::q_max;
  double q_init = 0.0;
  // Fixed first state of every episode; otherwise a uniformly random
  // non-terminal, non-sink state.
  std::optional<CellId> start_state;

  void validate() const;
};

/// Entries of disabled pairs hold this sentinel and never win an argmax.
inline constexpr double kDisabledValue = -std::numeric_limits<double>::infinity();

struct QTable {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> q;
  std::vector<std::uint64_t> visits;
  std::uint64_t updates_applied = 0;

  double at(std::size_t s, std::size_t a) const { return q[s * n_actions + a]; }
};

/// Lower (q_min) and upper (q_max) tables over the same pairs.
struct QTablePair {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> q_min;
  std::vector<double> q_max;
  double gamma = 0.0;
  std::uint64_t updates_applied = 0;
  std::vector<std::uint64_t> visit_counts;

  std::size_t pair_index(std::size_t s, std::size_t a) const { return s * n_actions + a; }
};

struct TrainingReport {
  std::uint64_t episodes = 0;
  std::uint64_t updates = 0;
  std::uint64_t goal_episodes = 0;
  std::uint64_t sink_events = 0;
  // Updates after which q_min(s,a) > q_max(s,a). Monitored only: the ordering
  // is guaranteed for synchronous sweeps, not for sampled updates.
  std::uint64_t ordering_violations = 0;
};

/// Tabular ε-greedy Q-learning with the TD update
///   Q <- Q + α (g + γ max_a' Q(s', a') - Q).
/// Entering a terminal state ends the episode and bootstraps with 0; a
/// successor without enabled actions bootstraps with min(g) / (1 - γ).
QTable classic_q_learning(const FiniteMdp& mdp, const LearnConfig& config,
                          TrainingReport* report = nullptr);

/// Q-learning with uniform discretization: classic Q-learning on the
/// center-point map of uniform_mdp.
QTable uniform_q_learning(const SystemModel& model, const GridPartition& state_grid,
                          const GridPartition& action_grid, const std::vector<std::uint8_t>& terminal,
                          const LearnConfig& config, TrainingReport* report = nullptr);

/// Double-table learning on a symbolic model. Each step updates
///   q_min <- q_min + α (g_min + γ min_{s'∈Δ} max_{a'} q_min(s',a') - q_min)
///   q_max <- q_max + α (g_max + γ max_{s'∈Δ} max_{a'} q_max(s',a') - q_max)
/// and moves to a member of Δ(s, a) chosen by config.successor_selection.
/// `terminal` (empty or one flag per state) marks goal cells: value 0,
/// episodes end there.
QTablePair symbolic_double_q_learning(const SymbolicModel& sym, const std::vector<std::uint8_t>& terminal,
                                      const LearnConfig& config, TrainingReport* report = nullptr);

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct ValueIterationOptions {
  double gamma = 0.9;
  double tolerance = 1e-8;
  std::size_t max_sweeps = 100000;
  double q_init = 0.0;
  unsigned jobs = 1;
  // Called with the k-th iterate after sweep k (k >= 1).
  std::function<void(std::size_t, const QTablePair&)> observer;
};

/// Synchronous sweeps of both Bellman operators until the sup-norm change
/// falls below the tolerance. Residuals are appended to `residuals` when
/// given. Throws ConvergenceError after max_sweeps.
QTablePair value_iteration_pair(const SymbolicModel& sym, const std::vector<std::uint8_t>& terminal,
                                const ValueIterationOptions& options,
                                std::vector<double>* residuals = nullptr);

enum class PolicySource { from_q_min, from_q_max };

struct PolicyTable {
  static constexpr CellId kSink = std::numeric_limits<CellId>::max();

  std::vector<CellId> action_of;
  PolicySource source = PolicySource::from_q_max;

  bool is_sink(CellId s) const { return action_of[s] == kSink; }
};

/// Row-wise argmax over enabled actions; ties go to the lowest index.
PolicyTable extract_policy(const QTablePair& pair, PolicySource which);
PolicyTable extract_policy(const QTable& table);

}  // namespace symq
