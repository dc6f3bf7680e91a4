#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "symq/dynamics.hpp"
#include "symq/grid.hpp"

namespace symq {

/// How the per-(s,a) reward interval [g_min, g_max] is obtained.
///  lipschitz       - g(s_c, a_c) -/+ (L_gξ η_max + L_gv μ_max + reward_jump)
///  corner_sampling - min/max of g over all cell corners and the center.
///                    Only sound for rewards that are monotone or separately
///                    convex/concave along each axis.
///  exact_callback  - model.reward_extrema
enum class RewardBoundMode { lipschitz, corner_sampling, exact_callback };

/// Which actions are enabled at a state cell.
///  clip   - every action; the inflated image is intersected with the state box
///  strict - only actions whose inflated image lies inside the state box
enum class EnablingMode { clip, strict };

struct AbstractionOptions {
  RewardBoundMode reward_mode = RewardBoundMode::lipschitz;
  EnablingMode enabling = EnablingMode::clip;
  unsigned jobs = 1;
};

/// Finite nondeterministic abstraction (S_D, A_D, Δ, g_max, g_min).
///
/// Successor lists are stored contiguously (CSR layout) in (s, a) order and
/// each list is sorted. An action is enabled at s iff its list is non-empty.
struct SymbolicModel {
  std::string system;
  GridPartition state_grid;
  GridPartition action_grid;
  LipschitzBounds lipschitz;  // constants used for the inflation
  RewardBoundMode reward_mode = RewardBoundMode::lipschitz;
  EnablingMode enabling = EnablingMode::clip;
  bool clip_state = true;
  double inflation = 0.0;   // L_fξ η_max + L_fv μ_max
  Vec axis_inflation;       // L_fξ η_i + L_fv μ_max per state axis

  std::vector<std::uint64_t> offsets;  // size n_states * n_actions + 1
  std::vector<CellId> successor_data;
  std::vector<double> reward_min;
  std::vector<double> reward_max;

  std::size_t n_states() const { return state_grid.total_cells; }
  std::size_t n_actions() const { return action_grid.total_cells; }
  std::size_t pair_index(CellId s, CellId a) const { return std::size_t{s} * n_actions() + a; }

  std::span<const CellId> successors(CellId s, CellId a) const;
  bool enabled(CellId s, CellId a) const { return offsets[pair_index(s, a) + 1] > offsets[pair_index(s, a)]; }
  std::vector<CellId> enabled_actions(CellId s) const;
  bool is_sink(CellId s) const;
};

struct AbstractionResult {
  SymbolicModel model;
  std::vector<CellId> sinks;  // states without enabled actions
};

/// Action partition for a model: level grid or cell grid per its encoding.
GridPartition make_action_grid(const SystemModel& model, ActionEncoding encoding,
                               const std::vector<std::size_t>& counts);

/// Representative action of an action cell: its center, clamped into the
/// model's action box.
Vec action_representative(const SystemModel& model, const GridPartition& action_grid, CellId a);

/// Builds Σ_D over the given partitions. Per (s, a): image = step(s_c, a_c),
/// inflated per axis by L_fξ η_i + L_fv μ_max; Δ(s, a) = cells meeting the
/// inflated box.
AbstractionResult build_symbolic_model(const SystemModel& model, const GridPartition& state_grid,
                                       const GridPartition& action_grid,
                                       const AbstractionOptions& options = {});

/// Same, from spacings η (state) and μ (action, cell encoding).
AbstractionResult build_symbolic_model(const SystemModel& model, const Vec& eta, const Vec& mu,
                                       const AbstractionOptions& options = {});

/// Interval guaranteed (per mode caveats) to contain g over s x a.
std::pair<double, double> reward_bounds(const SystemModel& model, const GridPartition& state_grid,
                                        const GridPartition& action_grid, CellId s, CellId a,
                                        RewardBoundMode mode);

/// Recomputes every Δ(s, a) by scanning all cells; true iff identical.
bool verify_successors(const SystemModel& model, const SymbolicModel& sym);

struct SimulationCheck {
  std::size_t violations = 0;
  std::size_t total = 0;
};

/// Samples (ξ, v) uniformly from the model boxes; for each sample whose
/// action cell is enabled at the state cell, checks that the cell of
/// step(ξ, v) belongs to Δ(s, a).
SimulationCheck check_alternating_simulation(const SystemModel& model, const SymbolicModel& sym,
                                             std::size_t n_samples, std::uint64_t seed);

}  // namespace symq
