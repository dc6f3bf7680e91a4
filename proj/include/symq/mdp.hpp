#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "symq/abstraction.hpp"
#include "symq/dynamics.hpp"
#include "symq/grid.hpp"

namespace symq {

/// Finite deterministic MDP with dense (state x action) tables.
struct FiniteMdp {
  static constexpr std::uint32_t kDisabled = std::numeric_limits<std::uint32_t>::max();

  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<std::uint32_t> next;  // kDisabled marks a disabled pair
  std::vector<double> reward;
  std::vector<std::uint8_t> terminal;  // episode ends on entering; value 0

  std::size_t pair_index(std::size_t s, std::size_t a) const { return s * n_actions + a; }
  void validate() const;
};

/// Center-point discretization: next(s, a) = cell of step(s_c, a_c),
/// reward(s, a) = g(s_c, a_c). This is the successor map of uniform
/// discretization Q-learning.
FiniteMdp uniform_mdp(const SystemModel& model, const GridPartition& state_grid,
                      const GridPartition& action_grid, const std::vector<std::uint8_t>& terminal = {});

/// The alternating-simulation sampler run against a deterministic map: a
/// sample violates when the true successor cell differs from next(s, a).
SimulationCheck check_alternating_simulation(const SystemModel& model, const GridPartition& state_grid,
                                             const GridPartition& action_grid, const FiniteMdp& mdp,
                                             std::size_t n_samples, std::uint64_t seed);

}  // namespace symq
