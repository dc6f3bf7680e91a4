#pragma once
#include <cmath>
#include <cstdint>
#include <vector>

#include "symq/abstraction.hpp"
#include "symq/dynamics.hpp"
#include "symq/learner.hpp"
#include "symq/rng.hpp"

namespace symq::testing {

// x' = 0.5 x + 0.25 u on [-1, 1], g = -x^2 - 0.1 u^2.
inline SystemModel toy_model() {
  SystemModel m;
  m.name = "toy";
  m.state_space = Box({-1.0}, {1.0});
  m.action_space = Box({-1.0}, {1.0});
  m.dynamics = [](std::span<const double> x, std::span<const double> u) {
    return Vec{0.5 * x[0] + 0.25 * u[0]};
  };
  m.reward_fn = [](std::span<const double> x, std::span<const double> u) {
    return -x[0] * x[0] - 0.1 * u[0] * u[0];
  };
  m.lipschitz.f_state = 0.5;
  m.lipschitz.f_action = 0.25;
  m.lipschitz.g_state = 2.0;
  m.lipschitz.g_action = 0.2;
  m.action_encoding = ActionEncoding::cells;
  return m;
}

// Symbolic model of the toy with n state cells and m action cells.
inline SymbolicModel toy_symbolic(std::size_t n, std::size_t m) {
  const SystemModel toy = toy_model();
  const GridPartition sg = build_grid_with_counts(toy.state_space, {n});
  const GridPartition ag = build_grid_with_counts(toy.action_space, {m});
  return build_symbolic_model(toy, sg, ag).model;
}

// Same grids, rewards replaced by g at the cell centers (g_min = g_max).
inline SymbolicModel toy_center_reward(std::size_t n, std::size_t m) {
  const SystemModel toy = toy_model();
  SymbolicModel sym = toy_symbolic(n, m);
  for (CellId s = 0; s < sym.n_states(); ++s) {
    const Vec xc = cell_center(sym.state_grid, s);
    for (CellId a = 0; a < sym.n_actions(); ++a) {
      const double g = toy.reward_fn(xc, cell_center(sym.action_grid, a));
      sym.reward_min[sym.pair_index(s, a)] = g;
      sym.reward_max[sym.pair_index(s, a)] = g;
    }
  }
  return sym;
}

// Small random symbolic model: arbitrary successor sets and reward intervals.
inline SymbolicModel random_symbolic(std::uint64_t seed, std::size_t n_states, std::size_t n_actions) {
  Rng rng(seed);
  SymbolicModel sym;
  sym.system = "random";
  sym.state_grid = build_grid_with_counts(Box({0.0}, {1.0}), {n_states});
  sym.action_grid = build_grid_with_counts(Box({0.0}, {1.0}), {n_actions});
  sym.offsets.push_back(0);
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      std::vector<CellId> succ;
      for (CellId t = 0; t < n_states; ++t) {
        if (rng.bernoulli(0.3)) succ.push_back(t);
      }
      if (succ.empty()) succ.push_back(static_cast<CellId>(rng.index(n_states)));
      sym.successor_data.insert(sym.successor_data.end(), succ.begin(), succ.end());
      sym.offsets.push_back(sym.successor_data.size());
      const double lo = rng.uniform(-2.0, 1.0);
      sym.reward_min.push_back(lo);
      sym.reward_max.push_back(lo + rng.uniform(0.0, 1.5));
    }
  }
  return sym;
}

}  // namespace symq::testing
