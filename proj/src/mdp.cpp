#include "symq/mdp.hpp"

#include <stdexcept>

#include "symq/rng.hpp"

namespace symq {

void FiniteMdp::validate() const {
  if (n_states == 0 || n_actions == 0) throw std::invalid_argument("mdp: empty state or action set");
  if (next.size() != n_states * n_actions || reward.size() != n_states * n_actions) {
    throw std::invalid_argument("mdp: table sizes do not match n_states * n_actions");
  }
  if (!terminal.empty() && terminal.size() != n_states) {
    throw std::invalid_argument("mdp: terminal flags must cover every state");
  }
  for (auto n : next) {
    if (n != kDisabled && n >= n_states) throw std::invalid_argument("mdp: successor out of range");
  }
}

FiniteMdp uniform_mdp(const SystemModel& model, const GridPartition& state_grid,
                      const GridPartition& action_grid, const std::vector<std::uint8_t>& terminal) {
  FiniteMdp mdp;
  mdp.n_states = state_grid.total_cells;
  mdp.n_actions = action_grid.total_cells;
  mdp.next.resize(mdp.n_states * mdp.n_actions);
  mdp.reward.resize(mdp.n_states * mdp.n_actions);
  mdp.terminal = terminal.empty() ? std::vector<std::uint8_t>(mdp.n_states, 0) : terminal;
  std::vector<Vec> reps(mdp.n_actions);
  for (CellId a = 0; a < mdp.n_actions; ++a) reps[a] = action_representative(model, action_grid, a);
  for (CellId s = 0; s < mdp.n_states; ++s) {
    const Vec x = cell_center(state_grid, s);
    for (CellId a = 0; a < mdp.n_actions; ++a) {
      const Vec nx = step(model, x, reps[a]);
      const std::size_t p = mdp.pair_index(s, a);
      mdp.next[p] = state_grid.box.contains(nx) ? quantize(state_grid, nx) : FiniteMdp::kDisabled;
      mdp.reward[p] = model.reward_fn(x, reps[a]);
    }
  }
  mdp.validate();
  return mdp;
}

SimulationCheck check_alternating_simulation(const SystemModel& model, const GridPartition& state_grid,
                                             const GridPartition& action_grid, const FiniteMdp& mdp,
                                             std::size_t n_samples, std::uint64_t seed) {
  Rng rng(seed);
  SimulationCheck out;
  const Box& S = model.state_space;
  const Box& A = model.action_space;
  Vec x(S.dim()), v(A.dim());
  for (std::size_t n = 0; n < n_samples; ++n) {
    for (std::size_t i = 0; i < S.dim(); ++i) x[i] = rng.uniform(S.lower[i], S.upper[i]);
    for (std::size_t i = 0; i < A.dim(); ++i) v[i] = rng.uniform(A.lower[i], A.upper[i]);
    const CellId s = quantize(state_grid, x);
    const CellId a = quantize(action_grid, v);
    const auto predicted = mdp.next[mdp.pair_index(s, a)];
    if (predicted == FiniteMdp::kDisabled) continue;
    ++out.total;
    const Vec nx = step(model, x, v);
    if (!state_grid.box.contains(nx) || quantize(state_grid, nx) != predicted) ++out.violations;
  }
  return out;
}

}  // namespace symq
