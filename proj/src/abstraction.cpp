#include "symq/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "symq/parallel.hpp"
#include "symq/rng.hpp"

namespace symq {

std::span<const CellId> SymbolicModel::successors(CellId s, CellId a) const {
  const std::size_t p = pair_index(s, a);
  return {successor_data.data() + offsets[p], static_cast<std::size_t>(offsets[p + 1] - offsets[p])};
}

std::vector<CellId> SymbolicModel::enabled_actions(CellId s) const {
  std::vector<CellId> out;
  for (CellId a = 0; a < n_actions(); ++a) {
    if (enabled(s, a)) out.push_back(a);
  }
  return out;
}

bool SymbolicModel::is_sink(CellId s) const {
  for (CellId a = 0; a < n_actions(); ++a) {
    if (enabled(s, a)) return false;
  }
  return true;
}

GridPartition make_action_grid(const SystemModel& model, ActionEncoding encoding,
                               const std::vector<std::size_t>& counts) {
  if (encoding == ActionEncoding::levels) return build_level_grid(model.action_space, counts);
  return build_grid_with_counts(model.action_space, counts);
}

Vec action_representative(const SystemModel& model, const GridPartition& action_grid, CellId a) {
  return model.action_space.clip(cell_center(action_grid, a));
}

namespace {

// Cells meeting the closed box [lo, hi], as a sorted list of flat ids.
std::vector<CellId> cells_meeting(const GridPartition& grid, const Vec& lo, const Vec& hi) {
  const std::size_t n = grid.dim();
  std::vector<std::size_t> first(n), last(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto range = grid.axis_overlap(i, lo[i], hi[i]);
    if (!range) return {};
    first[i] = range->first;
    last[i] = range->second;
  }
  std::vector<CellId> out;
  std::vector<std::size_t> idx = first;
  while (true) {
    out.push_back(grid.flat_index(idx));
    std::size_t axis = n;
    while (axis-- > 0) {
      if (idx[axis] < last[axis]) {
        ++idx[axis];
        break;
      }
      idx[axis] = first[axis];
    }
    if (axis == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

struct InflatedImage {
  Vec lo;
  Vec hi;
  bool inside = true;  // inflated box within the state box
};

InflatedImage inflated_image(const SystemModel& model, const SymbolicModel& sym, const Vec& s_center,
                             const Vec& a_rep) {
  const Vec image = step(model, s_center, a_rep);
  InflatedImage out{Vec(image.size()), Vec(image.size())};
  const Box& box = model.state_space;
  for (std::size_t i = 0; i < image.size(); ++i) {
    out.lo[i] = image[i] - sym.axis_inflation[i];
    out.hi[i] = image[i] + sym.axis_inflation[i];
    if (out.lo[i] < box.lower[i] || out.hi[i] > box.upper[i]) out.inside = false;
  }
  return out;
}

std::vector<CellId> successor_cells(const SymbolicModel& sym, const InflatedImage& img) {
  if (sym.enabling == EnablingMode::strict && !img.inside) return {};
  return cells_meeting(sym.state_grid, img.lo, img.hi);
}

}  // namespace

std::pair<double, double> reward_bounds(const SystemModel& model, const GridPartition& state_grid,
                                        const GridPartition& action_grid, CellId s, CellId a,
                                        RewardBoundMode mode) {
  if (s >= state_grid.total_cells || a >= action_grid.total_cells) {
    throw std::invalid_argument("reward_bounds: cell id out of range");
  }
  const Box s_box = state_grid.cell_box(s);
  Box a_box = action_grid.cell_box(a);
  for (std::size_t i = 0; i < a_box.dim(); ++i) {
    a_box.lower[i] = std::max(a_box.lower[i], model.action_space.lower[i]);
    a_box.upper[i] = std::min(a_box.upper[i], model.action_space.upper[i]);
  }
  const Vec s_c = cell_center(state_grid, s);
  const Vec a_c = action_representative(model, action_grid, a);

  switch (mode) {
    case RewardBoundMode::exact_callback: {
      if (!model.reward_extrema) {
        throw std::invalid_argument(model.name + ": no exact reward extrema available");
      }
      return model.reward_extrema(s_box, a_box);
    }
    case RewardBoundMode::lipschitz: {
      const double g = model.reward_fn(s_c, a_c);
      const double r = model.lipschitz.g_state * state_grid.max_spacing() +
                       model.lipschitz.g_action * action_grid.max_spacing() + model.reward_jump;
      return {g - r, g + r};
    }
    case RewardBoundMode::corner_sampling: {
      double lo = model.reward_fn(s_c, a_c);
      double hi = lo;
      const std::size_t n = s_box.dim();
      const std::size_t m = a_box.dim();
      Vec x(n), v(m);
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n + m)); ++mask) {
        for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1 ? s_box.upper[i] : s_box.lower[i];
        for (std::size_t j = 0; j < m; ++j) v[j] = (mask >> (n + j)) & 1 ? a_box.upper[j] : a_box.lower[j];
        const double g = model.reward_fn(x, v);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
      }
      return {lo, hi};
    }
  }
  throw std::invalid_argument("reward_bounds: unknown mode");
}

AbstractionResult build_symbolic_model(const SystemModel& model, const GridPartition& state_grid,
                                       const GridPartition& action_grid,
                                       const AbstractionOptions& options) {
  model.lipschitz.validate();
  if (state_grid.dim() != model.state_space.dim() || action_grid.dim() != model.action_space.dim()) {
    throw std::invalid_argument("abstraction: grid dimension does not match the model");
  }
  AbstractionResult result;
  SymbolicModel& sym = result.model;
  sym.system = model.name;
  sym.state_grid = state_grid;
  sym.action_grid = action_grid;
  sym.lipschitz = model.lipschitz;
  sym.reward_mode = options.reward_mode;
  sym.enabling = options.enabling;
  sym.clip_state = model.clip_state;
  const double mu_term = model.lipschitz.f_action * action_grid.max_spacing();
  sym.inflation = model.lipschitz.f_state * state_grid.max_spacing() + mu_term;
  for (double eta : state_grid.spacing) sym.axis_inflation.push_back(model.lipschitz.f_state * eta + mu_term);

  const std::size_t n_s = sym.n_states();
  const std::size_t n_a = sym.n_actions();
  std::vector<Vec> action_reps(n_a);
  for (CellId a = 0; a < n_a; ++a) action_reps[a] = action_representative(model, action_grid, a);

  std::vector<std::vector<std::vector<CellId>>> per_state(n_s);
  sym.reward_min.assign(n_s * n_a, 0.0);
  sym.reward_max.assign(n_s * n_a, 0.0);
  parallel_for(n_s, options.jobs, [&](std::size_t s) {
    const Vec s_c = cell_center(state_grid, static_cast<CellId>(s));
    auto& lists = per_state[s];
    lists.resize(n_a);
    for (CellId a = 0; a < n_a; ++a) {
      lists[a] = successor_cells(sym, inflated_image(model, sym, s_c, action_reps[a]));
      const auto [lo, hi] = reward_bounds(model, state_grid, action_grid, static_cast<CellId>(s), a,
                                          options.reward_mode);
      sym.reward_min[s * n_a + a] = lo;
      sym.reward_max[s * n_a + a] = hi;
    }
  });

  sym.offsets.assign(n_s * n_a + 1, 0);
  std::size_t total = 0;
  for (std::size_t s = 0; s < n_s; ++s) {
    for (std::size_t a = 0; a < n_a; ++a) {
      total += per_state[s][a].size();
      sym.offsets[s * n_a + a + 1] = total;
    }
  }
  sym.successor_data.reserve(total);
  for (auto& lists : per_state) {
    for (auto& l : lists) sym.successor_data.insert(sym.successor_data.end(), l.begin(), l.end());
    lists.clear();
    lists.shrink_to_fit();
  }
  for (CellId s = 0; s < n_s; ++s) {
    if (sym.is_sink(s)) result.sinks.push_back(s);
  }
  return result;
}

AbstractionResult build_symbolic_model(const SystemModel& model, const Vec& eta, const Vec& mu,
                                       const AbstractionOptions& options) {
  return build_symbolic_model(model, build_grid(model.state_space, eta),
                              build_grid(model.action_space, mu), options);
}

bool verify_successors(const SystemModel& model, const SymbolicModel& sym) {
  const GridPartition& g = sym.state_grid;
  for (CellId s = 0; s < sym.n_states(); ++s) {
    const Vec s_c = cell_center(g, s);
    for (CellId a = 0; a < sym.n_actions(); ++a) {
      const InflatedImage img =
          inflated_image(model, sym, s_c, action_representative(model, sym.action_grid, a));
      std::vector<CellId> expected;
      if (sym.enabling == EnablingMode::clip || img.inside) {
        for (CellId c = 0; c < g.total_cells; ++c) {
          const auto m = g.multi_index(c);
          bool meets = true;
          for (std::size_t i = 0; i < g.dim() && meets; ++i) {
            meets = g.cell_lower(i, m[i]) <= img.hi[i] && g.cell_upper(i, m[i]) >= img.lo[i];
          }
          if (meets) expected.push_back(c);
        }
      }
      const auto got = sym.successors(s, a);
      if (!std::equal(got.begin(), got.end(), expected.begin(), expected.end())) return false;
    }
  }
  return true;
}

SimulationCheck check_alternating_simulation(const SystemModel& model, const SymbolicModel& sym,
                                             std::size_t n_samples, std::uint64_t seed) {
  Rng rng(seed);
  SimulationCheck out;
  const Box& S = model.state_space;
  const Box& A = model.action_space;
  Vec x(S.dim()), v(A.dim());
  for (std::size_t n = 0; n < n_samples; ++n) {
    for (std::size_t i = 0; i < S.dim(); ++i) x[i] = rng.uniform(S.lower[i], S.upper[i]);
    for (std::size_t i = 0; i < A.dim(); ++i) v[i] = rng.uniform(A.lower[i], A.upper[i]);
    const CellId s = quantize(sym.state_grid, x);
    const CellId a = quantize(sym.action_grid, v);
    if (!sym.enabled(s, a)) continue;
    ++out.total;
    const Vec next = step(model, x, v);
    if (!S.contains(next)) {
      ++out.violations;
      continue;
    }
    const auto succ = sym.successors(s, a);
    if (!std::binary_search(succ.begin(), succ.end(), quantize(sym.state_grid, next))) ++out.violations;
  }
  return out;
}

}  // namespace symq
