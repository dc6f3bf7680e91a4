#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symq/box.hpp"

namespace symq {

/// Lipschitz data of a model, all with respect to the infinity norm.
struct LipschitzBounds {
  double f_state = 0.0;     // L_fξ
  double f_action = 0.0;    // L_fv
  double g_state = 0.0;     // L_gξ
  double g_action = 0.0;    // L_gv
  double admissible = 0.0;  // L_A; 0 means "derive from the grid" (see analysis.hpp)

  void validate() const;
};

/// How an action axis is cut into cells.
///  cells  - uniform cells over the action box, representative = cell center
///  levels - n evenly spaced levels including both box ends; each level is
///           the center of a cell of width (upper-lower)/(n-1)
enum class ActionEncoding { cells, levels };

using DynamicsFn = std::function<Vec(std::span<const double>, std::span<const double>)>;
using RewardFn = std::function<double(std::span<const double>, std::span<const double>)>;
/// Exact (min, max) of the reward over a state cell x action cell.
using RewardExtremaFn = std::function<std::pair<double, double>(const Box&, const Box&)>;

struct SystemModel {
  std::string name;
  Box state_space;
  Box action_space;
  DynamicsFn dynamics;
  RewardFn reward_fn;
  LipschitzBounds lipschitz;
  // Height of the largest jump of a piecewise-continuous reward (0 if the
  // reward is Lipschitz).
  double reward_jump = 0.0;
  RewardExtremaFn reward_extrema;  // optional
  bool clip_state = true;
  ActionEncoding action_encoding = ActionEncoding::cells;
  std::size_t default_action_cells = 3;
  std::map<std::string, double> parameters;
};

/// f(state, action), clipped into the state box when model.clip_state is set.
/// Throws std::invalid_argument on dimension mismatch and std::domain_error
/// when state or action lies outside its box.
Vec step(const SystemModel& model, std::span<const double> state, std::span<const double> action);

double reward(const SystemModel& model, std::span<const double> state,
              std::span<const double> action);

SystemModel mountain_car();
SystemModel van_der_pol();

/// Built-in model by name ("mountain_car", "van_der_pol").
SystemModel builtin_model(std::string_view name);

struct LipschitzCheck {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0;     // max of lhs - rhs over all samples
  double empirical_state = 0.0;  // largest observed |Δf| / |Δξ| with equal actions
};

/// Samples random pairs and checks
/// |f(ξ,v) - f(ξ',v')| <= L_fξ |ξ-ξ'| + L_fv |v-v'| + 1e-12.
LipschitzCheck check_lipschitz(const SystemModel& model, std::size_t samples, std::uint64_t seed);

}  // namespace symq
