#include "symq/refinement.hpp"

#include <algorithm>
#include <cmath>

namespace symq {

Vec RefinedController::control(std::span<const double> state) const {
  const CellId s = quantize(state_grid, state);
  if (policy.is_sink(s)) throw ControllerUndefined(s);
  Vec u = cell_center(action_grid, policy.action_of[s]);
  return action_space.clip(u);
}

RefinedController refine_policy(const SystemModel& model, const GridPartition& state_grid,
                                const GridPartition& action_grid, PolicyTable policy) {
  if (policy.action_of.size() != state_grid.total_cells) {
    throw std::invalid_argument("policy does not match the state grid");
  }
  for (CellId a : policy.action_of) {
    if (a != PolicyTable::kSink && a >= action_grid.total_cells) {
      throw std::invalid_argument("policy refers to an action outside the action grid");
    }
  }
  return RefinedController{std::move(policy), state_grid, action_grid, model.action_space};
}

ClosedLoopResult simulate_closed_loop(const SystemModel& model, const RefinedController& ctrl,
                                      std::span<const double> x0, std::size_t horizon,
                                      const GoalPredicate& goal) {
  if (!model.state_space.contains(x0)) throw std::domain_error("initial state outside the state box");
  ClosedLoopResult out;
  Vec x(x0.begin(), x0.end());
  for (std::size_t k = 0;; ++k) {
    if (goal && goal(x)) {
      out.reached = true;
      out.steps_to_goal = k;
      break;
    }
    if (k == horizon) break;
    Vec u;
    try {
      u = ctrl.control(x);
    } catch (const ControllerUndefined& e) {
      out.trajectory.final_state = x;
      throw ControllerUndefined(e.cell(), std::move(out.trajectory));
    }
    const double r = reward(model, x, u);
    Vec next = step(model, x, u);
    out.trajectory.steps.push_back({k, std::move(x), std::move(u), r});
    x = std::move(next);
  }
  out.trajectory.final_state = x;
  return out;
}

bool trajectory_consistent(const SystemModel& model, const Trajectory& t) {
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    if (t.steps[i].k != i) return false;
    const Vec next = step(model, t.steps[i].state, t.steps[i].action);
    const Vec& recorded = i + 1 < t.steps.size() ? t.steps[i + 1].state : t.final_state;
    if (next != recorded) return false;
    if (reward(model, t.steps[i].state, t.steps[i].action) != t.steps[i].reward) return false;
  }
  return true;
}

GoalPredicate mountain_car_goal(const SystemModel& model) {
  const auto it = model.parameters.find("goal_position");
  const double goal = it == model.parameters.end() ? 0.6 : it->second;
  return [goal](std::span<const double> x) { return x[0] >= goal; };
}

GoalPredicate origin_ball_goal(double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("goal radius must be non-negative");
  return [radius](std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [radius](double v) { return std::abs(v) <= radius; });
  };
}

std::vector<std::uint8_t> goal_cells(const SystemModel& model, const GridPartition& grid) {
  std::vector<std::uint8_t> flags(grid.total_cells, 0);
  if (model.name == "mountain_car") {
    const auto it = model.parameters.find("goal_position");
    const double goal = it == model.parameters.end() ? 0.6 : it->second;
    const auto range = grid.axis_overlap(0, goal, grid.box.upper[0]);
    if (!range) return flags;
    for (CellId id = 0; id < grid.total_cells; ++id) {
      const std::size_t j = grid.multi_index(id)[0];
      if (j >= range->first && j <= range->second && grid.cell_upper(0, j) >= goal) flags[id] = 1;
    }
    return flags;
  }
  Vec origin(grid.dim(), 0.0);
  if (grid.box.contains(origin)) flags[quantize(grid, origin)] = 1;
  return flags;
}

}  // namespace symq
