#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symq/dynamics.hpp"
#include "symq/grid.hpp"
#include "symq/learner.hpp"

namespace symq {

struct TrajectoryStep {
  std::size_t k = 0;
  Vec state;
  Vec action;
  double reward = 0.0;
};

/// steps[k].state is x_k; final_state is the state after the last step (x0
/// for an empty trajectory).
struct Trajectory {
  std::vector<TrajectoryStep> steps;
  Vec final_state;
};

class ControllerUndefined : public std::runtime_error {
 public:
  ControllerUndefined(CellId cell, Trajectory partial = {})
      : std::runtime_error("controller undefined at sink cell " + std::to_string(cell)),
        cell_(cell),
        partial_(std::move(partial)) {}
  CellId cell() const { return cell_; }
  const Trajectory& partial() const { return partial_; }

 private:
  CellId cell_;
  Trajectory partial_;
};

/// Piecewise-constant controller: quantize the state, apply the representative
/// (center, clamped into the action box) of the chosen action cell.
struct RefinedController {
  PolicyTable policy;
  GridPartition state_grid;
  GridPartition action_grid;
  Box action_space;

  Vec control(std::span<const double> state) const;
};

RefinedController refine_policy(const SystemModel& model, const GridPartition& state_grid,
                                const GridPartition& action_grid, PolicyTable policy);

using GoalPredicate = std::function<bool(std::span<const double>)>;

struct ClosedLoopResult {
  Trajectory trajectory;
  bool reached = false;
  std::optional<std::size_t> steps_to_goal;
};

/// Iterates x <- step(x, control(x)) for at most `horizon` steps, stopping at
/// the first state satisfying `goal` (checked before every step, so a goal x0
/// gives an empty trajectory with steps_to_goal = 0).
ClosedLoopResult simulate_closed_loop(const SystemModel& model, const RefinedController& ctrl,
                                      std::span<const double> x0, std::size_t horizon,
                                      const GoalPredicate& goal);

/// True iff every recorded state is the step image of its predecessor.
bool trajectory_consistent(const SystemModel& model, const Trajectory& t);

/// Mountain car: position >= goal_position. Van der Pol: infinity-norm ball
/// around the origin.
GoalPredicate mountain_car_goal(const SystemModel& model);
GoalPredicate origin_ball_goal(double radius);

/// Learning goal cells. Mountain car: the last position column (the cells
/// containing position 0.6). Van der Pol: the cell containing the origin.
std::vector<std::uint8_t> goal_cells(const SystemModel& model, const GridPartition& state_grid);

}  // namespace symq
