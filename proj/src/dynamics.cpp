#include "symq/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "symq/rng.hpp"

namespace symq {

void LipschitzBounds::validate() const {
  for (double v : {f_state, f_action, g_state, g_action, admissible}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("lipschitz bounds must be finite and non-negative");
    }
  }
}

namespace {

void check_arguments(const SystemModel& model, std::span<const double> state,
                     std::span<const double> action) {
  if (state.size() != model.state_space.dim() || action.size() != model.action_space.dim()) {
    throw std::invalid_argument(model.name + ": state/action dimension mismatch");
  }
  if (!model.state_space.contains(state)) {
    throw std::domain_error(model.name + ": state outside the state space");
  }
  if (!model.action_space.contains(action)) {
    throw std::domain_error(model.name + ": action outside the action space");
  }
}

}  // namespace

Vec step(const SystemModel& model, std::span<const double> state, std::span<const double> action) {
  check_arguments(model, state, action);
  Vec next = model.dynamics(state, action);
  if (model.clip_state) return model.state_space.clip(next);
  return next;
}

double reward(const SystemModel& model, std::span<const double> state,
              std::span<const double> action) {
  check_arguments(model, state, action);
  return model.reward_fn(state, action);
}

SystemModel mountain_car() {
  constexpr double kGoal = 0.6;
  SystemModel m;
  m.name = "mountain_car";
  m.state_space = Box({-1.2, -0.07}, {kGoal, 0.07});
  m.action_space = Box({-1.0}, {1.0});
  // ξ+ = A ξ + Φ(ξ) + B v with A = [[1,1],[0,1]], B = (0, 0.001), Φ = (0, -0.0025 cos 3ξ1).
  // Position is advanced with the old velocity.
  m.dynamics = [](std::span<const double> x, std::span<const double> v) {
    return Vec{x[0] + x[1], x[1] + 0.001 * v[0] - 0.0025 * std::cos(3.0 * x[0])};
  };
  m.reward_fn = [](std::span<const double> x, std::span<const double>) {
    return x[0] >= kGoal ? 0.0 : -1.0;
  };
  // Cell rewards: 0 on the goal column, -1 elsewhere.
  m.reward_extrema = [](const Box& cell, const Box&) {
    return cell.upper[0] >= kGoal ? std::pair{0.0, 0.0} : std::pair{-1.0, -1.0};
  };
  m.lipschitz.f_state = 1.0025;
  m.lipschitz.f_action = 0.001;
  m.reward_jump = 1.0;
  m.action_encoding = ActionEncoding::levels;
  m.default_action_cells = 3;
  m.parameters = {{"goal_position", kGoal}};
  return m;
}

SystemModel van_der_pol() {
  constexpr double kTau = 0.01;
  constexpr double kZeta = 2.0;
  SystemModel m;
  m.name = "van_der_pol";
  m.state_space = Box({-2.0, -3.0}, {2.0, 3.0});
  m.action_space = Box({-1.0}, {1.0});
  m.dynamics = [](std::span<const double> s, std::span<const double> u) {
    const double x = s[0];
    const double v = s[1];
    return Vec{x + kTau * v, v + kTau * (kZeta * (1.0 - x * x) * v - x + u[0])};
  };
  m.reward_fn = [](std::span<const double> s, std::span<const double>) {
    return -(s[0] * s[0] + s[1] * s[1]);
  };
  // Jacobian row sums over the box: row 1 is 1 + τ; row 2 peaks at |x| = 2,
  // |v| = 3 with τ(2ζ|x||v| + 1) + |1 + τζ(1 - x²)| = 0.25 + 0.94.
  m.lipschitz.f_state = 1.19;
  m.lipschitz.f_action = kTau;
  // |∇g|_1 = 2|x| + 2|v| <= 10 on the box.
  m.lipschitz.g_state = 10.0;
  m.lipschitz.g_action = 0.0;
  m.action_encoding = ActionEncoding::levels;
  m.default_action_cells = 3;
  m.parameters = {{"tau", kTau}, {"zeta", kZeta}};
  return m;
}

SystemModel builtin_model(std::string_view name) {
  if (name == "mountain_car") return mountain_car();
  if (name == "van_der_pol") return van_der_pol();
  throw std::invalid_argument("unknown system '" + std::string(name) + "'");
}

LipschitzCheck check_lipschitz(const SystemModel& model, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  const auto draw = [&rng](const Box& box) {
    Vec p(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i) p[i] = rng.uniform(box.lower[i], box.upper[i]);
    return p;
  };
  LipschitzCheck out;
  out.samples = samples;
  out.worst_excess = -INFINITY;
  const auto& L = model.lipschitz;
  for (std::size_t n = 0; n < samples; ++n) {
    const Vec x1 = draw(model.state_space);
    const Vec x2 = draw(model.state_space);
    const Vec v1 = draw(model.action_space);
    const Vec v2 = draw(model.action_space);
    const double lhs = inf_distance(model.dynamics(x1, v1), model.dynamics(x2, v2));
    const double rhs = L.f_state * inf_distance(x1, x2) + L.f_action * inf_distance(v1, v2);
    out.worst_excess = std::max(out.worst_excess, lhs - rhs);
    if (lhs > rhs + 1e-12) ++out.violations;
    const double dx = inf_distance(x1, x2);
    if (dx > 0.0) {
      out.empirical_state =
          std::max(out.empirical_state, inf_distance(model.dynamics(x1, v1), model.dynamics(x2, v1)) / dx);
    }
  }
  return out;
}

}  // namespace symq
