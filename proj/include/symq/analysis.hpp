#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "symq/abstraction.hpp"
#include "symq/dynamics.hpp"
#include "symq/learner.hpp"

namespace symq {

/// Moduli L_ξ^(k), L_v^(k) of the k-th Q iterate, k = 1..n (stored at k-1):
///   L_ξ^(k) = γ L_fξ (L_ξ^(k-1) + L_A L_v^(k-1)) + L_gξ
///   L_v^(k) = γ L_fv (L_ξ^(k-1) + L_A L_v^(k-1)) + L_gv
/// starting from (L_gξ, L_gv).
struct LipschitzSequence {
  std::vector<double> l_state;
  std::vector<double> l_action;
  double gamma = 0.0;
  LipschitzBounds inputs;

  std::size_t size() const { return l_state.size(); }
  double max_state() const;
  double max_action() const;
};

LipschitzSequence lipschitz_recursion(const LipschitzBounds& bounds, double gamma, std::size_t n);

/// L_ξ^(k) η + L_v^(k) μ, 1 <= k <= seq.size().
double precision_bound(const LipschitzSequence& seq, std::size_t k, double eta, double mu);

/// Constants for the precision analysis of a concrete abstraction:
///  - L_A defaults to diameter(A) / min_i η_i (the smallest distance between
///    distinct state-cell centers) when the model leaves it at 0;
///  - a reward with jumps of height J gets L_gξ >= J / η_max, so that
///    L_gξ η_max covers the jump.
LipschitzBounds grid_scale_bounds(const SystemModel& model, const GridPartition& state_grid,
                                  std::optional<double> admissible_override = std::nullopt);

struct Discretization {
  double eta = 0.0;
  double mu = 0.0;
};

/// η, μ with L_ξ^max η + L_v^max μ <= ε: equal split of ε between the two
/// terms, or all of it to η when the action set is finite (μ = 0). A term
/// whose constant is 0 is unconstrained and gets the corresponding cap
/// (box width), or +inf when no cap is given.
Discretization choose_discretization(const LipschitzSequence& seq, double epsilon, bool action_finite,
                                     std::optional<double> eta_cap = std::nullopt,
                                     std::optional<double> mu_cap = std::nullopt);

struct StabilityReport {
  bool feasible = false;
  double spectral_radius = 0.0;            // of γ [[L_fξ, L_A], [L_fξ, L_A]]
  std::optional<std::array<double, 4>> p_matrix;  // row-major, when feasible
  double lyapunov_residual_max_eig = 0.0;  // largest eigenvalue of γ²MᵀPM - P
  double recursion_spectral_radius = 0.0;  // of γ [[L_fξ, L_A L_fξ], [L_fv, L_A L_fv]]
  bool recursion_contractive = false;
  bool matrices_disagree = false;          // verdicts of the two matrices differ
  std::optional<std::array<double, 2>> recursion_fixed_point;  // (I - γM)^-1 (L_gξ, L_gv)
  std::array<double, 2> claimed_limit{};   // (L_gξ, L_gv)
};

/// Stability of the modulus recursion via the discrete Lyapunov equation
/// γ² MᵀPM - P = -I with M = [[L_fξ, L_A], [L_fξ, L_A]]; feasible iff the
/// solve yields P ≻ 0.
StabilityReport lmi_stability_check(double gamma, const LipschitzBounds& bounds);

/// max over enabled (s, a) of q_max - q_min.
double q_distance(const QTablePair& pair);

/// Fraction of state cells whose two policies pick different actions.
double nonsimilarity_ratio(const PolicyTable& p_min, const PolicyTable& p_max);

}  // namespace symq
