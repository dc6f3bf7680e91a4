#include "symq/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace symq {

double LipschitzSequence::max_state() const {
  return l_state.empty() ? 0.0 : *std::max_element(l_state.begin(), l_state.end());
}

double LipschitzSequence::max_action() const {
  return l_action.empty() ? 0.0 : *std::max_element(l_action.begin(), l_action.end());
}

LipschitzSequence lipschitz_recursion(const LipschitzBounds& b, double gamma, std::size_t n) {
  b.validate();
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (n < 1) throw std::invalid_argument("recursion length must be >= 1");
  LipschitzSequence seq;
  seq.gamma = gamma;
  seq.inputs = b;
  seq.l_state.reserve(n);
  seq.l_action.reserve(n);
  double ls = b.g_state;
  double lv = b.g_action;
  seq.l_state.push_back(ls);
  seq.l_action.push_back(lv);
  for (std::size_t k = 2; k <= n; ++k) {
    const double carried = gamma * (ls + b.admissible * lv);
    const double next_s = carried * b.f_state + b.g_state;
    const double next_v = carried * b.f_action + b.g_action;
    ls = next_s;
    lv = next_v;
    seq.l_state.push_back(ls);
    seq.l_action.push_back(lv);
  }
  return seq;
}

double precision_bound(const LipschitzSequence& seq, std::size_t k, double eta, double mu) {
  if (k < 1 || k > seq.size()) throw std::invalid_argument("precision_bound: k out of range");
  return seq.l_state[k - 1] * eta + seq.l_action[k - 1] * mu;
}

LipschitzBounds grid_scale_bounds(const SystemModel& model, const GridPartition& state_grid,
                                  std::optional<double> admissible_override) {
  LipschitzBounds b = model.lipschitz;
  if (admissible_override) {
    b.admissible = *admissible_override;
  } else if (b.admissible == 0.0) {
    b.admissible = model.action_space.diameter() / state_grid.min_spacing();
  }
  if (model.reward_jump > 0.0) {
    b.g_state = std::max(b.g_state, model.reward_jump / state_grid.max_spacing());
  }
  b.validate();
  return b;
}

Discretization choose_discretization(const LipschitzSequence& seq, double epsilon, bool action_finite,
                                     std::optional<double> eta_cap, std::optional<double> mu_cap) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double inf = std::numeric_limits<double>::infinity();
  const double ls = seq.max_state();
  const double lv = seq.max_action();
  const auto capped = [](double v, std::optional<double> cap) { return cap ? std::min(v, *cap) : v; };
  Discretization d;
  if (action_finite) {
    d.eta = capped(ls > 0.0 ? epsilon / ls : inf, eta_cap);
    d.mu = 0.0;
    return d;
  }
  d.eta = capped(ls > 0.0 ? epsilon / (2.0 * ls) : inf, eta_cap);
  d.mu = capped(lv > 0.0 ? epsilon / (2.0 * lv) : inf, mu_cap);
  return d;
}

namespace {

double spectral_radius(const Eigen::Matrix2d& m) {
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

StabilityReport lmi_stability_check(double gamma, const LipschitzBounds& b) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  b.validate();
  StabilityReport r;
  Eigen::Matrix2d m;
  m << b.f_state, b.admissible, b.f_state, b.admissible;
  const Eigen::Matrix2d gm = gamma * m;
  r.spectral_radius = spectral_radius(gm);

  // Stein equation AᵀPA - P = -I with A = γM, vectorized (column-major):
  // (I - Aᵀ⊗Aᵀ) vec(P) = vec(I).
  Eigen::Matrix4d kron;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) kron.block<2, 2>(2 * i, 2 * j) = gm(j, i) * gm.transpose();
  const Eigen::Matrix4d lhs = Eigen::Matrix4d::Identity() - kron;
  const Eigen::Vector4d rhs(1.0, 0.0, 0.0, 1.0);
  Eigen::FullPivLU<Eigen::Matrix4d> lu(lhs);
  if (lu.isInvertible()) {
    const Eigen::Vector4d sol = lu.solve(rhs);
    Eigen::Matrix2d p;
    p << sol(0), sol(2), sol(1), sol(3);
    p = 0.5 * (p + p.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> pe(p);
    const Eigen::Matrix2d residual = gm.transpose() * p * gm - p;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> re(0.5 * (residual + residual.transpose()));
    r.lyapunov_residual_max_eig = re.eigenvalues().maxCoeff();
    if (pe.eigenvalues().minCoeff() > 0.0 && r.lyapunov_residual_max_eig < 0.0) {
      r.feasible = true;
      r.p_matrix = std::array<double, 4>{p(0, 0), p(0, 1), p(1, 0), p(1, 1)};
    }
  }

  Eigen::Matrix2d rec;
  rec << b.f_state, b.admissible * b.f_state, b.f_action, b.admissible * b.f_action;
  const Eigen::Matrix2d grec = gamma * rec;
  r.recursion_spectral_radius = spectral_radius(grec);
  r.recursion_contractive = r.recursion_spectral_radius < 1.0;
  r.matrices_disagree = r.recursion_contractive != r.feasible;
  r.claimed_limit = {b.g_state, b.g_action};
  if (r.recursion_contractive) {
    const Eigen::Vector2d fixed =
        (Eigen::Matrix2d::Identity() - grec).fullPivLu().solve(Eigen::Vector2d(b.g_state, b.g_action));
    r.recursion_fixed_point = std::array<double, 2>{fixed(0), fixed(1)};
  }
  return r;
}

double q_distance(const QTablePair& pair) {
  double d = 0.0;
  for (std::size_t p = 0; p < pair.q_min.size(); ++p) {
    if (pair.q_min[p] == kDisabledValue || pair.q_max[p] == kDisabledValue) continue;
    d = std::max(d, pair.q_max[p] - pair.q_min[p]);
  }
  return d;
}

double nonsimilarity_ratio(const PolicyTable& p_min, const PolicyTable& p_max) {
  if (p_min.action_of.size() != p_max.action_of.size() || p_min.action_of.empty()) {
    throw std::invalid_argument("nonsimilarity_ratio: policies are over different grids");
  }
  std::size_t differ = 0;
  for (std::size_t s = 0; s < p_min.action_of.size(); ++s) {
    if (p_min.action_of[s] != p_max.action_of[s]) ++differ;
  }
  return static_cast<double>(differ) / static_cast<double>(p_min.action_of.size());
}

}  // namespace symq
