#include "symq/learner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "symq/parallel.hpp"
#include "symq/rng.hpp"

namespace symq {

void LearnConfig::validate() const {
  const auto fail = [](const std::string& key, const std::string& rule) {
    throw std::invalid_argument(key + " " + rule);
  };
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma", "must lie in (0, 1)");
  if (alpha_schedule == AlphaSchedule::constant && !(alpha > 0.0 && alpha <= 1.0)) {
    fail("alpha", "must lie in (0, 1]");
  }
  if (!(epsilon_explore >= 0.0 && epsilon_explore <= 1.0)) fail("epsilon_explore", "must lie in [0, 1]");
  if (episodes < 1) fail("episodes", "must be >= 1");
  if (max_steps_per_episode < 1) fail("max_steps", "must be >= 1");
  if (!std::isfinite(q_init)) fail("q_init", "must be finite");
}

namespace {

double learning_rate(const LearnConfig& cfg, std::uint64_t visits) {
  if (cfg.alpha_schedule == AlphaSchedule::visit_harmonic) return 1.0 / (1.0 + static_cast<double>(visits));
  return cfg.alpha;
}

// Lowest-index argmax over the finite entries of row; kSink if none.
CellId row_argmax(const double* row, std::size_t n) {
  CellId best = PolicyTable::kSink;
  double best_value = kDisabledValue;
  for (std::size_t a = 0; a < n; ++a) {
    if (row[a] == kDisabledValue) continue;
    if (best == PolicyTable::kSink || row[a] > best_value) {
      best = static_cast<CellId>(a);
      best_value = row[a];
    }
  }
  return best;
}

double row_max(const double* row, std::size_t n) {
  double m = kDisabledValue;
  for (std::size_t a = 0; a < n; ++a) m = std::max(m, row[a]);
  return m;
}

// ε-greedy choice among enabled actions (enabled = finite entry).
CellId epsilon_greedy(Rng& rng, const double* row, std::size_t n, double epsilon,
                      std::vector<CellId>& scratch) {
  if (epsilon > 0.0 && rng.bernoulli(epsilon)) {
    scratch.clear();
    for (std::size_t a = 0; a < n; ++a) {
      if (row[a] != kDisabledValue) scratch.push_back(static_cast<CellId>(a));
    }
    return scratch[rng.index(scratch.size())];
  }
  return row_argmax(row, n);
}

std::vector<CellId> start_candidates(std::size_t n_states, const std::vector<std::uint8_t>& terminal,
                                     const std::function<bool(CellId)>& is_sink) {
  std::vector<CellId> out;
  for (CellId s = 0; s < n_states; ++s) {
    if (!terminal.empty() && terminal[s]) continue;
    if (is_sink(s)) continue;
    out.push_back(s);
  }
  return out;
}

double min_finite(const std::vector<double>& v) {
  double m = INFINITY;
  for (double x : v) {
    if (std::isfinite(x)) m = std::min(m, x);
  }
  return std::isfinite(m) ? m : 0.0;
}

}  // namespace

QTable classic_q_learning(const FiniteMdp& mdp, const LearnConfig& cfg, TrainingReport* report) {
  mdp.validate();
  cfg.validate();
  const std::size_t nA = mdp.n_actions;
  QTable t;
  t.n_states = mdp.n_states;
  t.n_actions = nA;
  t.q.assign(mdp.n_states * nA, cfg.q_init);
  t.visits.assign(mdp.n_states * nA, 0);
  const auto is_terminal = [&](std::size_t s) { return !mdp.terminal.empty() && mdp.terminal[s]; };
  for (std::size_t p = 0; p < t.q.size(); ++p) {
    if (mdp.next[p] == FiniteMdp::kDisabled) t.q[p] = kDisabledValue;
    else if (is_terminal(p / nA)) t.q[p] = 0.0;
  }
  const auto is_sink = [&](CellId s) {
    for (std::size_t a = 0; a < nA; ++a) {
      if (mdp.next[s * nA + a] != FiniteMdp::kDisabled) return false;
    }
    return true;
  };
  const double sink_value = min_finite(mdp.reward) / (1.0 - cfg.gamma);
  const auto starts = start_candidates(mdp.n_states, mdp.terminal, is_sink);
  if (starts.empty() && !cfg.start_state) throw std::invalid_argument("mdp: no valid start state");

  TrainingReport local;
  Rng rng(cfg.seed);
  std::vector<CellId> scratch;
  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    ++local.episodes;
    std::size_t s = cfg.start_state ? *cfg.start_state : starts[rng.index(starts.size())];
    for (std::size_t k = 0; k < cfg.max_steps_per_episode; ++k) {
      if (is_terminal(s)) {
        ++local.goal_episodes;
        break;
      }
      if (is_sink(static_cast<CellId>(s))) {
        ++local.sink_events;
        break;
      }
      const CellId a = epsilon_greedy(rng, &t.q[s * nA], nA, cfg.epsilon_explore, scratch);
      const std::size_t p = s * nA + a;
      const std::size_t next = mdp.next[p];
      double bootstrap = 0.0;
      if (!is_terminal(next)) bootstrap = is_sink(static_cast<CellId>(next)) ? sink_value : row_max(&t.q[next * nA], nA);
      const double alpha = learning_rate(cfg, t.visits[p]);
      t.q[p] += alpha * (mdp.reward[p] + cfg.gamma * bootstrap - t.q[p]);
      ++t.visits[p];
      ++t.updates_applied;
      ++local.updates;
      s = next;
    }
  }
  if (report) *report = local;
  return t;
}

QTable uniform_q_learning(const SystemModel& model, const GridPartition& state_grid,
                          const GridPartition& action_grid, const std::vector<std::uint8_t>& terminal,
                          const LearnConfig& config, TrainingReport* report) {
  return classic_q_learning(uniform_mdp(model, state_grid, action_grid, terminal), config, report);
}

namespace {

// State values max_a q(s', a) under terminal/sink conventions.
struct ValueView {
  const SymbolicModel& sym;
  const std::vector<std::uint8_t>& terminal;
  double sink_value;

  double operator()(const std::vector<double>& q, CellId s) const {
    if (!terminal.empty() && terminal[s]) return 0.0;
    const double m = row_max(&q[std::size_t{s} * sym.n_actions()], sym.n_actions());
    return m == kDisabledValue ? sink_value : m;
  }
};

QTablePair initial_pair(const SymbolicModel& sym, const std::vector<std::uint8_t>& terminal,
                        double q_init, double gamma) {
  if (!terminal.empty() && terminal.size() != sym.n_states()) {
    throw std::invalid_argument("terminal flags must cover every state");
  }
  QTablePair t;
  t.n_states = sym.n_states();
  t.n_actions = sym.n_actions();
  t.gamma = gamma;
  const std::size_t n = t.n_states * t.n_actions;
  t.q_min.assign(n, q_init);
  t.q_max.assign(n, q_init);
  t.visit_counts.assign(n, 0);
  for (CellId s = 0; s < t.n_states; ++s) {
    for (CellId a = 0; a < t.n_actions; ++a) {
      const std::size_t p = t.pair_index(s, a);
      if (!sym.enabled(s, a)) {
        t.q_min[p] = t.q_max[p] = kDisabledValue;
      } else if (!terminal.empty() && terminal[s]) {
        t.q_min[p] = t.q_max[p] = 0.0;
      }
    }
  }
  return t;
}

}  // namespace

QTablePair symbolic_double_q_learning(const SymbolicModel& sym, const std::vector<std::uint8_t>& terminal,
                                      const LearnConfig& cfg, TrainingReport* report) {
  cfg.validate();
  QTablePair t = initial_pair(sym, terminal, cfg.q_init, cfg.gamma);
  const std::size_t nA = sym.n_actions();
  const ValueView value{sym, terminal, min_finite(sym.reward_min) / (1.0 - cfg.gamma)};
  const auto is_terminal = [&](CellId s) { return !terminal.empty() && terminal[s]; };
  const auto starts = start_candidates(sym.n_states(), terminal, [&](CellId s) { return sym.is_sink(s); });
  if (starts.empty() && !cfg.start_state) throw std::invalid_argument("symbolic model: no valid start state");

  TrainingReport local;
  Rng rng(cfg.seed);
  std::vector<CellId> scratch;
  const std::vector<double>& greedy = cfg.greedy_table == GreedyTable::q_max ? t.q_max : t.q_min;
  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    ++local.episodes;
    CellId s = cfg.start_state ? *cfg.start_state : starts[rng.index(starts.size())];
    for (std::size_t k = 0; k < cfg.max_steps_per_episode; ++k) {
      if (is_terminal(s)) {
        ++local.goal_episodes;
        break;
      }
      if (sym.is_sink(s)) {
        ++local.sink_events;
        break;
      }
      const CellId a = epsilon_greedy(rng, &greedy[std::size_t{s} * nA], nA, cfg.epsilon_explore, scratch);
      const std::size_t p = t.pair_index(s, a);
      const auto succ = sym.successors(s, a);
      double worst = INFINITY;
      double best = -INFINITY;
      for (CellId next : succ) {
        worst = std::min(worst, value(t.q_min, next));
        best = std::max(best, value(t.q_max, next));
      }
      const double alpha = learning_rate(cfg, t.visit_counts[p]);
      t.q_min[p] += alpha * (sym.reward_min[p] + cfg.gamma * worst - t.q_min[p]);
      t.q_max[p] += alpha * (sym.reward_max[p] + cfg.gamma * best - t.q_max[p]);
      ++t.visit_counts[p];
      ++t.updates_applied;
      ++local.updates;
      if (t.q_min[p] > t.q_max[p] + 1e-12) ++local.ordering_violations;

      switch (cfg.successor_selection) {
        case SuccessorSelection::uniform_random:
          s = succ[rng.index(succ.size())];
          break;
        case SuccessorSelection::min_value:
          s = *std::min_element(succ.begin(), succ.end(), [&](CellId x, CellId y) {
            return value(t.q_min, x) < value(t.q_min, y);
          });
          break;
        case SuccessorSelection::max_value:
          s = *std::max_element(succ.begin(), succ.end(), [&](CellId x, CellId y) {
            return value(t.q_max, x) < value(t.q_max, y);
          });
          break;
      }
    }
  }
  if (report) *report = local;
  return t;
}

QTablePair value_iteration_pair(const SymbolicModel& sym, const std::vector<std::uint8_t>& terminal,
                                const ValueIterationOptions& opt, std::vector<double>* residuals) {
  if (!(opt.gamma > 0.0 && opt.gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(opt.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  QTablePair cur = initial_pair(sym, terminal, opt.q_init, opt.gamma);
  QTablePair next = cur;
  const std::size_t nA = sym.n_actions();
  const ValueView value{sym, terminal, min_finite(sym.reward_min) / (1.0 - opt.gamma)};
  std::vector<double> state_residual(sym.n_states());
  std::vector<double> v_min(sym.n_states()), v_max(sym.n_states());
  double residual = INFINITY;
  for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    parallel_for(sym.n_states(), opt.jobs, [&](std::size_t s) {
      v_min[s] = value(cur.q_min, static_cast<CellId>(s));
      v_max[s] = value(cur.q_max, static_cast<CellId>(s));
    });
    parallel_for(sym.n_states(), opt.jobs, [&](std::size_t s) {
      double r = 0.0;
      if (terminal.empty() || !terminal[s]) {
        for (CellId a = 0; a < nA; ++a) {
          const std::size_t p = s * nA + a;
          if (!sym.enabled(static_cast<CellId>(s), a)) continue;
          double worst = INFINITY;
          double best = -INFINITY;
          for (CellId n : sym.successors(static_cast<CellId>(s), a)) {
            worst = std::min(worst, v_min[n]);
            best = std::max(best, v_max[n]);
          }
          next.q_min[p] = sym.reward_min[p] + opt.gamma * worst;
          next.q_max[p] = sym.reward_max[p] + opt.gamma * best;
          r = std::max({r, std::abs(next.q_min[p] - cur.q_min[p]), std::abs(next.q_max[p] - cur.q_max[p])});
        }
      }
      state_residual[s] = r;
    });
    residual = *std::max_element(state_residual.begin(), state_residual.end());
    next.updates_applied = sweep;
    std::swap(cur, next);
    if (residuals) residuals->push_back(residual);
    if (opt.observer) opt.observer(sweep, cur);
    if (residual < opt.tolerance) return cur;
  }
  throw ConvergenceError("value iteration did not converge within " + std::to_string(opt.max_sweeps) +
                             " sweeps (residual " + std::to_string(residual) + ")",
                         residual);
}

PolicyTable extract_policy(const QTablePair& pair, PolicySource which) {
  PolicyTable p;
  p.source = which;
  const auto& q = which == PolicySource::from_q_max ? pair.q_max : pair.q_min;
  p.action_of.resize(pair.n_states);
  for (std::size_t s = 0; s < pair.n_states; ++s) p.action_of[s] = row_argmax(&q[s * pair.n_actions], pair.n_actions);
  return p;
}

PolicyTable extract_policy(const QTable& table) {
  PolicyTable p;
  p.action_of.resize(table.n_states);
  for (std::size_t s = 0; s < table.n_states; ++s) {
    p.action_of[s] = row_argmax(&table.q[s * table.n_actions], table.n_actions);
  }
  return p;
}

}  // namespace symq
