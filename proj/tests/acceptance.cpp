// Acceptance run: one PASS/FAIL line per criterion, then a non-zero exit
// status if any criterion failed.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "symq/abstraction.hpp"
#include "symq/analysis.hpp"
#include "symq/experiments.hpp"
#include "symq/mdp.hpp"
#include "symq/rng.hpp"
#include "toy.hpp"

using namespace symq;

namespace {

// Pinned tolerances and budgets.
constexpr double kViTolerance = 1e-8;
constexpr double kSandwichTol = 3.0 * kViTolerance;
constexpr double kBoundSlack = 1e-9;
constexpr double kRatioSlack = 1e-9;
constexpr double kRoundingUlps = 8.0;  // per |Q|, see criterion 3
constexpr double kRhoSlack = 0.05;
constexpr double kLyapunovMargin = -1e-6;
constexpr std::size_t kBoundSweeps = 200;
constexpr std::size_t kSimulationSamples = 100000;
constexpr double kLimitSandwich = 10, kLimitBound = 60, kLimitContraction = 10, kLimitSimulation = 30;
constexpr double kLimitExp1 = 600, kLimitExp2 = 900, kLimitExp3 = 900, kLimitVdp = 600, kLimitLmi = 5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, double limit, const std::function<Outcome()>& run) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s [%.1fs of %.0fs]\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs, limit);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool same_output(const ExperimentOutput& a, const ExperimentOutput& b) {
  if (a.files.size() != b.files.size() || a.metadata.str() != b.metadata.str()) return false;
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    if (a.files[i].name != b.files[i].name || a.files[i].content != b.files[i].content) return false;
  }
  return true;
}

// Outputs kept for the determinism check.
std::vector<std::pair<std::string, ExperimentOutput>> first_runs;

Outcome sandwich() {
  const SymbolicModel coarse = testing::toy_symbolic(8, 2);
  const SymbolicModel fine = testing::toy_center_reward(32, 8);
  ValueIterationOptions o;
  o.gamma = 0.9;
  o.tolerance = kViTolerance;
  const QTablePair qc = value_iteration_pair(coarse, {}, o);
  const QTablePair qf = value_iteration_pair(fine, {}, o);
  std::size_t pairs = 0, held = 0;
  for (CellId sf = 0; sf < fine.n_states(); ++sf) {
    const CellId sc = quantize(coarse.state_grid, cell_center(fine.state_grid, sf));
    for (CellId af = 0; af < fine.n_actions(); ++af) {
      const CellId ac = quantize(coarse.action_grid, cell_center(fine.action_grid, af));
      const std::size_t pc = qc.pair_index(sc, ac), pf = qf.pair_index(sf, af);
      for (double ref : {qf.q_min[pf], qf.q_max[pf]}) {
        ++pairs;
        held += qc.q_min[pc] - kSandwichTol <= ref && ref <= qc.q_max[pc] + kSandwichTol;
      }
    }
  }
  return {held == pairs, std::to_string(held) + "/" + std::to_string(pairs) + " reference entries inside [q_min, q_max]"};
}

Outcome bound_check() {
  std::string detail;
  bool ok = true;
  for (std::size_t n : {20, 40}) {
    ExperimentSpec spec = experiment_defaults("exp2");
    spec.n_state_cells = n;
    spec.bound_horizon = kBoundSweeps;
    const Setup setup = prepare(spec);
    const double eta = setup.state_grid.max_spacing(), mu = setup.action_grid.max_spacing();
    ValueIterationOptions o;
    o.gamma = spec.learn.gamma;
    o.tolerance = std::numeric_limits<double>::min();
    o.max_sweeps = kBoundSweeps;
    std::size_t sweeps = 0, violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    o.observer = [&](std::size_t k, const QTablePair& q) {
      ++sweeps;
      const double gap = q_distance(q), bound = precision_bound(setup.sequence, k, eta, mu);
      worst = std::max(worst, gap - bound);
      violations += gap > bound + kBoundSlack;
    };
    try {
      value_iteration_pair(setup.abstraction.model, setup.terminal, o);
    } catch (const ConvergenceError&) {
      // ran the full sweep budget
    }
    ok = ok && violations == 0 && sweeps > 0;
    detail += "n=" + std::to_string(n) + ": " + std::to_string(violations) + " violations over " +
              std::to_string(sweeps) + " sweeps, max(gap-bound)=" + fmt("%.3g", worst) + "; ";
  }
  return {ok, detail};
}

Outcome contraction() {
  double worst_raw = 0.0;
  std::size_t checked = 0, violations = 0;
  Rng rng(31);
  for (std::uint64_t m = 0; m < 20; ++m) {
    const SymbolicModel sym = testing::random_symbolic(100 + m, 5 + rng.index(20), 1 + rng.index(4));
    ValueIterationOptions o;
    o.gamma = rng.uniform(0.1, 0.95);
    o.tolerance = kViTolerance;
    std::vector<double> res;
    const QTablePair q = value_iteration_pair(sym, {}, o, &res);
    double qmax = 0.0;
    for (std::size_t i = 0; i < q.q_min.size(); ++i) qmax = std::max({qmax, std::abs(q.q_min[i]), std::abs(q.q_max[i])});
    // The residual is a difference of rounded table entries, so it carries an
    // absolute error of a few ulps of |Q|.
    const double rounding = kRoundingUlps * std::numeric_limits<double>::epsilon() * qmax;
    for (std::size_t k = 1; k < res.size(); ++k) {
      ++checked;
      worst_raw = std::max(worst_raw, res[k] / res[k - 1] - o.gamma);
      violations += res[k] > (o.gamma + kRatioSlack) * res[k - 1] + rounding;
    }
  }
  return {violations == 0, std::to_string(violations) + " of " + std::to_string(checked) +
                               " ratios above gamma+1e-9 after rounding allowance; largest raw excess " +
                               fmt("%.2g", worst_raw)};
}

Outcome simulation() {
  const SystemModel mc = mountain_car();
  const GridPartition sg = build_grid_with_counts(mc.state_space, {40, 40});
  const GridPartition ag = make_action_grid(mc, ActionEncoding::levels, {3});
  const SymbolicModel sym = build_symbolic_model(mc, sg, ag).model;
  const SimulationCheck s = check_alternating_simulation(mc, sym, kSimulationSamples, 7);
  const SimulationCheck u = check_alternating_simulation(mc, sg, ag, uniform_mdp(mc, sg, ag), kSimulationSamples, 7);
  return {s.violations == 0 && u.violations > 0,
          "symbolic " + std::to_string(s.violations) + "/" + std::to_string(s.total) + ", uniform " +
              std::to_string(u.violations) + "/" + std::to_string(u.total)};
}

Outcome experiment_1() {
  int both = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentSpec spec = experiment_defaults("exp1");
    spec.learn.seed = seed;
    const Experiment1Result r = run_experiment_1(spec);
    both += r.lower.reached && r.upper.reached;
    auto steps = [](const ClosedLoopResult& c) {
      return c.reached ? std::to_string(*c.steps_to_goal) : std::string("no");
    };
    detail += "seed " + std::to_string(seed) + " q_min:" + steps(r.lower) + " q_max:" + steps(r.upper) + "; ";
    if (seed == 1) first_runs.emplace_back("exp1", r.output);
  }
  return {both >= 4, std::to_string(both) + "/5 seeds reach with both controllers (" + detail + ")"};
}

Outcome experiment_2() {
  const Experiment2Result r = run_experiment_2(experiment_defaults("exp2"));
  first_runs.emplace_back("exp2", r.output);
  const Experiment2Cell* coarse = nullptr;
  const Experiment2Cell* finest = nullptr;
  bool bounded = true;
  std::string detail;
  for (const auto& c : r.cells) {
    if (c.n_action_cells == 3 && c.n_state_cells == 40) coarse = &c;
    if (c.n_action_cells == 12 && c.n_state_cells == 160) finest = &c;
    bounded = bounded && c.q_distance <= c.bound;
    detail += "(" + std::to_string(c.n_action_cells) + "," + std::to_string(c.n_state_cells) + ")=" +
              fmt("%.4g", c.q_distance) + " ";
  }
  if (!coarse || !finest) return {false, "grid lacks (3,40) or (12,160)"};
  const bool trend = finest->q_distance < coarse->q_distance;
  return {trend && bounded, std::string(trend ? "" : "trend broken; ") + (bounded ? "" : "bound broken; ") + detail};
}

Outcome experiment_3() {
  ExperimentSpec spec = experiment_defaults("exp3");
  spec.rho_state_cells = {40, 80, 160};
  const Experiment3Result r = run_experiment_3(spec);
  first_runs.emplace_back("exp3", r.output);
  bool in_range = true;
  std::string detail;
  for (const auto& p : r.points) {
    in_range = in_range && p.rho >= 0.0 && p.rho <= 1.0;
    detail += "rho(" + std::to_string(p.n_state_cells) + ")=" + fmt("%.4f", p.rho) + " ";
  }
  const bool trend = r.points.back().rho <= r.points.front().rho + kRhoSlack;
  return {trend && in_range, detail};
}

Outcome van_der_pol_run() {
  int symbolic = 0, uniform = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ExperimentSpec spec = experiment_defaults("vdp", "van_der_pol");
    spec.learn.seed = seed;
    const VdpResult r = run_vdp_comparison(spec);
    symbolic += r.symbolic.reached;
    uniform += r.uniform.reached;
    detail += "seed " + std::to_string(seed) + " symbolic:" +
              (r.symbolic.reached ? std::to_string(*r.symbolic.steps_to_goal) : std::string("no")) +
              " uniform:" + (r.uniform.reached ? std::to_string(*r.uniform.steps_to_goal) : std::string("no")) + "; ";
    if (seed == 1) first_runs.emplace_back("vdp", r.output);
  }
  return {symbolic >= 2 && uniform <= 1, detail};
}

Outcome lmi() {
  Rng rng(77);
  int agree = 0;
  for (int i = 0; i < 100; ++i) {
    LipschitzBounds b;
    b.f_state = rng.uniform(0.0, 2.0);
    b.f_action = rng.uniform(0.0, 1.0);
    b.g_state = rng.uniform(0.0, 2.0);
    b.g_action = rng.uniform(0.0, 2.0);
    b.admissible = rng.uniform(0.0, 2.0);
    const double g = rng.uniform(0.01, 0.99);
    const StabilityReport r = lmi_stability_check(g, b);
    // eigenvalues of the rank-one matrix are 0 and L_fξ + L_A
    const double rho = g * (b.f_state + b.admissible);
    agree += r.feasible == (rho < 1.0);
  }
  LipschitzBounds unit;
  unit.f_state = unit.admissible = 1.0;
  const StabilityReport r = lmi_stability_check(0.4, unit);
  bool pd = false;
  if (r.p_matrix) {
    const auto& p = *r.p_matrix;
    pd = p[0] > 0.0 && p[0] * p[3] - p[1] * p[2] > 0.0;
  }
  const bool ok = agree == 100 && r.feasible && pd && r.lyapunov_residual_max_eig <= kLyapunovMargin;
  return {ok, std::to_string(agree) + "/100 verdicts match rho(gamma M)<1; gamma=0.4: P pd=" + (pd ? "yes" : "no") +
                  ", max eig residual " + fmt("%.4g", r.lyapunov_residual_max_eig)};
}

Outcome determinism() {
  if (first_runs.empty()) return {false, "no experiment output to compare"};
  std::string detail;
  bool ok = true;
  for (const auto& [name, first] : first_runs) {
    ExperimentSpec spec = experiment_defaults(name, name == "vdp" ? "van_der_pol" : "mountain_car");
    spec.learn.seed = 1;
    spec.jobs = 4;
    ExperimentOutput again;
    if (name == "exp1") {
      again = run_experiment_1(spec).output;
    } else if (name == "exp2") {
      again = run_experiment_2(spec).output;
    } else if (name == "exp3") {
      spec.rho_state_cells = {40, 80, 160};
      again = run_experiment_3(spec).output;
    } else {
      again = run_vdp_comparison(spec).output;
    }
    const bool same = same_output(first, again);
    ok = ok && same;
    detail += name + (same ? " identical; " : " DIFFERS; ");
  }
  return {ok, detail + "(jobs 1 vs 4)"};
}

}  // namespace

int main() {
  report(1, "sandwich at the fixed point", kLimitSandwich, sandwich);
  report(2, "precision bound at every sweep", kLimitBound, bound_check);
  report(3, "gamma-contraction of value iteration", kLimitContraction, contraction);
  report(4, "alternating simulation", kLimitSimulation, simulation);
  report(5, "experiment 1 goal reaching", kLimitExp1, experiment_1);
  report(6, "experiment 2 trend and bound", kLimitExp2, experiment_2);
  report(7, "experiment 3 trend", kLimitExp3, experiment_3);
  report(8, "van der pol comparison", kLimitVdp, van_der_pol_run);
  report(9, "stability check", kLimitLmi, lmi);
  // piggybacks on 5-8; its runtime repeats one run of each
  report(10, "determinism across job counts", 3600, determinism);
  return failures == 0 ? 0 : 1;
}
