#include "symq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "symq/mdp.hpp"
#include "symq/parallel.hpp"

namespace symq {

const char* reward_mode_name(RewardBoundMode m) {
  switch (m) {
    case RewardBoundMode::lipschitz: return "lipschitz";
    case RewardBoundMode::corner_sampling: return "corner_sampling";
    case RewardBoundMode::exact_callback: return "exact_callback";
  }
  return "?";
}

const char* selection_name(SuccessorSelection s) {
  switch (s) {
    case SuccessorSelection::uniform_random: return "uniform_random";
    case SuccessorSelection::min_value: return "min_value";
    case SuccessorSelection::max_value: return "max_value";
  }
  return "?";
}

namespace {

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

void describe_run(const ClosedLoopResult& r, Metadata& meta, const std::string& prefix) {
  meta.set(prefix + "reached", bool_text(r.reached));
  meta.set(prefix + "steps_to_goal", r.steps_to_goal ? std::to_string(*r.steps_to_goal) : std::string("none"));
  meta.set(prefix + "final_state", format_vec(r.trajectory.final_state));
}

void describe_report(const TrainingReport& r, Metadata& meta, const std::string& prefix) {
  meta.set(prefix + "episodes", r.episodes);
  meta.set(prefix + "updates", r.updates);
  meta.set(prefix + "goal_episodes", r.goal_episodes);
  meta.set(prefix + "sink_events", r.sink_events);
  meta.set(prefix + "ordering_violations", r.ordering_violations);
}

// Simulation that turns an undefined controller into a failed run.
ClosedLoopResult run_closed_loop(const SystemModel& model, const RefinedController& ctrl, const Vec& x0,
                                 std::size_t horizon, const GoalPredicate& goal) {
  try {
    return simulate_closed_loop(model, ctrl, x0, horizon, goal);
  } catch (const ControllerUndefined& e) {
    ClosedLoopResult r;
    r.trajectory = e.partial();
    return r;
  }
}

std::string cell_tag(std::size_t n_action, std::size_t n_state) {
  return "nv" + std::to_string(n_action) + "_nxi" + std::to_string(n_state);
}

void check_system(const ExperimentSpec& spec, const char* wanted, const char* experiment) {
  if (spec.system != wanted) {
    throw std::invalid_argument(std::string("system must be ") + wanted + " for " + experiment);
  }
}

std::string trajectory_plot(const std::string& title, const std::vector<std::string>& files,
                            const std::vector<std::string>& labels) {
  std::string s = "set datafile separator ','\nset key autotitle columnhead\nset title '" + title +
                  "'\nset xlabel 'x1'\nset ylabel 'x2'\nplot ";
  for (std::size_t i = 0; i < files.size(); ++i) {
    s += (i ? ", " : "") + std::string("'") + files[i] + "' using 2:3 with lines title '" + labels[i] + "'";
  }
  return s + "\npause -1\n";
}

}  // namespace

void ExperimentSpec::validate() const {
  const auto fail = [](const std::string& key, const std::string& rule) {
    throw std::invalid_argument(key + " " + rule);
  };
  if (system != "mountain_car" && system != "van_der_pol") fail("system", "must be mountain_car or van_der_pol");
  if (eta.empty() && n_state_cells < 1) fail("n_state_cells", "must be >= 1");
  for (double e : eta) {
    if (!(e > 0.0) || !std::isfinite(e)) fail("eta", "must be positive");
  }
  if (n_action_cells < 1) fail("n_action_cells", "must be >= 1");
  if (action_encoding == ActionEncoding::levels && n_action_cells < 2) {
    fail("n_action_cells", "must be >= 2 with the levels encoding");
  }
  learn.validate();
  if (!(goal_radius >= 0.0)) fail("goal_radius", "must be non-negative");
  if (bound_horizon < 1) fail("bound_horizon", "must be >= 1");
  if (admissible && !(*admissible >= 0.0)) fail("admissible_constant", "must be non-negative");
  if (grid_state_cells.empty()) fail("grid_state_cells", "must not be empty");
  if (grid_action_cells.empty()) fail("grid_action_cells", "must not be empty");
  if (rho_state_cells.empty()) fail("rho_state_cells", "must not be empty");
  for (auto n : grid_state_cells) {
    if (n < 1) fail("grid_state_cells", "entries must be >= 1");
  }
  for (auto n : grid_action_cells) {
    if (n < 2) fail("grid_action_cells", "entries must be >= 2");
  }
  for (auto n : rho_state_cells) {
    if (n < 1) fail("rho_state_cells", "entries must be >= 1");
  }
}

ExperimentSpec experiment_defaults(const std::string& experiment, const std::string& system) {
  ExperimentSpec s;
  s.system = system;
  s.learn.seed = 1;
  if (experiment == "exp1") {
    s.system = "mountain_car";
    s.n_state_cells = 160;
    s.n_action_cells = 3;
    s.learn.alpha = 0.4;
    s.learn.gamma = 0.99;
    s.learn.epsilon_explore = 0.4;
    s.learn.episodes = 20000;
    s.learn.max_steps_per_episode = 1000;
    s.learn.greedy_table = GreedyTable::q_min;
    s.train_from_initial_state = true;
    s.horizon = 1000;
  } else if (experiment == "exp2" || experiment == "exp3") {
    s.system = "mountain_car";
    s.n_action_cells = 3;
    s.learn.alpha = 0.4;
    s.learn.gamma = 0.5;
    s.learn.epsilon_explore = 0.4;
    s.learn.episodes = 20000;
    s.learn.max_steps_per_episode = 200;
  } else if (experiment == "vdp") {
    s.system = "van_der_pol";
    s.eta = {0.05, 0.05};
    s.n_action_cells = 3;
    s.learn.alpha = 0.5;
    s.learn.gamma = 0.9;
    s.learn.epsilon_explore = 0.3;
    s.learn.episodes = 50000;
    s.learn.max_steps_per_episode = 500;
    s.learn.greedy_table = GreedyTable::q_min;
    s.horizon = 5000;
  } else if (!experiment.empty()) {
    throw std::invalid_argument("unknown experiment '" + experiment + "'");
  } else {
    s.n_state_cells = 40;
  }
  s.initial_state = s.system == "van_der_pol" ? Vec{1.5, 0.0} : Vec{-0.5, 0.0};
  return s;
}

GridPartition state_grid_for(const SystemModel& model, const ExperimentSpec& spec) {
  if (!spec.eta.empty()) {
    if (spec.eta.size() != model.state_space.dim()) {
      throw std::invalid_argument("eta must have one entry per state axis");
    }
    return build_grid(model.state_space, spec.eta);
  }
  return build_grid_with_counts(model.state_space,
                                std::vector<std::size_t>(model.state_space.dim(), spec.n_state_cells));
}

Setup prepare(const ExperimentSpec& spec) {
  spec.validate();
  Setup s;
  s.model = builtin_model(spec.system);
  s.state_grid = state_grid_for(s.model, spec);
  s.action_grid = make_action_grid(s.model, spec.action_encoding,
                                   std::vector<std::size_t>(s.model.action_space.dim(), spec.n_action_cells));
  AbstractionOptions opt;
  opt.reward_mode = spec.reward_mode.value_or(s.model.reward_extrema ? RewardBoundMode::exact_callback
                                                                     : RewardBoundMode::lipschitz);
  opt.enabling = spec.enabling;
  opt.jobs = spec.jobs;
  s.abstraction = build_symbolic_model(s.model, s.state_grid, s.action_grid, opt);
  s.terminal = goal_cells(s.model, s.state_grid);
  s.bounds = grid_scale_bounds(s.model, s.state_grid, spec.admissible);
  s.sequence = lipschitz_recursion(s.bounds, spec.learn.gamma, spec.bound_horizon);
  s.implied_epsilon = s.sequence.max_state() * s.state_grid.max_spacing() +
                      s.sequence.max_action() * s.action_grid.max_spacing();
  s.content_hash = content_hash(abstraction_csv(s.abstraction.model));
  return s;
}

void describe_spec(const ExperimentSpec& spec, Metadata& m) {
  m.set("system", spec.system);
  if (spec.eta.empty()) m.set("n_state_cells", static_cast<std::uint64_t>(spec.n_state_cells));
  else m.set("eta", format_vec(spec.eta));
  m.set("n_action_cells", static_cast<std::uint64_t>(spec.n_action_cells));
  m.set("action_encoding", std::string(spec.action_encoding == ActionEncoding::levels ? "levels" : "cells"));
  m.set("reward_mode", spec.reward_mode ? std::string(reward_mode_name(*spec.reward_mode)) : std::string("auto"));
  m.set("enabling", std::string(spec.enabling == EnablingMode::clip ? "clip" : "strict"));
  m.set("gamma", spec.learn.gamma);
  m.set("alpha", spec.learn.alpha);
  m.set("alpha_schedule",
        std::string(spec.learn.alpha_schedule == AlphaSchedule::constant ? "constant" : "visit_harmonic"));
  m.set("epsilon_explore", spec.learn.epsilon_explore);
  m.set("episodes", static_cast<std::uint64_t>(spec.learn.episodes));
  m.set("max_steps", static_cast<std::uint64_t>(spec.learn.max_steps_per_episode));
  m.set("seed", spec.learn.seed);
  m.set("successor_selection", std::string(selection_name(spec.learn.successor_selection)));
  m.set("greedy_table", std::string(spec.learn.greedy_table == GreedyTable::q_max ? "q_max" : "q_min"));
  m.set("q_init", spec.learn.q_init);
  m.set("train_from_initial_state", bool_text(spec.train_from_initial_state));
  m.set("initial_state", format_vec(spec.initial_state));
  m.set("horizon", static_cast<std::uint64_t>(spec.horizon));
  m.set("goal_radius", spec.goal_radius);
  m.set("admissible_constant", spec.admissible ? format_double(*spec.admissible) : std::string("auto"));
  m.set("bound_horizon", static_cast<std::uint64_t>(spec.bound_horizon));
}

void describe_setup(const Setup& s, Metadata& m, const std::string& p) {
  m.set(p + "state_cells_per_axis", join_counts(s.state_grid.cells_per_axis));
  m.set(p + "state_spacing", format_vec(s.state_grid.spacing));
  m.set(p + "action_cells_per_axis", join_counts(s.action_grid.cells_per_axis));
  m.set(p + "action_spacing", format_vec(s.action_grid.spacing));
  m.set(p + "L_f_state", s.model.lipschitz.f_state);
  m.set(p + "L_f_action", s.model.lipschitz.f_action);
  m.set(p + "L_g_state_model", s.model.lipschitz.g_state);
  m.set(p + "L_g_state", s.bounds.g_state);
  m.set(p + "L_g_action", s.bounds.g_action);
  m.set(p + "L_admissible", s.bounds.admissible);
  m.set(p + "reward_jump", s.model.reward_jump);
  m.set(p + "inflation", s.abstraction.model.inflation);
  m.set(p + "axis_inflation", format_vec(s.abstraction.model.axis_inflation));
  m.set(p + "sinks", static_cast<std::uint64_t>(s.abstraction.sinks.size()));
  m.set(p + "implied_epsilon", s.implied_epsilon);
  m.set(p + "content_hash", s.content_hash);
}

LearnConfig learn_config_for(const ExperimentSpec& spec, const Setup& setup) {
  LearnConfig c = spec.learn;
  if (spec.train_from_initial_state) c.start_state = quantize(setup.state_grid, spec.initial_state);
  return c;
}

GoalPredicate goal_predicate_for(const ExperimentSpec& spec, const SystemModel& model) {
  if (model.name == "mountain_car") return mountain_car_goal(model);
  return origin_ball_goal(spec.goal_radius);
}

Experiment1Result run_experiment_1(const ExperimentSpec& spec) {
  check_system(spec, "mountain_car", "exp1");
  const Setup setup = prepare(spec);
  Experiment1Result r;
  const QTablePair q =
      symbolic_double_q_learning(setup.abstraction.model, setup.terminal, learn_config_for(spec, setup), &r.report);
  r.q_distance = q_distance(q);
  const auto goal = goal_predicate_for(spec, setup.model);
  const PolicyTable p_min = extract_policy(q, PolicySource::from_q_min);
  const PolicyTable p_max = extract_policy(q, PolicySource::from_q_max);
  r.lower = run_closed_loop(setup.model, refine_policy(setup.model, setup.state_grid, setup.action_grid, p_min),
                            spec.initial_state, spec.horizon, goal);
  r.upper = run_closed_loop(setup.model, refine_policy(setup.model, setup.state_grid, setup.action_grid, p_max),
                            spec.initial_state, spec.horizon, goal);

  auto& out = r.output;
  out.experiment = "exp1";
  const auto& sg = setup.state_grid;
  const auto& ag = setup.action_grid;
  const Box& as = setup.model.action_space;
  out.files.push_back({"policy_q_min.csv", policy_csv(p_min, sg, ag, as)});
  out.files.push_back({"policy_q_max.csv", policy_csv(p_max, sg, ag, as)});
  out.files.push_back({"trajectory_q_min.csv", trajectory_csv(r.lower.trajectory, 2, 1)});
  out.files.push_back({"trajectory_q_max.csv", trajectory_csv(r.upper.trajectory, 2, 1)});
  out.files.push_back({"trajectories.gp", trajectory_plot("mountain car", {"trajectory_q_min.csv", "trajectory_q_max.csv"},
                                                          {"q_min controller", "q_max controller"})});
  out.files.push_back({"policies.gp",
                       "set datafile separator ','\nset xlabel 'position'\nset ylabel 'velocity'\n"
                       "set multiplot layout 1,2\nset title 'policy from q_min'\n"
                       "plot 'policy_q_min.csv' every ::1 using 2:3:5 with points pt 5 ps 0.3 palette notitle\n"
                       "set title 'policy from q_max'\n"
                       "plot 'policy_q_max.csv' every ::1 using 2:3:5 with points pt 5 ps 0.3 palette notitle\n"
                       "unset multiplot\npause -1\n"});
  describe_spec(spec, out.metadata);
  describe_setup(setup, out.metadata);
  describe_report(r.report, out.metadata, "training_");
  out.metadata.set("q_distance", r.q_distance);
  describe_run(r.lower, out.metadata, "q_min_controller_");
  describe_run(r.upper, out.metadata, "q_max_controller_");
  return r;
}

std::optional<double> published_precision(std::size_t n_v, std::size_t n_xi) {
  static const std::map<std::pair<std::size_t, std::size_t>, double> table{
      {{3, 40}, 2.0},   {{3, 80}, 1.11},    {{3, 160}, 1.27},   {{6, 40}, 1.99},   {{6, 80}, 1.8295},
      {{6, 160}, 1.1424}, {{12, 40}, 1.98}, {{12, 80}, 1.18}, {{12, 160}, 0.8558}};
  const auto it = table.find({n_v, n_xi});
  if (it == table.end()) return std::nullopt;
  return it->second;
}

Experiment2Result run_experiment_2(const ExperimentSpec& spec) {
  check_system(spec, "mountain_car", "exp2");
  spec.validate();
  Experiment2Result r;
  const std::size_t nx = spec.grid_state_cells.size();
  const std::size_t n = spec.grid_action_cells.size() * nx;
  r.cells.resize(n);
  std::vector<std::string> hashes(n);
  std::vector<double> implied(n);
  parallel_for(n, spec.jobs, [&](std::size_t i) {
    ExperimentSpec cell = spec;
    cell.eta.clear();
    cell.n_action_cells = spec.grid_action_cells[i / nx];
    cell.n_state_cells = spec.grid_state_cells[i % nx];
    cell.jobs = 1;
    const Setup setup = prepare(cell);
    const QTablePair q =
        symbolic_double_q_learning(setup.abstraction.model, setup.terminal, learn_config_for(cell, setup));
    Experiment2Cell& c = r.cells[i];
    c.n_state_cells = cell.n_state_cells;
    c.n_action_cells = cell.n_action_cells;
    c.eta = setup.state_grid.max_spacing();
    c.mu = setup.action_grid.max_spacing();
    c.q_distance = q_distance(q);
    for (std::size_t k = 1; k <= setup.sequence.size(); ++k) {
      c.bound = std::max(c.bound, precision_bound(setup.sequence, k, c.eta, c.mu));
    }
    c.reference = published_precision(c.n_action_cells, c.n_state_cells);
    hashes[i] = setup.content_hash;
    implied[i] = setup.implied_epsilon;
  });

  auto& out = r.output;
  out.experiment = "exp2";
  std::string rows = "n_v,n_xi,eta,mu,q_distance,bound,published\n";
  for (const auto& c : r.cells) {
    rows += std::to_string(c.n_action_cells) + ',' + std::to_string(c.n_state_cells) + ',' + format_double(c.eta) +
            ',' + format_double(c.mu) + ',' + format_double(c.q_distance) + ',' + format_double(c.bound) + ',' +
            (c.reference ? format_double(*c.reference) : std::string()) + '\n';
  }
  std::string table = "n_v";
  for (auto x : spec.grid_state_cells) table += "," + std::to_string(x);
  table += '\n';
  for (std::size_t a = 0; a < spec.grid_action_cells.size(); ++a) {
    table += std::to_string(spec.grid_action_cells[a]);
    for (std::size_t x = 0; x < nx; ++x) table += ',' + format_double(r.cells[a * nx + x].q_distance);
    table += '\n';
  }
  out.files.push_back({"precision.csv", rows});
  out.files.push_back({"precision_table.csv", table});
  out.files.push_back({"precision.gp",
                       "set datafile separator ','\nset key autotitle columnhead\nset logscale y\n"
                       "set xlabel 'cells per axis'\nset ylabel 'max |q_max - q_min|'\n"
                       "plot for [nv in '" + join_counts(spec.grid_action_cells) +
                           "'] 'precision.csv' using ($1 == nv ? $2 : 1/0):5 with linespoints title 'n_v = '.nv\n"
                           "pause -1\n"});
  describe_spec(spec, out.metadata);
  out.metadata.set("grid_state_cells", join_counts(spec.grid_state_cells));
  out.metadata.set("grid_action_cells", join_counts(spec.grid_action_cells));
  for (std::size_t i = 0; i < n; ++i) {
    const std::string tag = cell_tag(r.cells[i].n_action_cells, r.cells[i].n_state_cells);
    out.metadata.set(tag + "_content_hash", hashes[i]);
    out.metadata.set(tag + "_implied_epsilon", implied[i]);
  }
  const SystemModel model = builtin_model(spec.system);
  out.metadata.set("L_f_state", model.lipschitz.f_state);
  out.metadata.set("L_f_action", model.lipschitz.f_action);
  out.metadata.set("reward_jump", model.reward_jump);
  return r;
}

Experiment3Result run_experiment_3(const ExperimentSpec& spec) {
  check_system(spec, "mountain_car", "exp3");
  spec.validate();
  Experiment3Result r;
  const std::size_t n = spec.rho_state_cells.size();
  r.points.resize(n);
  std::vector<std::string> hashes(n);
  std::vector<double> implied(n);
  parallel_for(n, spec.jobs, [&](std::size_t i) {
    ExperimentSpec cell = spec;
    cell.eta.clear();
    cell.n_state_cells = spec.rho_state_cells[i];
    cell.jobs = 1;
    const Setup setup = prepare(cell);
    const QTablePair q =
        symbolic_double_q_learning(setup.abstraction.model, setup.terminal, learn_config_for(cell, setup));
    r.points[i].n_state_cells = cell.n_state_cells;
    r.points[i].rho = nonsimilarity_ratio(extract_policy(q, PolicySource::from_q_min),
                                          extract_policy(q, PolicySource::from_q_max));
    hashes[i] = setup.content_hash;
    implied[i] = setup.implied_epsilon;
  });
  auto& out = r.output;
  out.experiment = "exp3";
  std::string csv = "n_xi,rho\n";
  for (const auto& p : r.points) csv += std::to_string(p.n_state_cells) + ',' + format_double(p.rho) + '\n';
  out.files.push_back({"rho.csv", csv});
  out.files.push_back({"rho.gp",
                       "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'cells per axis'\n"
                       "set ylabel 'non-similarity ratio'\nset yrange [0:1]\n"
                       "plot 'rho.csv' using 1:2 with linespoints\npause -1\n"});
  describe_spec(spec, out.metadata);
  out.metadata.set("rho_state_cells", join_counts(spec.rho_state_cells));
  for (std::size_t i = 0; i < n; ++i) {
    const std::string tag = "nxi" + std::to_string(r.points[i].n_state_cells);
    out.metadata.set(tag + "_content_hash", hashes[i]);
    out.metadata.set(tag + "_implied_epsilon", implied[i]);
  }
  return r;
}

VdpResult run_vdp_comparison(const ExperimentSpec& spec) {
  check_system(spec, "van_der_pol", "vdp");
  const Setup setup = prepare(spec);
  VdpResult r;
  const LearnConfig cfg = learn_config_for(spec, setup);
  TrainingReport sym_report, uni_report;
  const QTablePair q = symbolic_double_q_learning(setup.abstraction.model, setup.terminal, cfg, &sym_report);
  const QTable u = uniform_q_learning(setup.model, setup.state_grid, setup.action_grid, setup.terminal, cfg, &uni_report);
  const auto goal = goal_predicate_for(spec, setup.model);
  const PolicyTable p_sym = extract_policy(q, PolicySource::from_q_min);
  const PolicyTable p_upper = extract_policy(q, PolicySource::from_q_max);
  const PolicyTable p_uni = extract_policy(u);
  const auto simulate = [&](const PolicyTable& p) {
    return run_closed_loop(setup.model, refine_policy(setup.model, setup.state_grid, setup.action_grid, p),
                           spec.initial_state, spec.horizon, goal);
  };
  r.symbolic = simulate(p_sym);
  r.symbolic_upper = simulate(p_upper);
  r.uniform = simulate(p_uni);

  auto& out = r.output;
  out.experiment = "vdp";
  const auto& sg = setup.state_grid;
  const auto& ag = setup.action_grid;
  const Box& as = setup.model.action_space;
  out.files.push_back({"trajectory_symbolic.csv", trajectory_csv(r.symbolic.trajectory, 2, 1)});
  out.files.push_back({"trajectory_symbolic_q_max.csv", trajectory_csv(r.symbolic_upper.trajectory, 2, 1)});
  out.files.push_back({"trajectory_uniform.csv", trajectory_csv(r.uniform.trajectory, 2, 1)});
  out.files.push_back({"policy_symbolic.csv", policy_csv(p_sym, sg, ag, as)});
  out.files.push_back({"policy_symbolic_q_max.csv", policy_csv(p_upper, sg, ag, as)});
  out.files.push_back({"policy_uniform.csv", policy_csv(p_uni, sg, ag, as)});
  std::string plot = trajectory_plot("Van der Pol", {"trajectory_uniform.csv", "trajectory_symbolic.csv"},
                                     {"uniform discretization", "symbolic abstraction"});
  plot.insert(plot.find("plot "), "set object 1 rect from -" + format_double(spec.goal_radius) + ",-" +
                                      format_double(spec.goal_radius) + " to " + format_double(spec.goal_radius) +
                                      "," + format_double(spec.goal_radius) + " fs empty border rgb 'red'\n");
  out.files.push_back({"trajectories.gp", plot});
  describe_spec(spec, out.metadata);
  describe_setup(setup, out.metadata);
  out.metadata.set("symbolic_policy_source", std::string("q_min"));
  describe_report(sym_report, out.metadata, "symbolic_training_");
  describe_report(uni_report, out.metadata, "uniform_training_");
  describe_run(r.symbolic, out.metadata, "symbolic_controller_");
  describe_run(r.symbolic_upper, out.metadata, "symbolic_q_max_controller_");
  describe_run(r.uniform, out.metadata, "uniform_controller_");
  return r;
}

}  // namespace symq
