// Command-line front end.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>

#include "symq/config.hpp"
#include "symq/experiments.hpp"
#include "symq/io.hpp"
#include "symq/parallel.hpp"

namespace fs = std::filesystem;
using namespace symq;

namespace {

constexpr const char* kVersion = "symq 1.0.0";

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kMismatch = 3, kNoConvergence = 4 };

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned jobs = default_jobs();
  std::string out;
};

RunConfig load_config(const Options& o, const std::string& experiment) {
  std::string text;
  try {
    text = read_file(o.config_path);
  } catch (const std::invalid_argument&) {
    throw ConfigError("config: cannot read '" + o.config_path + "'");
  }
  RunConfig c = parse_run_config(text, experiment);
  if (o.seed) c.spec.learn.seed = *o.seed;
  if (o.jobs == 0) throw ConfigError("jobs must be >= 1");
  c.spec.jobs = o.jobs;
  return c;
}

fs::path output_root(const Options& o, const RunConfig& c) {
  if (!o.out.empty()) return o.out;
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("SYMQ_OUT_DIR"); env && *env) return env;
  return fs::current_path();
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

void write_run_record(const fs::path& dir, const std::string& command, const RunConfig& c, Metadata meta) {
  meta.set("command", command);
  meta.set("version", std::string(kVersion));
  write_file_atomic(dir / "config.json", config_json(c));
  write_file_atomic(dir / (command + ".meta"), meta.str());
}

GridPartition action_grid_for(const SystemModel& model, const ExperimentSpec& spec) {
  return make_action_grid(model, spec.action_encoding,
                          std::vector<std::size_t>(model.action_space.dim(), spec.n_action_cells));
}

// The abstraction named by the config, checked against the config's grids.
SymbolicModel load_matching_abstraction(const RunConfig& c) {
  SymbolicModel sym = load_abstraction(c.abstraction_file);
  const SystemModel model = builtin_model(c.spec.system);
  if (sym.system != model.name) {
    throw ArtifactMismatch("abstraction is for system '" + sym.system + "', config says '" + model.name + "'");
  }
  if (!(sym.state_grid == state_grid_for(model, c.spec)) || !(sym.action_grid == action_grid_for(model, c.spec))) {
    throw ArtifactMismatch("abstraction grids differ from the config's discretization");
  }
  return sym;
}

int cmd_abstract(const Options& o) {
  const RunConfig c = load_config(o, "");
  const Setup setup = prepare(c.spec);
  const fs::path dir = output_root(o, c);
  const std::string hash = save_abstraction(setup.abstraction.model, dir / "abstraction.csv");
  const auto& sym = setup.abstraction.model;
  std::size_t max_succ = 0;
  for (std::size_t p = 0; p + 1 < sym.offsets.size(); ++p) {
    max_succ = std::max<std::size_t>(max_succ, sym.offsets[p + 1] - sym.offsets[p]);
  }
  const double mean_succ = static_cast<double>(sym.successor_data.size()) / static_cast<double>(sym.offsets.size() - 1);
  Metadata meta;
  describe_spec(c.spec, meta);
  describe_setup(setup, meta);
  meta.set("mean_successors", mean_succ);
  meta.set("max_successors", static_cast<std::uint64_t>(max_succ));
  write_run_record(dir, "abstract", c, meta);
  std::printf("state cells: %zu\naction cells: %zu\nsink states: %zu\nsuccessors per pair: mean %.3f, max %zu\n"
              "implied epsilon: %s\ncontent hash: %s\nwritten: %s\n",
              sym.n_states(), sym.n_actions(), setup.abstraction.sinks.size(), mean_succ, max_succ,
              format_double(setup.implied_epsilon).c_str(), hash.c_str(), (dir / "abstraction.csv").c_str());
  return kOk;
}

int cmd_train(const Options& o) {
  const RunConfig c = load_config(o, "");
  const fs::path dir = output_root(o, c);
  const SystemModel model = builtin_model(c.spec.system);
  SymbolicModel sym;
  std::string hash;
  if (c.abstraction_file.empty()) {
    Setup setup = prepare(c.spec);
    sym = std::move(setup.abstraction.model);
    hash = save_abstraction(sym, dir / "abstraction.csv");
  } else {
    sym = load_matching_abstraction(c);
    hash = Metadata::parse(read_file(sidecar_path(c.abstraction_file))).get("content_hash");
  }
  const auto terminal = goal_cells(model, sym.state_grid);
  Metadata meta;
  describe_spec(c.spec, meta);
  meta.set("abstraction_hash", hash);
  QTablePair q;
  if (c.train_method == TrainMethod::value_iteration) {
    ValueIterationOptions vo;
    vo.gamma = c.spec.learn.gamma;
    vo.tolerance = c.vi_tolerance;
    vo.max_sweeps = c.vi_max_sweeps;
    vo.q_init = c.spec.learn.q_init;
    vo.jobs = c.spec.jobs;
    q = value_iteration_pair(sym, terminal, vo);
    meta.set("train_method", std::string("value_iteration"));
    meta.set("sweeps", q.updates_applied);
  } else {
    LearnConfig lc = c.spec.learn;
    if (c.spec.train_from_initial_state) lc.start_state = quantize(sym.state_grid, c.spec.initial_state);
    TrainingReport rep;
    q = symbolic_double_q_learning(sym, terminal, lc, &rep);
    meta.set("train_method", std::string("learning"));
    meta.set("updates", rep.updates);
    meta.set("goal_episodes", rep.goal_episodes);
    meta.set("sink_events", rep.sink_events);
    meta.set("ordering_violations", rep.ordering_violations);
  }
  meta.set("q_distance", q_distance(q));
  const std::string qhash = save_qtable(q, dir / "qtables.csv", meta);
  meta.set("qtable_hash", qhash);
  write_run_record(dir, "train", c, meta);
  std::printf("updates applied: %llu\nq distance: %s\nwritten: %s\n", static_cast<unsigned long long>(q.updates_applied),
              format_double(q_distance(q)).c_str(), (dir / "qtables.csv").c_str());
  return kOk;
}

int cmd_policy(const Options& o) {
  const RunConfig c = load_config(o, "");
  if (c.qtable_file.empty()) throw ConfigError("qtable_file is required for policy");
  const fs::path dir = output_root(o, c);
  const SystemModel model = builtin_model(c.spec.system);
  const GridPartition sg = state_grid_for(model, c.spec);
  const GridPartition ag = action_grid_for(model, c.spec);
  Metadata qmeta;
  const QTablePair q = load_qtable(c.qtable_file, &qmeta);
  if (q.n_states != sg.total_cells || q.n_actions != ag.total_cells) {
    throw ArtifactMismatch("Q tables do not match the config's discretization");
  }
  const PolicyTable p_min = extract_policy(q, PolicySource::from_q_min);
  const PolicyTable p_max = extract_policy(q, PolicySource::from_q_max);
  write_file_atomic(dir / "policy_q_min.csv", policy_csv(p_min, sg, ag, model.action_space));
  write_file_atomic(dir / "policy_q_max.csv", policy_csv(p_max, sg, ag, model.action_space));
  const double rho = nonsimilarity_ratio(p_min, p_max);
  Metadata meta;
  describe_spec(c.spec, meta);
  meta.set("qtable_hash", qmeta.get("content_hash"));
  meta.set("rho", rho);
  write_run_record(dir, "policy", c, meta);
  std::printf("non-similarity ratio: %s\nwritten: %s, %s\n", format_double(rho).c_str(),
              (dir / "policy_q_min.csv").c_str(), (dir / "policy_q_max.csv").c_str());
  return kOk;
}

int cmd_simulate(const Options& o) {
  const RunConfig c = load_config(o, "");
  if (c.policy_file.empty()) throw ConfigError("policy_file is required for simulate");
  const fs::path dir = output_root(o, c);
  const SystemModel model = builtin_model(c.spec.system);
  const GridPartition sg = state_grid_for(model, c.spec);
  const GridPartition ag = action_grid_for(model, c.spec);
  std::string text;
  try {
    text = read_file(c.policy_file);
  } catch (const std::invalid_argument&) {
    throw ConfigError("policy_file: cannot read '" + c.policy_file + "'");
  }
  const PolicyTable policy = parse_policy_csv(text, sg.total_cells);
  const RefinedController ctrl = refine_policy(model, sg, ag, policy);
  Metadata meta;
  describe_spec(c.spec, meta);
  meta.set("policy_hash", content_hash(text));
  ClosedLoopResult r;
  try {
    r = simulate_closed_loop(model, ctrl, c.spec.initial_state, c.spec.horizon, goal_predicate_for(c.spec, model));
  } catch (const ControllerUndefined& e) {
    r.trajectory = e.partial();
    meta.set("controller_undefined_at", static_cast<std::uint64_t>(e.cell()));
  }
  write_file_atomic(dir / "trajectory.csv", trajectory_csv(r.trajectory, model.state_space.dim(), model.action_space.dim()));
  meta.set("reached", std::string(r.reached ? "true" : "false"));
  meta.set("steps_to_goal", r.steps_to_goal ? std::to_string(*r.steps_to_goal) : std::string("none"));
  write_run_record(dir, "simulate", c, meta);
  std::printf("reached: %s\nsteps to goal: %s\nwritten: %s\n", r.reached ? "yes" : "no",
              r.steps_to_goal ? std::to_string(*r.steps_to_goal).c_str() : "none", (dir / "trajectory.csv").c_str());
  return kOk;
}

int cmd_analyze(const Options& o) {
  const RunConfig c = load_config(o, "");
  const fs::path dir = output_root(o, c);
  const SystemModel model = builtin_model(c.spec.system);
  const GridPartition sg = state_grid_for(model, c.spec);
  const GridPartition ag = action_grid_for(model, c.spec);
  const LipschitzBounds bounds = grid_scale_bounds(model, sg, c.spec.admissible);
  const LipschitzSequence seq = lipschitz_recursion(bounds, c.spec.learn.gamma, c.spec.bound_horizon);
  const StabilityReport st = lmi_stability_check(c.spec.learn.gamma, bounds);
  const double eta = sg.max_spacing();
  const double mu = ag.max_spacing();
  Metadata meta;
  describe_spec(c.spec, meta);
  meta.set("L_f_state", bounds.f_state);
  meta.set("L_f_action", bounds.f_action);
  meta.set("L_g_state", bounds.g_state);
  meta.set("L_g_action", bounds.g_action);
  meta.set("L_admissible", bounds.admissible);
  meta.set("eta", eta);
  meta.set("mu", mu);
  meta.set("L_state_max", seq.max_state());
  meta.set("L_action_max", seq.max_action());
  meta.set("implied_epsilon", seq.max_state() * eta + seq.max_action() * mu);
  const Metadata stability = stability_metadata(st);
  for (const auto& [k, v] : stability.entries()) meta.set(k, v);
  if (c.target_epsilon) {
    double eta_cap = model.state_space.width(0);
    for (std::size_t i = 1; i < model.state_space.dim(); ++i) eta_cap = std::min(eta_cap, model.state_space.width(i));
    const Discretization d =
        choose_discretization(seq, *c.target_epsilon, false, eta_cap, model.action_space.diameter());
    meta.set("target_epsilon", *c.target_epsilon);
    meta.set("chosen_eta", d.eta);
    meta.set("chosen_mu", d.mu);
  }
  write_file_atomic(dir / "lipschitz.csv", lipschitz_csv(seq, eta, mu));
  write_file_atomic(dir / "analysis.txt", meta.str());
  write_run_record(dir, "analyze", c, meta);
  std::printf("%s", meta.str().c_str());
  return kOk;
}

int cmd_experiment(const Options& o, const std::string& name) {
  const RunConfig c = load_config(o, name);
  ExperimentOutput out;
  if (name == "exp1") {
    out = run_experiment_1(c.spec).output;
  } else if (name == "exp2") {
    out = run_experiment_2(c.spec).output;
  } else if (name == "exp3") {
    out = run_experiment_3(c.spec).output;
  } else {
    out = run_vdp_comparison(c.spec).output;
  }
  const fs::path dir = output_root(o, c) / (name + "-" + timestamp() + "-seed" + std::to_string(c.spec.learn.seed));
  for (const auto& f : out.files) write_file_atomic(dir / f.name, f.content);
  write_run_record(dir, "experiment", c, out.metadata);
  std::printf("%s", out.metadata.str().c_str());
  std::printf("run directory: %s\n", dir.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic-abstraction Q-learning: abstraction, training, refinement and analysis"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;
  const auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON configuration file")->required();
    sub->add_option("--seed", o.seed, "override the configured seed");
    sub->add_option("--jobs", o.jobs, "worker threads (results do not depend on it)");
    sub->add_option("--out", o.out, "output directory (default: config output_dir, then SYMQ_OUT_DIR)");
  };
  auto* abstract = app.add_subcommand("abstract", "build and store the symbolic model");
  auto* train = app.add_subcommand("train", "learn the lower and upper Q tables");
  auto* policy = app.add_subcommand("policy", "extract both policies from stored Q tables");
  auto* simulate = app.add_subcommand("simulate", "run a stored policy in closed loop");
  auto* analyze = app.add_subcommand("analyze", "precision bound and stability report");
  auto* experiment = app.add_subcommand("experiment", "run a scripted experiment");
  std::string experiment_name;
  experiment->add_option("name", experiment_name, "exp1, exp2, exp3 or vdp")
      ->required()
      ->check(CLI::IsMember({"exp1", "exp2", "exp3", "vdp"}));
  for (auto* sub : {abstract, train, policy, simulate, analyze, experiment}) common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (abstract->parsed()) return cmd_abstract(o);
    if (train->parsed()) return cmd_train(o);
    if (policy->parsed()) return cmd_policy(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (analyze->parsed()) return cmd_analyze(o);
    return cmd_experiment(o, experiment_name);
  } catch (const ArtifactMismatch& e) {
    std::cerr << "artifact mismatch: " << e.what() << "\n";
    return kMismatch;
  } catch (const ConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << " (residual " << format_double(e.residual()) << ")\n";
    return kNoConvergence;
  } catch (const std::logic_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
