#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "symq/config.hpp"
#include "symq/io.hpp"
#include "symq/rng.hpp"
#include "toy.hpp"

using namespace symq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "symq_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("doubles round-trip exactly") {
  Rng rng(12);
  for (int i = 0; i < 5000; ++i) {
    const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.index(200)) - 100);
    REQUIRE(parse_double(format_double(v)) == v);
  }
  for (double v : {0.0, -0.0, 0.1, 1e-300, 5e-324, 1.7976931348623157e308, -2.5}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(std::isinf(parse_double(format_double(-std::numeric_limits<double>::infinity()))));
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK_THROWS_AS(parse_double("1.5x"), ArtifactMismatch);
  CHECK(parse_vec(format_vec(Vec{0.1, -3.0, 1e10})) == Vec{0.1, -3.0, 1e10});
}

TEST_CASE("content hash") {
  // FNV-1a 64 reference values
  CHECK(content_hash("") == "cbf29ce484222325");
  CHECK(content_hash("a") == "af63dc4c8601ec8c");
  CHECK(content_hash("foobar") == "85944171f73967e8");
}

TEST_CASE("metadata text") {
  Metadata m;
  m.set("name", std::string("toy"));
  m.set("gamma", 0.9);
  m.set("count", std::uint64_t{12});
  m.set("gamma", 0.5);
  const Metadata back = Metadata::parse(m.str());
  CHECK(back.get("name") == "toy");
  CHECK(back.get("gamma") == "0.5");
  CHECK(back.get("count") == "12");
  CHECK(back.entries().size() == 3);
  CHECK_FALSE(back.has("missing"));
  CHECK_THROWS_AS(back.get("missing"), ArtifactMismatch);
}

TEST_CASE("abstraction round-trip") {
  const SymbolicModel sym = testing::toy_symbolic(16, 3);
  const fs::path p = scratch("abstraction.csv");
  const std::string hash = save_abstraction(sym, p);
  CHECK(hash == content_hash(read_file(p)));
  CHECK(fs::exists(sidecar_path(p)));
  const SymbolicModel back = load_abstraction(p);
  CHECK(back.state_grid == sym.state_grid);
  CHECK(back.action_grid == sym.action_grid);
  CHECK(back.offsets == sym.offsets);
  CHECK(back.successor_data == sym.successor_data);
  CHECK(back.reward_min == sym.reward_min);
  CHECK(back.reward_max == sym.reward_max);
  CHECK(back.inflation == sym.inflation);
  CHECK(back.axis_inflation == sym.axis_inflation);
  CHECK(abstraction_csv(back) == abstraction_csv(sym));

  // a changed byte breaks the hash
  std::string text = read_file(p);
  text[text.size() - 2] = text[text.size() - 2] == '1' ? '2' : '1';
  write_file_atomic(p, text);
  CHECK_THROWS_AS(load_abstraction(p), ArtifactMismatch);
  CHECK_THROWS_AS(load_abstraction(scratch("absent.csv")), std::invalid_argument);
}

TEST_CASE("q table round-trip") {
  QTablePair q;
  q.n_states = 3;
  q.n_actions = 2;
  q.gamma = 0.7;
  q.q_min = {-1.0 / 3.0, kDisabledValue, 0.1, -2.0, 0.0, -1e-17};
  q.q_max = {0.2, kDisabledValue, 0.3, -1.5, 0.0, 1e-17};
  q.visit_counts = {4, 0, 1, 2, 9, 10};
  const fs::path p = scratch("qtables.csv");
  Metadata meta;
  meta.set("system", std::string("toy"));
  save_qtable(q, p, meta);
  Metadata back_meta;
  const QTablePair back = load_qtable(p, &back_meta);
  CHECK(back.q_min == q.q_min);
  CHECK(back.q_max == q.q_max);
  CHECK(back.visit_counts == q.visit_counts);
  CHECK(back_meta.get("system") == "toy");
  CHECK(qtable_csv(back) == qtable_csv(q));
  CHECK(qtable_csv(q).rfind("s_index,a_index,q_min,q_max,visits\n", 0) == 0);
}

TEST_CASE("policy and trajectory CSV") {
  const SystemModel toy = testing::toy_model();
  const GridPartition sg = build_grid_with_counts(toy.state_space, {4});
  const GridPartition ag = build_grid_with_counts(toy.action_space, {2});
  PolicyTable p;
  p.action_of = {0, 1, PolicyTable::kSink, 1};
  const std::string csv = policy_csv(p, sg, ag, toy.action_space);
  CHECK(csv.rfind("s_index,c1,action_index,u1\n", 0) == 0);
  CHECK(parse_policy_csv(csv, 4).action_of == p.action_of);
  CHECK_THROWS_AS(parse_policy_csv(csv, 5), ArtifactMismatch);

  Trajectory t;
  t.steps.push_back({0, Vec{0.5}, Vec{-0.5}, -0.275});
  t.final_state = Vec{0.125};
  const std::string tc = trajectory_csv(t, 1, 1);
  CHECK(tc == "k,x1,u1,reward\n0,0.5,-0.5,-0.275\n1,0.125,nan,nan\n");
}

TEST_CASE("config parsing") {
  const RunConfig d = parse_run_config("{}", "exp1");
  CHECK(d.spec.n_state_cells == 160);
  CHECK(d.spec.learn.gamma == 0.99);
  CHECK(d.spec.learn.alpha == 0.4);
  CHECK(d.spec.learn.epsilon_explore == 0.4);

  const RunConfig v = parse_run_config(R"({"system": "van_der_pol", "eta": 0.1, "seed": 5})");
  CHECK(v.spec.system == "van_der_pol");
  CHECK(v.spec.eta == Vec{0.1, 0.1});
  CHECK(v.spec.learn.seed == 5);

  auto message = [](const std::string& text) {
    try {
      parse_run_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"colour": 1})").find("colour") != std::string::npos);
  CHECK(message(R"({"eta": -0.1})").find("eta") != std::string::npos);
  CHECK(message(R"({"gamma": 1.5})").find("gamma") != std::string::npos);
  CHECK(message(R"({"n_action_cells": 0})").find("n_action_cells") != std::string::npos);
  CHECK(message("[1, 2]") != "");
  CHECK(message("{not json") != "");

  // materialized config parses back to itself
  const RunConfig again = parse_run_config(config_json(v));
  CHECK(config_json(again) == config_json(v));
}
