#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "symq/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string err;
};

fs::path workdir() {
  const fs::path d = fs::temp_directory_path() / "symq_test_cli";
  static bool fresh = false;
  if (!fresh) {
    fs::remove_all(d);
    fresh = true;
  }
  fs::create_directories(d);
  return d;
}

fs::path config(const std::string& name, const std::string& json) {
  const fs::path p = workdir() / name;
  std::ofstream(p) << json;
  return p;
}

Run cli(const std::string& args) {
  const fs::path err = workdir() / "stderr.txt";
  const std::string cmd = std::string(SYMQ_CLI) + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = symq::read_file(err);
  return r;
}

}  // namespace

TEST_CASE("cli abstract") {
  const fs::path cfg = config("mc40.json", R"({"n_state_cells": 40, "n_action_cells": 3})");
  const fs::path out1 = workdir() / "abs1", out2 = workdir() / "abs2";
  CHECK(cli("abstract --config " + cfg.string() + " --out " + out1.string()).code == 0);
  CHECK(cli("abstract --config " + cfg.string() + " --out " + out2.string() + " --jobs 3").code == 0);
  const symq::Metadata m1 = symq::Metadata::parse(symq::read_file(out1 / "abstraction.csv.meta"));
  const symq::Metadata m2 = symq::Metadata::parse(symq::read_file(out2 / "abstraction.csv.meta"));
  CHECK(m1.get("content_hash") == m2.get("content_hash"));
  CHECK(m1.get("state_cells_per_axis") == "40 40");
  CHECK(fs::exists(out1 / "config.json"));
  CHECK(fs::exists(out1 / "abstract.meta"));

  const Run bad = cli("abstract --config " + config("bad_eta.json", R"({"eta": -0.5})").string() + " --out " +
                       (workdir() / "bad").string());
  CHECK(bad.code == 2);
  CHECK(bad.err.find("eta") != std::string::npos);
  CHECK(cli("abstract --config " + config("unknown.json", R"({"etta": 0.5})").string()).code == 2);
  CHECK(cli("abstract").code == 2);
  CHECK(cli("abstract --config " + (workdir() / "nope.json").string()).code == 2);
}

TEST_CASE("cli train, policy, simulate and artifact checks") {
  const fs::path dir = workdir() / "pipe";
  const std::string base = R"("n_state_cells": 20, "gamma": 0.5, "episodes": 50, "max_steps": 50)";
  const fs::path cfg = config("train.json", "{" + base + "}");
  REQUIRE(cli("train --config " + cfg.string() + " --out " + dir.string()).code == 0);
  REQUIRE(fs::exists(dir / "qtables.csv"));
  REQUIRE(fs::exists(dir / "abstraction.csv"));

  // reuse the saved abstraction; its grid must match the config
  const fs::path reuse = config("reuse.json", "{" + base + R"(, "abstraction_file": ")" + (dir / "abstraction.csv").string() + "\"}");
  CHECK(cli("train --config " + reuse.string() + " --out " + (workdir() / "pipe2").string()).code == 0);
  const fs::path other = config("other.json", R"({"n_state_cells": 30, "abstraction_file": ")" +
                                                  (dir / "abstraction.csv").string() + "\"}");
  CHECK(cli("train --config " + other.string() + " --out " + (workdir() / "pipe3").string()).code == 3);

  // value iteration that cannot converge in two sweeps
  const fs::path vi = config("vi.json", "{" + base + R"(, "train_method": "value_iteration", "vi_max_sweeps": 2})");
  const Run nc = cli("train --config " + vi.string() + " --out " + (workdir() / "pipe4").string());
  CHECK(nc.code == 4);
  CHECK(nc.err.find("residual") != std::string::npos);

  const fs::path pol = config("policy.json", "{" + base + R"(, "qtable_file": ")" + (dir / "qtables.csv").string() + "\"}");
  REQUIRE(cli("policy --config " + pol.string() + " --out " + dir.string()).code == 0);
  CHECK(fs::exists(dir / "policy_q_min.csv"));
  CHECK(fs::exists(dir / "policy_q_max.csv"));

  const fs::path sim = config("sim.json", "{" + base + R"(, "horizon": 100, "policy_file": ")" +
                                              (dir / "policy_q_max.csv").string() + "\"}");
  CHECK(cli("simulate --config " + sim.string() + " --out " + dir.string()).code == 0);
  CHECK(fs::exists(dir / "trajectory.csv"));
  const fs::path missing = config("missing.json", "{" + base + R"(, "policy_file": ")" +
                                                      (workdir() / "no_policy.csv").string() + "\"}");
  CHECK(cli("simulate --config " + missing.string() + " --out " + dir.string()).code == 2);

  // a tampered table is rejected
  std::string q = symq::read_file(dir / "qtables.csv");
  q.back() = q.back() == '\n' ? ' ' : '\n';
  symq::write_file_atomic(workdir() / "tampered.csv", q);
  fs::copy_file(dir / "qtables.csv.meta", workdir() / "tampered.csv.meta", fs::copy_options::overwrite_existing);
  const fs::path tp = config("tampered.json", "{" + base + R"(, "qtable_file": ")" + (workdir() / "tampered.csv").string() + "\"}");
  CHECK(cli("policy --config " + tp.string() + " --out " + dir.string()).code == 3);
}

TEST_CASE("cli analyze and experiment") {
  const fs::path dir = workdir() / "an";
  const fs::path cfg = config("an.json", R"({"n_state_cells": 40, "gamma": 0.99, "target_epsilon": 1.0})");
  REQUIRE(cli("analyze --config " + cfg.string() + " --out " + dir.string()).code == 0);
  const std::string report = symq::read_file(dir / "analysis.txt");
  CHECK(report.find("spectral_radius") != std::string::npos);
  CHECK(fs::exists(dir / "lipschitz.csv"));

  const fs::path exp = workdir() / "exp";
  const fs::path small = config("exp1.json", R"({"n_state_cells": 20, "episodes": 20, "max_steps": 100, "horizon": 50})");
  REQUIRE(cli("experiment exp1 --config " + small.string() + " --out " + exp.string() + " --seed 3").code == 0);
  std::size_t runs = 0;
  for (const auto& e : fs::directory_iterator(exp)) {
    ++runs;
    const std::string name = e.path().filename().string();
    CHECK(name.rfind("exp1-", 0) == 0);
    CHECK(name.size() > 6);
    CHECK(name.substr(name.size() - 6) == "-seed3");
    for (const char* f : {"policy_q_min.csv", "policy_q_max.csv", "trajectory_q_min.csv", "trajectory_q_max.csv"}) {
      CHECK(fs::exists(e.path() / f));
    }
  }
  CHECK(runs == 1);
  CHECK(cli("experiment exp9 --config " + small.string()).code == 2);
}
