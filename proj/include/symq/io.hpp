#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symq/abstraction.hpp"
#include "symq/analysis.hpp"
#include "symq/learner.hpp"
#include "symq/refinement.hpp"

namespace symq {

/// A stored artifact disagrees with its metadata or with the run that uses it.
class ArtifactMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);
std::string format_vec(const Vec& v);  // space separated
Vec parse_vec(std::string_view text);

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string content_hash(std::string_view bytes);

/// Ordered `key = value` records.
class Metadata {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // throws ArtifactMismatch if absent
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string str() const;
  static Metadata parse(std::string_view text);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Writes through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& artifact);  // <artifact>.meta

// Symbolic model: CSV (s_index, a_index, g_min, g_max, successor_count,
// successors) + sidecar with grids, constants, modes and the CSV hash.
std::string abstraction_csv(const SymbolicModel& sym);
Metadata abstraction_metadata(const SymbolicModel& sym, const std::string& csv_hash);
std::string save_abstraction(const SymbolicModel& sym, const std::filesystem::path& csv_path);  // returns hash
SymbolicModel load_abstraction(const std::filesystem::path& csv_path);

// Q tables: CSV (s_index, a_index, q_min, q_max, visits).
std::string qtable_csv(const QTablePair& pair);
std::string save_qtable(const QTablePair& pair, const std::filesystem::path& csv_path, Metadata meta);
QTablePair load_qtable(const std::filesystem::path& csv_path, Metadata* meta_out = nullptr);

// Policy: CSV (s_index, c1..cn, action_index, u1..um); sinks have an empty
// action index and nan action columns.
std::string policy_csv(const PolicyTable& policy, const GridPartition& state_grid,
                       const GridPartition& action_grid, const Box& action_space);
PolicyTable parse_policy_csv(std::string_view text, std::size_t n_states);

// Trajectory: CSV (k, x1..xn, u1..um, reward); the final state is a last row
// with nan action and reward.
std::string trajectory_csv(const Trajectory& t, std::size_t state_dim, std::size_t action_dim);

// Analysis: per-k CSV (k, l_state, l_action, bound) and a key-value report.
std::string lipschitz_csv(const LipschitzSequence& seq, double eta, double mu);
Metadata stability_metadata(const StabilityReport& r);

}  // namespace symq
