#include "symq/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace symq {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ArtifactMismatch("not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ArtifactMismatch("not an integer: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

// Data lines of a CSV, header dropped.
std::vector<std::string_view> data_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::string_view line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
  }
  if (!lines.empty()) lines.erase(lines.begin());
  return lines;
}

std::string format_counts(const std::vector<std::size_t>& counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(counts[i]);
  }
  return s;
}

std::vector<std::size_t> parse_counts(std::string_view text) {
  std::vector<std::size_t> out;
  for (std::string_view t : split(text, ' ')) {
    if (!t.empty()) out.push_back(static_cast<std::size_t>(parse_u64(t)));
  }
  return out;
}

const char* reward_mode_name(RewardBoundMode m) {
  switch (m) {
    case RewardBoundMode::lipschitz: return "lipschitz";
    case RewardBoundMode::corner_sampling: return "corner_sampling";
    case RewardBoundMode::exact_callback: return "exact_callback";
  }
  return "?";
}

RewardBoundMode parse_reward_mode(const std::string& s) {
  if (s == "lipschitz") return RewardBoundMode::lipschitz;
  if (s == "corner_sampling") return RewardBoundMode::corner_sampling;
  if (s == "exact_callback") return RewardBoundMode::exact_callback;
  throw ArtifactMismatch("unknown reward mode '" + s + "'");
}

void put_grid(Metadata& m, const std::string& prefix, const GridPartition& g) {
  m.set(prefix + "_lower", format_vec(g.box.lower));
  m.set(prefix + "_upper", format_vec(g.box.upper));
  m.set(prefix + "_spacing", format_vec(g.spacing));
  m.set(prefix + "_cells_per_axis", format_counts(g.cells_per_axis));
}

GridPartition get_grid(const Metadata& m, const std::string& prefix) {
  GridPartition g{Box(parse_vec(m.get(prefix + "_lower")), parse_vec(m.get(prefix + "_upper"))),
                  parse_vec(m.get(prefix + "_spacing")), parse_counts(m.get(prefix + "_cells_per_axis")), 1};
  for (std::size_t c : g.cells_per_axis) g.total_cells *= c;
  if (g.spacing.size() != g.dim() || g.cells_per_axis.size() != g.dim()) {
    throw ArtifactMismatch(prefix + " grid metadata has inconsistent dimensions");
  }
  return g;
}

}  // namespace

std::string format_vec(const Vec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_double(v[i]);
  }
  return s;
}

Vec parse_vec(std::string_view text) {
  Vec out;
  for (std::string_view t : split(text, ' ')) {
    if (!t.empty()) out.push_back(parse_double(t));
  }
  return out;
}

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Metadata::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

bool Metadata::has(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return true;
  }
  return false;
}

const std::string& Metadata::get(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return e.second;
  }
  throw ArtifactMismatch("metadata lacks key '" + key + "'");
}

std::string Metadata::str() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

Metadata Metadata::parse(std::string_view text) {
  Metadata m;
  for (std::string_view line : split(text, '\n')) {
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find(" = ");
    if (eq == std::string_view::npos) throw ArtifactMismatch("malformed metadata line: " + std::string(line));
    m.set(std::string(line.substr(0, eq)), std::string(line.substr(eq + 3)));
  }
  return m;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path sidecar_path(const fs::path& artifact) {
  fs::path p = artifact;
  p += ".meta";
  return p;
}

std::string abstraction_csv(const SymbolicModel& sym) {
  std::string out = "s_index,a_index,g_min,g_max,successor_count,successors\n";
  for (CellId s = 0; s < sym.n_states(); ++s) {
    for (CellId a = 0; a < sym.n_actions(); ++a) {
      const std::size_t p = sym.pair_index(s, a);
      const auto succ = sym.successors(s, a);
      out += std::to_string(s) + ',' + std::to_string(a) + ',' + format_double(sym.reward_min[p]) + ',' +
             format_double(sym.reward_max[p]) + ',' + std::to_string(succ.size()) + ',';
      for (std::size_t i = 0; i < succ.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(succ[i]);
      }
      out += '\n';
    }
  }
  return out;
}

Metadata abstraction_metadata(const SymbolicModel& sym, const std::string& csv_hash) {
  Metadata m;
  m.set("artifact", std::string("symbolic_model"));
  m.set("system", sym.system);
  put_grid(m, "state", sym.state_grid);
  put_grid(m, "action", sym.action_grid);
  m.set("L_f_state", sym.lipschitz.f_state);
  m.set("L_f_action", sym.lipschitz.f_action);
  m.set("L_g_state", sym.lipschitz.g_state);
  m.set("L_g_action", sym.lipschitz.g_action);
  m.set("L_admissible", sym.lipschitz.admissible);
  m.set("reward_mode", std::string(reward_mode_name(sym.reward_mode)));
  m.set("enabling", std::string(sym.enabling == EnablingMode::clip ? "clip" : "strict"));
  m.set("clip_state", std::string(sym.clip_state ? "true" : "false"));
  m.set("inflation", sym.inflation);
  m.set("axis_inflation", format_vec(sym.axis_inflation));
  m.set("n_states", static_cast<std::uint64_t>(sym.n_states()));
  m.set("n_actions", static_cast<std::uint64_t>(sym.n_actions()));
  m.set("content_hash", csv_hash);
  return m;
}

std::string save_abstraction(const SymbolicModel& sym, const fs::path& csv_path) {
  const std::string csv = abstraction_csv(sym);
  const std::string hash = content_hash(csv);
  write_file_atomic(csv_path, csv);
  write_file_atomic(sidecar_path(csv_path), abstraction_metadata(sym, hash).str());
  return hash;
}

SymbolicModel load_abstraction(const fs::path& csv_path) {
  const std::string csv = read_file(csv_path);
  const Metadata m = Metadata::parse(read_file(sidecar_path(csv_path)));
  if (content_hash(csv) != m.get("content_hash")) {
    throw ArtifactMismatch("abstraction content hash differs from its metadata: " + csv_path.string());
  }
  SymbolicModel sym;
  sym.system = m.get("system");
  sym.state_grid = get_grid(m, "state");
  sym.action_grid = get_grid(m, "action");
  sym.lipschitz = {parse_double(m.get("L_f_state")), parse_double(m.get("L_f_action")),
                   parse_double(m.get("L_g_state")), parse_double(m.get("L_g_action")),
                   parse_double(m.get("L_admissible"))};
  sym.reward_mode = parse_reward_mode(m.get("reward_mode"));
  sym.enabling = m.get("enabling") == "strict" ? EnablingMode::strict : EnablingMode::clip;
  sym.clip_state = m.get("clip_state") == "true";
  sym.inflation = parse_double(m.get("inflation"));
  sym.axis_inflation = parse_vec(m.get("axis_inflation"));

  const std::size_t n_pairs = sym.n_states() * sym.n_actions();
  const auto lines = data_lines(csv);
  if (lines.size() != n_pairs) throw ArtifactMismatch("abstraction CSV has the wrong number of rows");
  sym.offsets.assign(1, 0);
  sym.offsets.reserve(n_pairs + 1);
  sym.reward_min.resize(n_pairs);
  sym.reward_max.resize(n_pairs);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const auto f = split(lines[p], ',');
    if (f.size() != 6) throw ArtifactMismatch("abstraction CSV row " + std::to_string(p) + " is malformed");
    const std::size_t s = parse_u64(f[0]);
    const std::size_t a = parse_u64(f[1]);
    if (sym.pair_index(static_cast<CellId>(s), static_cast<CellId>(a)) != p) {
      throw ArtifactMismatch("abstraction CSV rows are out of order");
    }
    sym.reward_min[p] = parse_double(f[2]);
    sym.reward_max[p] = parse_double(f[3]);
    const std::size_t count = parse_u64(f[4]);
    if (count > 0) {
      for (std::string_view t : split(f[5], ';')) {
        const std::uint64_t id = parse_u64(t);
        if (id >= sym.n_states()) throw ArtifactMismatch("successor index out of range");
        sym.successor_data.push_back(static_cast<CellId>(id));
      }
    } else if (!f[5].empty()) {
      throw ArtifactMismatch("successor count mismatch");
    }
    if (sym.successor_data.size() - sym.offsets.back() != count) throw ArtifactMismatch("successor count mismatch");
    sym.offsets.push_back(sym.successor_data.size());
  }
  return sym;
}

std::string qtable_csv(const QTablePair& t) {
  std::string out = "s_index,a_index,q_min,q_max,visits\n";
  for (std::size_t s = 0; s < t.n_states; ++s) {
    for (std::size_t a = 0; a < t.n_actions; ++a) {
      const std::size_t p = t.pair_index(s, a);
      out += std::to_string(s) + ',' + std::to_string(a) + ',' + format_double(t.q_min[p]) + ',' +
             format_double(t.q_max[p]) + ',' + std::to_string(t.visit_counts[p]) + '\n';
    }
  }
  return out;
}

std::string save_qtable(const QTablePair& t, const fs::path& csv_path, Metadata meta) {
  const std::string csv = qtable_csv(t);
  const std::string hash = content_hash(csv);
  meta.set("artifact", std::string("q_tables"));
  meta.set("n_states", static_cast<std::uint64_t>(t.n_states));
  meta.set("n_actions", static_cast<std::uint64_t>(t.n_actions));
  meta.set("gamma", t.gamma);
  meta.set("updates_applied", t.updates_applied);
  meta.set("content_hash", hash);
  write_file_atomic(csv_path, csv);
  write_file_atomic(sidecar_path(csv_path), meta.str());
  return hash;
}

QTablePair load_qtable(const fs::path& csv_path, Metadata* meta_out) {
  const std::string csv = read_file(csv_path);
  const Metadata m = Metadata::parse(read_file(sidecar_path(csv_path)));
  if (content_hash(csv) != m.get("content_hash")) {
    throw ArtifactMismatch("Q-table content hash differs from its metadata: " + csv_path.string());
  }
  QTablePair t;
  t.n_states = parse_u64(m.get("n_states"));
  t.n_actions = parse_u64(m.get("n_actions"));
  t.gamma = parse_double(m.get("gamma"));
  t.updates_applied = parse_u64(m.get("updates_applied"));
  const std::size_t n = t.n_states * t.n_actions;
  const auto lines = data_lines(csv);
  if (lines.size() != n) throw ArtifactMismatch("Q-table CSV has the wrong number of rows");
  t.q_min.resize(n);
  t.q_max.resize(n);
  t.visit_counts.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto f = split(lines[p], ',');
    if (f.size() != 5) throw ArtifactMismatch("Q-table CSV row " + std::to_string(p) + " is malformed");
    if (t.pair_index(parse_u64(f[0]), parse_u64(f[1])) != p) throw ArtifactMismatch("Q-table rows out of order");
    t.q_min[p] = parse_double(f[2]);
    t.q_max[p] = parse_double(f[3]);
    t.visit_counts[p] = parse_u64(f[4]);
  }
  if (meta_out) *meta_out = m;
  return t;
}

std::string policy_csv(const PolicyTable& policy, const GridPartition& sg, const GridPartition& ag,
                       const Box& action_space) {
  std::string out = "s_index";
  for (std::size_t i = 0; i < sg.dim(); ++i) out += ",c" + std::to_string(i + 1);
  out += ",action_index";
  for (std::size_t i = 0; i < ag.dim(); ++i) out += ",u" + std::to_string(i + 1);
  out += '\n';
  for (CellId s = 0; s < policy.action_of.size(); ++s) {
    out += std::to_string(s);
    for (double c : cell_center(sg, s)) out += ',' + format_double(c);
    out += ',';
    if (policy.is_sink(s)) {
      for (std::size_t i = 0; i < ag.dim(); ++i) out += ",nan";
    } else {
      out += std::to_string(policy.action_of[s]);
      for (double u : action_space.clip(cell_center(ag, policy.action_of[s]))) out += ',' + format_double(u);
    }
    out += '\n';
  }
  return out;
}

PolicyTable parse_policy_csv(std::string_view text, std::size_t n_states) {
  const auto all = split(text, '\n');
  if (all.empty()) throw ArtifactMismatch("empty policy CSV");
  const auto header = split(all[0], ',');
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "action_index") col = i;
  }
  if (col == header.size()) throw ArtifactMismatch("policy CSV lacks an action_index column");
  PolicyTable p;
  p.action_of.assign(n_states, PolicyTable::kSink);
  const auto lines = data_lines(text);
  if (lines.size() != n_states) throw ArtifactMismatch("policy CSV has the wrong number of rows");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != header.size() || parse_u64(f[0]) != i) throw ArtifactMismatch("policy CSV row malformed");
    if (!f[col].empty()) p.action_of[i] = static_cast<CellId>(parse_u64(f[col]));
  }
  return p;
}

std::string trajectory_csv(const Trajectory& t, std::size_t nx, std::size_t nu) {
  std::string out = "k";
  for (std::size_t i = 0; i < nx; ++i) out += ",x" + std::to_string(i + 1);
  for (std::size_t i = 0; i < nu; ++i) out += ",u" + std::to_string(i + 1);
  out += ",reward\n";
  for (const auto& st : t.steps) {
    out += std::to_string(st.k);
    for (double x : st.state) out += ',' + format_double(x);
    for (double u : st.action) out += ',' + format_double(u);
    out += ',' + format_double(st.reward) + '\n';
  }
  out += std::to_string(t.steps.size());
  for (double x : t.final_state) out += ',' + format_double(x);
  for (std::size_t i = 0; i < nu; ++i) out += ",nan";
  out += ",nan\n";
  return out;
}

std::string lipschitz_csv(const LipschitzSequence& seq, double eta, double mu) {
  std::string out = "k,l_state,l_action,bound\n";
  for (std::size_t k = 1; k <= seq.size(); ++k) {
    out += std::to_string(k) + ',' + format_double(seq.l_state[k - 1]) + ',' + format_double(seq.l_action[k - 1]) +
           ',' + format_double(precision_bound(seq, k, eta, mu)) + '\n';
  }
  return out;
}

Metadata stability_metadata(const StabilityReport& r) {
  Metadata m;
  m.set("lmi_feasible", std::string(r.feasible ? "true" : "false"));
  m.set("lmi_spectral_radius", r.spectral_radius);
  if (r.p_matrix) {
    const auto& p = *r.p_matrix;
    m.set("lmi_P", format_vec({p[0], p[1], p[2], p[3]}));
    m.set("lmi_residual_max_eigenvalue", r.lyapunov_residual_max_eig);
  }
  m.set("recursion_spectral_radius", r.recursion_spectral_radius);
  m.set("recursion_contractive", std::string(r.recursion_contractive ? "true" : "false"));
  m.set("matrices_disagree", std::string(r.matrices_disagree ? "true" : "false"));
  if (r.recursion_fixed_point) {
    m.set("recursion_fixed_point", format_vec({(*r.recursion_fixed_point)[0], (*r.recursion_fixed_point)[1]}));
  }
  m.set("claimed_limit_L0", format_vec({r.claimed_limit[0], r.claimed_limit[1]}));
  return m;
}

}  // namespace symq
