#include "cascade_infer/cascade.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>

#include "cascade_infer/errors.hpp"
#include "cascade_infer/parallel.hpp"
#include "cascade_infer/text.hpp"

namespace cascade_infer {

namespace {

std::size_t idx(NodeId i) { return static_cast<std::size_t>(i); }

}  // namespace

std::vector<std::string> check_record(const WeightedDigraph& g, const CascadeRecord& r) {
  std::vector<std::string> problems;
  const std::size_t n = g.node_count();
  if (r.t_true.size() != n || r.t_noisy.size() != n || r.infected.size() != n) {
    problems.emplace_back("record vectors do not match node count");
    return problems;
  }
  if (r.source < 0 || idx(r.source) >= n) {
    problems.emplace_back("source outside node range");
    return problems;
  }
  if (r.t0 < 1) problems.emplace_back("t0 must be positive");
  if (r.t_true[idx(r.source)] != r.t0) problems.emplace_back("source not infected at t0");

  for (std::size_t i = 0; i < n; ++i) {
    const bool finite_true = r.t_true[i] != kNever;
    const bool finite_noisy = r.t_noisy[i] != kNever;
    const auto who = "node " + std::to_string(i) + ": ";
    if (r.infected[i] != finite_true || finite_true != finite_noisy) {
      problems.push_back(who + "infection status and times disagree");
      continue;
    }
    if (!finite_true) continue;
    if (r.t_true[i] < r.t0) problems.push_back(who + "infected before t0");
    if (r.t_noisy[i] < r.t_true[i]) problems.push_back(who + "noisy time precedes true time");
    if (static_cast<NodeId>(i) == r.source) continue;
    bool has_parent = false;
    for (std::size_t j = 0; j < n && !has_parent; ++j) {
      has_parent = r.infected[j] && g.has_edge(static_cast<NodeId>(j), static_cast<NodeId>(i)) &&
                   r.t_true[j] != kNever && r.t_true[j] + 1 == r.t_true[i];
    }
    if (!has_parent) problems.push_back(who + "no infected parent one step earlier");
  }

  const auto nbrs = g.undirected_neighbors();
  std::vector<bool> reached(n, false);
  std::queue<NodeId> queue;
  queue.push(r.source);
  reached[idx(r.source)] = true;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop();
    for (NodeId v : nbrs[idx(u)]) {
      if (r.infected[idx(v)] && !reached[idx(v)]) {
        reached[idx(v)] = true;
        queue.push(v);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (r.infected[i] && !reached[i]) {
      problems.push_back("node " + std::to_string(i) + ": infected set not connected to source");
    }
  }
  return problems;
}

CascadeSimulator::CascadeSimulator(const WeightedDigraph& g, const NoiseModel& noise)
    : graph_(g), noise_(noise) {
  if (g.node_count() == 0) throw ParameterError("cannot simulate on an empty graph");
  frontier_.reserve(g.node_count());
  next_.reserve(g.node_count());
}

void CascadeSimulator::run(Time t0, Rng& rng, CascadeRecord& out) {
  if (t0 < 1) throw ParameterError("cascade start time must be positive");
  const std::size_t n = graph_.node_count();
  out.t_true.assign(n, kNever);
  out.t_noisy.assign(n, kNever);
  out.infected.assign(n, false);
  out.t0 = t0;
  out.source = static_cast<NodeId>(rng.below(n));

  out.t_true[idx(out.source)] = t0;
  frontier_.assign(1, out.source);
  for (Time t = t0; !frontier_.empty(); ++t) {
    next_.clear();
    for (NodeId u : frontier_) {
      for (const OutEdge& e : graph_.out_edges(u)) {
        auto& target_time = out.t_true[idx(e.target)];
        if (target_time == kNever && rng.bernoulli(e.weight)) {
          target_time = t + 1;
          next_.push_back(e.target);
        }
      }
    }
    frontier_.swap(next_);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (out.t_true[i] == kNever) continue;
    out.infected[i] = true;
    out.t_noisy[i] = out.t_true[i] + noise_.sample(rng);
  }
}

CascadeRecord simulate_one(const WeightedDigraph& g, const NoiseModel& noise, Time t0, Rng& rng) {
  CascadeSimulator sim(g, noise);
  CascadeRecord record;
  sim.run(t0, rng, record);
  return record;
}

CascadeSet simulate_batch(const WeightedDigraph& g, const NoiseModel& noise, std::size_t count,
                          Time t0, std::uint64_t seed, std::size_t threads) {
  if (count == 0) throw ParameterError("cascade count must be at least 1");
  if (t0 < 1) throw ParameterError("cascade start time must be positive");
  CascadeSet set;
  set.node_count = g.node_count();
  set.provenance = {g.content_hash(), noise.spec(), seed};
  set.records.resize(count);
  parallel_chunks(count, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    CascadeSimulator sim(g, noise);
    for (std::size_t m = begin; m < end; ++m) {
      Rng rng(derive_seed(seed, m));
      sim.run(t0, rng, set.records[m]);
    }
  });
  return set;
}

std::string_view to_string(ObservationMode mode) {
  switch (mode) {
    case ObservationMode::no_noise: return "no_noise";
    case ObservationMode::limited_noise: return "limited_noise";
    case ObservationMode::extreme_noise: return "extreme_noise";
  }
  return "unknown";
}

ObservationMode parse_observation_mode(std::string_view text) {
  text = trim(text);
  if (text == "no_noise" || text == "none" || text == "no-noise") return ObservationMode::no_noise;
  if (text == "limited_noise" || text == "limited" || text == "limited-noise") {
    return ObservationMode::limited_noise;
  }
  if (text == "extreme_noise" || text == "extreme" || text == "extreme-noise") {
    return ObservationMode::extreme_noise;
  }
  throw ParseError(0, "unknown observation mode '" + std::string(text) + "'");
}

ObservationSet::ObservationSet(std::size_t node_count, ObservationMode mode)
    : n_(node_count), mode_(mode), words_((node_count + 63) / 64) {}

bool ObservationSet::infected(std::size_t m, NodeId i) const {
  if (m >= size() || i < 0 || idx(i) >= n_) throw ParameterError("observation index out of range");
  return (status_[m * words_ + idx(i) / 64] >> (idx(i) % 64)) & 1U;
}

std::span<const std::uint64_t> ObservationSet::status_row(std::size_t m) const {
  if (m >= size()) throw ParameterError("observation index out of range");
  return {status_.data() + m * words_, words_};
}

std::span<const Time> ObservationSet::observed_times(std::size_t m) const {
  if (!has_times()) throw AccessError("infection times are not observable in the extreme-noise setting");
  if (m >= size()) throw ParameterError("observation index out of range");
  return {times_.data() + m * n_, n_};
}

Time ObservationSet::observed_time(std::size_t m, NodeId i) const {
  const auto row = observed_times(m);
  if (i < 0 || idx(i) >= n_) throw ParameterError("node index out of range");
  return row[idx(i)];
}

Time ObservationSet::true_time(std::size_t m, NodeId i) const {
  if (mode_ != ObservationMode::no_noise) {
    throw AccessError("true infection times are only observable in the no-noise setting");
  }
  return observed_time(m, i);
}

Time ObservationSet::noisy_time(std::size_t m, NodeId i) const {
  if (mode_ != ObservationMode::limited_noise) {
    throw AccessError("noisy infection times are only recorded in the limited-noise setting");
  }
  return observed_time(m, i);
}

void ObservationSet::append(NodeId source, Time t0, const std::vector<bool>& infected,
                            std::span<const Time> times) {
  if (infected.size() != n_) throw ParameterError("status vector does not match node count");
  if (has_times() ? times.size() != n_ : !times.empty()) {
    throw ParameterError("time vector does not match observation setting");
  }
  const std::size_t base = status_.size();
  status_.resize(base + words_, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    if (infected[i]) status_[base + i / 64] |= std::uint64_t{1} << (i % 64);
  }
  times_.insert(times_.end(), times.begin(), times.end());
  sources_.push_back(source);
  starts_.push_back(t0);
}

ObservationSet restrict_observation(const CascadeSet& cascades, ObservationMode mode) {
  ObservationSet obs(cascades.node_count, mode);
  obs.set_provenance(cascades.provenance);
  for (const auto& r : cascades.records) {
    std::span<const Time> times;
    if (mode == ObservationMode::no_noise) times = r.t_true;
    if (mode == ObservationMode::limited_noise) times = r.t_noisy;
    obs.append(r.source, r.t0, r.infected, times);
  }
  return obs;
}

namespace {

std::string time_text(Time t) { return t == kNever ? "inf" : std::to_string(t); }

Time parse_time(std::string_view text) {
  if (text == "inf") return kNever;
  return parse_int(text);
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << v;
  return s.str();
}

void write_header(std::ostream& out, std::size_t n, std::size_t m, std::string_view mode,
                  const Provenance& p) {
  out << "#cascades\tn=" << n << "\tM=" << m << "\tmode=" << mode << "\tgraph_hash=" << hex(p.graph_hash)
      << "\tseed=" << p.seed << "\tnoise=" << (p.noise_spec.empty() ? "-" : p.noise_spec) << '\n';
}

}  // namespace

void write_cascades(const CascadeSet& cascades, std::optional<ObservationMode> mode, std::ostream& out) {
  const bool with_true = !mode || *mode == ObservationMode::no_noise;
  const bool with_noisy = !mode || *mode == ObservationMode::limited_noise;
  write_header(out, cascades.node_count, cascades.size(), mode ? to_string(*mode) : "full",
               cascades.provenance);
  for (std::size_t m = 0; m < cascades.size(); ++m) {
    const auto& r = cascades.records[m];
    out << m << '\t' << r.source << '\t' << r.t0;
    for (std::size_t i = 0; i < cascades.node_count; ++i) {
      out << '\t' << (with_true ? time_text(r.t_true[i]) : "-") << '|'
          << (with_noisy ? time_text(r.t_noisy[i]) : "-") << '|' << (r.infected[i] ? '1' : '0');
    }
    out << '\n';
  }
}

void write_cascades(const ObservationSet& obs, std::ostream& out) {
  write_header(out, obs.node_count(), obs.size(), to_string(obs.mode()), obs.provenance());
  for (std::size_t m = 0; m < obs.size(); ++m) {
    out << m << '\t' << obs.source(m) << '\t' << obs.start_time(m);
    for (std::size_t i = 0; i < obs.node_count(); ++i) {
      const auto node = static_cast<NodeId>(i);
      const std::string t = obs.has_times() ? time_text(obs.observed_time(m, node)) : "-";
      out << '\t' << (obs.mode() == ObservationMode::no_noise ? t : "-") << '|'
          << (obs.mode() == ObservationMode::limited_noise ? t : "-") << '|'
          << (obs.infected(m, node) ? '1' : '0');
    }
    out << '\n';
  }
}

void write_cascades(const CascadeSet& cascades, std::optional<ObservationMode> mode,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write cascade file '" + path.string() + "'");
  write_cascades(cascades, mode, out);
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

namespace {

struct CascadeHeader {
  std::size_t n = 0;
  std::size_t m = 0;
  std::string mode;
  Provenance provenance;
};

CascadeHeader parse_header(const std::string& line) {
  if (line.rfind("#cascades", 0) != 0) throw ParseError(1, "missing '#cascades' header");
  std::map<std::string, std::string> kv;
  for (auto field : split(line, '\t')) {
    field = trim(field);
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) continue;
    kv[std::string(field.substr(0, eq))] = std::string(field.substr(eq + 1));
  }
  CascadeHeader h;
  try {
    if (!kv.contains("n") || !kv.contains("M") || !kv.contains("mode")) {
      throw ParseError(0, "header needs n=, M= and mode=");
    }
    h.n = parse_uint(kv["n"]);
    h.m = parse_uint(kv["M"]);
    h.mode = kv["mode"];
    if (h.mode != "full") parse_observation_mode(h.mode);
    if (kv.contains("graph_hash")) h.provenance.graph_hash = std::stoull(kv["graph_hash"], nullptr, 16);
    if (kv.contains("seed")) h.provenance.seed = parse_uint(kv["seed"]);
    if (kv.contains("noise") && kv["noise"] != "-") h.provenance.noise_spec = kv["noise"];
  } catch (const ParseError& e) {
    throw ParseError(1, e.what());
  } catch (const std::exception& e) {
    throw ParseError(1, std::string("bad header value: ") + e.what());
  }
  return h;
}

bool supports(std::string_view file_mode, ObservationMode wanted) {
  if (file_mode == "full") return true;
  const auto have = parse_observation_mode(file_mode);
  return have == wanted || wanted == ObservationMode::extreme_noise;
}

}  // namespace

ObservationSet read_cascades(std::istream& in, ObservationMode mode) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty cascade file");
  const CascadeHeader header = parse_header(line);
  if (!supports(header.mode, mode)) {
    throw AccessError("cascade file with mode=" + header.mode + " cannot provide the " +
                      std::string(to_string(mode)) + " setting");
  }
  const std::size_t time_col = mode == ObservationMode::no_noise ? 0 : 1;

  ObservationSet obs(header.n, mode);
  obs.set_provenance(header.provenance);
  std::vector<bool> infected(header.n);
  std::vector<Time> times(obs.has_times() ? header.n : 0);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto fields = split(line, '\t');
      if (fields.size() != 3 + header.n) {
        throw ParseError(0, "expected " + std::to_string(3 + header.n) + " fields, got " +
                                std::to_string(fields.size()));
      }
      const auto source = parse_int(fields[1]);
      const Time t0 = parse_int(fields[2]);
      for (std::size_t i = 0; i < header.n; ++i) {
        const auto parts = split(fields[3 + i], '|');
        if (parts.size() != 3) throw ParseError(0, "node field must be 't_true|t_noisy|I'");
        if (parts[2] != "0" && parts[2] != "1") throw ParseError(0, "infection flag must be 0 or 1");
        infected[i] = parts[2] == "1";
        if (obs.has_times()) {
          const auto t = parts[time_col];
          if (t == "-") throw ParseError(0, "time column required by the setting is empty");
          times[i] = parse_time(t);
          if ((times[i] != kNever) != infected[i]) {
            throw ParseError(0, "node " + std::to_string(i) + ": time and infection flag disagree");
          }
        }
      }
      obs.append(static_cast<NodeId>(source), t0, infected, times);
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(line_no, e.what());
    }
  }
  if (obs.size() != header.m) {
    throw ParseError(line_no, "header declares M=" + std::to_string(header.m) + " but file has " +
                                  std::to_string(obs.size()) + " cascades");
  }
  return obs;
}

ObservationSet read_cascades(const std::filesystem::path& path, ObservationMode mode) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cascade file '" + path.string() + "'");
  return read_cascades(in, mode);
}

ObservationMode cascade_file_mode(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cascade file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty cascade file");
  const auto header = parse_header(line);
  return header.mode == "full" ? ObservationMode::limited_noise : parse_observation_mode(header.mode);
}

}  // namespace cascade_infer
