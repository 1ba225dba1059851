#include "cascade_infer/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cascade_infer/errors.hpp"
#include "cascade_infer/estimators.hpp"
#include "cascade_infer/noise.hpp"
#include "cascade_infer/parallel.hpp"
#include "cascade_infer/rng.hpp"
#include "cascade_infer/sample_size.hpp"
#include "cascade_infer/structure.hpp"
#include "cascade_infer/text.hpp"
#include "cascade_infer/weights.hpp"

namespace cascade_infer {

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::tree: return "tree";
    case Algorithm::bounded: return "bounded";
    case Algorithm::tree_weights: return "tree-weights";
    case Algorithm::pairwise_weights: return "pairwise-weights";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  for (auto a : {Algorithm::tree, Algorithm::bounded, Algorithm::tree_weights, Algorithm::pairwise_weights}) {
    if (text == to_string(a)) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(text) +
                    "' (expected tree, bounded, tree-weights or pairwise-weights)");
}

bool learns_weights(Algorithm algo) {
  return algo == Algorithm::tree_weights || algo == Algorithm::pairwise_weights;
}

namespace {

enum class GraphKind { tree, bounded, file };

struct GraphSpec {
  GraphKind kind = GraphKind::tree;
  std::size_t n = 0;
  std::size_t d = 0;
  double density = 1.0;
  std::string path;
};

GraphSpec parse_graph_spec(std::string_view text) {
  GraphSpec spec;
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("graph spec '" + std::string(text) + "' lacks a kind prefix");
  const auto kind = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  if (kind == "file") {
    if (rest.empty()) throw ConfigError("graph file path is empty");
    spec.kind = GraphKind::file;
    spec.path = std::string(rest);
    return spec;
  }
  if (kind == "tree") {
    spec.kind = GraphKind::tree;
  } else if (kind == "bounded") {
    spec.kind = GraphKind::bounded;
  } else {
    throw ConfigError("unknown graph kind '" + std::string(kind) + "'");
  }
  try {
    for (auto item : split(rest, ',')) {
      item = trim(item);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw ConfigError("graph parameter '" + std::string(item) + "' lacks '='");
      const auto key = item.substr(0, eq);
      const auto value = item.substr(eq + 1);
      if (key == "n") {
        spec.n = parse_uint(value);
      } else if (key == "d" && spec.kind == GraphKind::bounded) {
        spec.d = parse_uint(value);
      } else if (key == "density" && spec.kind == GraphKind::bounded) {
        spec.density = parse_double(value);
      } else {
        throw ConfigError("unknown graph parameter '" + std::string(key) + "'");
      }
    }
  } catch (const ParseError& e) {
    throw ConfigError(std::string("graph spec: ") + e.what());
  }
  if (spec.n < 1) throw ConfigError("graph spec needs n >= 1");
  if (spec.kind == GraphKind::bounded) {
    if (spec.d < 1 || spec.d >= spec.n) throw ConfigError("bounded graph spec needs 1 <= d <= n-1");
    if (!(spec.density >= 0.0 && spec.density <= 1.0)) throw ConfigError("density must lie in [0, 1]");
  }
  return spec;
}

std::size_t spec_node_count(const GraphSpec& spec) {
  if (spec.kind == GraphKind::file) return read_edge_list(spec.path).node_count();
  return spec.n;
}

std::size_t resolved_degree(const ExperimentConfig& cfg, const GraphSpec& spec) {
  if (cfg.degree != 0) return cfg.degree;
  if (spec.kind == GraphKind::bounded) return spec.d;
  throw ConfigError("bounded algorithm needs degree= unless the graph spec sets d");
}

SkTable effective_sk(const ExperimentConfig& cfg) {
  if (cfg.mode == ObservationMode::no_noise) return s_table(NoiseModel::from_pmf({{0, 1.0}}));
  return s_table(NoiseModel::parse(cfg.noise));
}

template <class F>
auto as_config_error(std::string_view key, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("bad value for '" + std::string(key) + "': " + e.what());
  }
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  const auto key = trim(assignment.substr(0, eq));
  const auto value = trim(assignment.substr(eq + 1));
  const auto u = [&] { return as_config_error(key, [&] { return parse_uint(value); }); };
  const auto f = [&] { return as_config_error(key, [&] { return parse_double(value); }); };
  if (key == "graph") {
    cfg.graph = std::string(value);
  } else if (key == "p_min") {
    cfg.p_min = f();
  } else if (key == "p_max") {
    cfg.p_max = f();
  } else if (key == "noise") {
    cfg.noise = std::string(value);
  } else if (key == "mode") {
    cfg.mode = as_config_error(key, [&] { return parse_observation_mode(value); });
  } else if (key == "cascades") {
    if (value == "auto") {
      cfg.cascades.reset();
    } else {
      cfg.cascades = u();
    }
  } else if (key == "algo") {
    cfg.algo = parse_algorithm(value);
  } else if (key == "degree") {
    cfg.degree = u();
  } else if (key == "trials") {
    cfg.trials = u();
  } else if (key == "seed") {
    cfg.seed = u();
  } else if (key == "delta") {
    cfg.delta = f();
  } else if (key == "eps") {
    cfg.eps = f();
  } else if (key == "t0") {
    cfg.t0 = as_config_error(key, [&] { return parse_int(value); });
  } else if (key == "max_cascades") {
    cfg.max_cascades = u();
  } else if (key == "output") {
    cfg.output = std::string(value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    try {
      apply_setting(cfg, view);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse_config(in);
}

void dump_config(const ExperimentConfig& cfg, std::ostream& out) {
  out << "graph=" << cfg.graph << '\n'
      << "p_min=" << format_double(cfg.p_min) << '\n'
      << "p_max=" << format_double(cfg.p_max) << '\n'
      << "noise=" << cfg.noise << '\n'
      << "mode=" << to_string(cfg.mode) << '\n'
      << "cascades=" << (cfg.cascades ? std::to_string(*cfg.cascades) : std::string("auto")) << '\n'
      << "algo=" << to_string(cfg.algo) << '\n'
      << "degree=" << cfg.degree << '\n'
      << "trials=" << cfg.trials << '\n'
      << "seed=" << cfg.seed << '\n'
      << "delta=" << format_double(cfg.delta) << '\n'
      << "eps=" << format_double(cfg.eps) << '\n'
      << "t0=" << cfg.t0 << '\n'
      << "max_cascades=" << cfg.max_cascades << '\n'
      << "output=" << cfg.output << '\n';
}

void validate_config(const ExperimentConfig& cfg) {
  const GraphSpec spec = parse_graph_spec(cfg.graph);
  if (!(WeightBounds{cfg.p_min, cfg.p_max}.valid())) {
    throw ConfigError("weight bounds must satisfy 0 < p_min <= p_max < 1");
  }
  as_config_error("noise", [&] { return NoiseModel::parse(cfg.noise); });
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.t0 < 1) throw ConfigError("t0 must be at least 1");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(cfg.eps > 0.0)) throw ConfigError("eps must be positive");
  if (cfg.cascades && *cfg.cascades == 0) throw ConfigError("cascades must be at least 1");
  if (learns_weights(cfg.algo) && cfg.mode == ObservationMode::extreme_noise) {
    throw ConfigError("weight learning needs infection times; mode extreme_noise only exposes infection status");
  }
  const std::size_t n = spec_node_count(spec);
  if (cfg.algo == Algorithm::bounded) {
    const std::size_t d = resolved_degree(cfg, spec);
    if (d < 1 || d >= n) throw ConfigError("degree must satisfy 1 <= d <= n-1");
  }
  if (learns_weights(cfg.algo)) {
    const SkTable sk = as_config_error("noise", [&] { return effective_sk(cfg); });
    if (!(sk.s0() > sk.s2())) throw ConfigError("noise law has s0 <= s2; weights are not identifiable");
  }
}

WeightedDigraph experiment_graph(const ExperimentConfig& cfg, std::size_t trial) {
  const GraphSpec spec = parse_graph_spec(cfg.graph);
  const WeightBounds bounds{cfg.p_min, cfg.p_max};
  const std::uint64_t graph_seed = derive_seed(derive_seed(cfg.seed, trial), 0);
  switch (spec.kind) {
    case GraphKind::tree: return random_tree(spec.n, bounds, graph_seed);
    case GraphKind::bounded: return random_bounded_degree(spec.n, spec.d, spec.density, bounds, graph_seed);
    case GraphKind::file: return read_edge_list(spec.path);
  }
  throw ConfigError("unreachable graph kind");
}

CascadeBudget cascade_budget(const ExperimentConfig& cfg) {
  if (cfg.cascades) return {*cfg.cascades, "fixed"};
  const GraphSpec spec = parse_graph_spec(cfg.graph);
  const std::size_t n = spec_node_count(spec);
  CascadeBudget b;
  switch (cfg.algo) {
    case Algorithm::tree:
      b = {m_tree_structure(n, cfg.delta, cfg.p_min, cfg.p_max), "m_tree_structure"};
      break;
    case Algorithm::bounded:
      b = {m_bounded_structure(n, resolved_degree(cfg, spec), cfg.delta, cfg.p_min, cfg.p_max),
           "m_bounded_structure"};
      break;
    case Algorithm::tree_weights: {
      const SkTable sk = effective_sk(cfg);
      b = {m_tree_weights(n, cfg.eps, cfg.delta, sk.s0(), sk.s2(), cfg.p_max), "m_tree_weights"};
      break;
    }
    case Algorithm::pairwise_weights: {
      const SkTable sk = effective_sk(cfg);
      const std::size_t d = cfg.degree != 0 ? cfg.degree : (spec.kind == GraphKind::bounded ? spec.d : n - 1);
      const auto m = m_bounded_weights(n, std::max<std::size_t>(d, 1), cfg.eps, cfg.delta, cfg.p_min, cfg.p_max,
                                       sk.s0(), sk.s2());
      if (!m) throw ConfigError("no sample-size bound applies for pairwise weights when s2 = 0; set cascades=");
      b = {*m, "m_bounded_weights"};
      break;
    }
  }
  if (b.count > cfg.max_cascades) {
    throw ConfigError("auto cascade count " + std::to_string(b.count) + " from " + b.source +
                      " exceeds max_cascades=" + std::to_string(cfg.max_cascades));
  }
  return b;
}

namespace {

void score_structure(const UndirectedEdgeSet& learned, const UndirectedEdgeSet& truth, TrialMetrics& m) {
  std::size_t hits = 0;
  for (const auto& [a, b] : learned) hits += truth.contains(a, b) ? 1 : 0;
  m.exact = learned == truth;
  m.precision = learned.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(learned.size());
  m.recall = truth.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
}

void score_weights(const WeightEstimate& est, const WeightedDigraph& g, TrialMetrics& m) {
  const std::size_t n = g.node_count();
  double worst = 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double err = std::abs(est.p_hat(i, j) - g.weight(static_cast<NodeId>(i), static_cast<NodeId>(j)));
      worst = std::max(worst, err);
      sum += err;
      ++pairs;
      if (est.flags(i, j) != kWeightOk) ++m.flagged;
    }
  }
  m.max_error = worst;
  m.mean_error = pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

TrialMetrics run_trial(const ExperimentConfig& cfg, const NoiseModel& noise, const SkTable& sk,
                       std::uint64_t cascades, std::size_t trial, std::size_t threads) {
  const auto start = std::chrono::steady_clock::now();
  TrialMetrics m;
  m.trial = trial;
  m.seed = derive_seed(cfg.seed, trial);
  m.cascades = cascades;
  const WeightedDigraph g = experiment_graph(cfg, trial);
  const EstimatorBank bank =
      accumulate_simulated(g, noise, cascades, cfg.t0, derive_seed(m.seed, 1), cfg.mode, threads);
  const UndirectedEdgeSet truth = g.skeleton();
  std::ostringstream learned;
  switch (cfg.algo) {
    case Algorithm::tree: {
      const auto res = learn_tree_from(bank);
      score_structure(res.edges, truth, m);
      write_undirected_edges(res.edges, g.node_count(), learned);
      break;
    }
    case Algorithm::bounded: {
      const GraphSpec spec = parse_graph_spec(cfg.graph);
      const auto res = learn_bounded_degree(bank, resolved_degree(cfg, spec));
      score_structure(res.edges, truth, m);
      m.ambiguities = res.ambiguities.size();
      write_undirected_edges(res.edges, g.node_count(), learned);
      std::ostringstream log;
      write_ambiguity_log(res, log);
      m.ambiguity_log = log.str();
      break;
    }
    case Algorithm::tree_weights: {
      const auto res = learn_tree_from(bank);
      score_structure(res.edges, truth, m);
      const auto est = tree_weights(bank, res.edges, sk);
      score_weights(est, g, m);
      format_edge_list(est.to_graph(g.bounds()), learned);
      break;
    }
    case Algorithm::pairwise_weights: {
      const auto est = pairwise_weights(bank, sk);
      score_weights(est, g, m);
      format_edge_list(est.to_graph(g.bounds()), learned);
      break;
    }
  }
  m.learned = learned.str();
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t threads) {
  validate_config(cfg);
  ExperimentResult result;
  result.budget = cascade_budget(cfg);
  const NoiseModel noise = NoiseModel::parse(cfg.noise);
  const SkTable sk = effective_sk(cfg);
  const std::size_t total = threads == 0 ? default_thread_count() : threads;
  const std::size_t outer = std::min(total, cfg.trials);
  const std::size_t inner = std::max<std::size_t>(1, total / outer);
  result.trials.resize(cfg.trials);
  parallel_chunks(cfg.trials, outer, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      result.trials[k] = run_trial(cfg, noise, sk, result.budget.count, k, inner);
    }
  });
  return result;
}

void write_metrics(const ExperimentConfig& cfg, const ExperimentResult& result, std::ostream& out) {
  out << "#schema=1\n"
      << "#algo=" << to_string(cfg.algo) << '\n'
      << "#mode=" << to_string(cfg.mode) << '\n'
      << "#cascades=" << result.budget.count << '\n'
      << "#cascades_source=" << result.budget.source << '\n'
      << "trial,seed,cascades,exact,precision,recall,max_error,mean_error,ambiguities,flagged\n";
  std::size_t exact_count = 0;
  std::size_t exact_seen = 0;
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  double mean_err_sum = 0.0;
  std::vector<double> max_errs;
  std::size_t ambiguities = 0;
  std::size_t flagged = 0;
  for (const auto& m : result.trials) {
    out << m.trial << ',' << m.seed << ',' << m.cascades << ',' << (m.exact ? (*m.exact ? "1" : "0") : "") << ','
        << opt(m.precision) << ',' << opt(m.recall) << ',' << opt(m.max_error) << ',' << opt(m.mean_error) << ','
        << m.ambiguities << ',' << m.flagged << '\n';
    if (m.exact) {
      ++exact_seen;
      exact_count += *m.exact ? 1 : 0;
      precision_sum += *m.precision;
      recall_sum += *m.recall;
    }
    if (m.max_error) {
      max_errs.push_back(*m.max_error);
      mean_err_sum += *m.mean_error;
    }
    ambiguities += m.ambiguities;
    flagged += m.flagged;
  }
  const auto ratio = [](double num, std::size_t den) { return den == 0 ? std::optional<double>{} : num / static_cast<double>(den); };
  std::optional<double> median;
  if (!max_errs.empty()) {
    std::sort(max_errs.begin(), max_errs.end());
    const std::size_t h = max_errs.size() / 2;
    median = max_errs.size() % 2 == 1 ? max_errs[h] : 0.5 * (max_errs[h - 1] + max_errs[h]);
  }
  out << "summary,," << result.budget.count << ',' << opt(ratio(static_cast<double>(exact_count), exact_seen)) << ','
      << opt(ratio(precision_sum, exact_seen)) << ',' << opt(ratio(recall_sum, exact_seen)) << ',' << opt(median)
      << ',' << opt(ratio(mean_err_sum, max_errs.size())) << ',' << ambiguities << ',' << flagged << '\n';
}

void write_experiment(const ExperimentConfig& cfg, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto open = [&](const fs::path& name) {
    std::ofstream f(dir / name);
    if (!f) throw IoError("cannot write '" + (dir / name).string() + "'");
    return f;
  };
  {
    auto f = open("metrics.csv");
    write_metrics(cfg, result, f);
  }
  {
    auto f = open("effective.cfg");
    dump_config(cfg, f);
  }
  for (const auto& m : result.trials) {
    auto f = open("trial_" + std::to_string(m.trial) + ".edges");
    f << m.learned;
    if (cfg.algo == Algorithm::bounded) {
      auto a = open("trial_" + std::to_string(m.trial) + ".ambiguities.jsonl");
      a << m.ambiguity_log;
    }
  }
  auto t = open("timing.log");
  double total = 0.0;
  for (const auto& m : result.trials) {
    t << "trial " << m.trial << ' ' << m.seconds << "s\n";
    total += m.seconds;
  }
  t << "total " << total << "s\n";
}

}  // namespace cascade_infer
