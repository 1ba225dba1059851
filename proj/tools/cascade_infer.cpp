// cascade-infer: simulate cascades, learn structure and weights, and run
// sized experiments from the command line.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cascade_infer/cascade.hpp"
#include "cascade_infer/errors.hpp"
#include "cascade_infer/estimators.hpp"
#include "cascade_infer/experiment.hpp"
#include "cascade_infer/graph.hpp"
#include "cascade_infer/noise.hpp"
#include "cascade_infer/oracle.hpp"
#include "cascade_infer/sample_size.hpp"
#include "cascade_infer/structure.hpp"
#include "cascade_infer/weights.hpp"

namespace ci = cascade_infer;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

/// Output sink: a file when a path is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ci::IoError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void close() {
    if (file_) {
      file_->close();
      if (!*file_) throw ci::IoError("error while writing output");
    }
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

ci::WeightedDigraph load_valid_graph(const std::string& path) {
  ci::WeightedDigraph g = ci::read_edge_list(path);
  const auto problems = ci::validate(g);
  if (!problems.empty()) {
    std::string msg = "graph '" + path + "' is invalid:";
    for (const auto& v : problems) {
      msg += "\n  ";
      if (v.from >= 0) msg += "edge (" + std::to_string(v.from) + "," + std::to_string(v.to) + "): ";
      msg += v.rule;
    }
    throw ci::ValidationError(msg);
  }
  return g;
}

ci::SkTable weight_table(ci::ObservationMode mode, const std::string& noise) {
  if (mode == ci::ObservationMode::no_noise) return ci::s_table(ci::NoiseModel::from_pmf({{0, 1.0}}));
  return ci::s_table(ci::NoiseModel::parse(noise));
}

struct SimulateArgs {
  std::string graph, noise = "geometric:q=0.5", mode = "full", out;
  std::uint64_t cascades = 1000, seed = 1;
  std::int64_t t0 = 1;
};

int run_simulate(const SimulateArgs& a) {
  const auto g = load_valid_graph(a.graph);
  const auto noise = ci::NoiseModel::parse(a.noise);
  std::optional<ci::ObservationMode> mode;
  if (a.mode != "full") mode = ci::parse_observation_mode(a.mode);
  const auto cs = ci::simulate_batch(g, noise, a.cascades, a.t0, a.seed);
  Sink sink(a.out);
  ci::write_cascades(cs, mode, sink.stream());
  sink.close();
  return kExitOk;
}

struct StructureArgs {
  std::string cascades, mode = "extreme", algo = "tree", out, ambiguities;
  std::size_t degree = 0;
};

int run_learn_structure(const StructureArgs& a) {
  const auto obs = ci::read_cascades(std::filesystem::path(a.cascades), ci::parse_observation_mode(a.mode));
  const auto bank = ci::accumulate(obs);
  ci::StructureResult res;
  if (a.algo == "tree") {
    res = ci::learn_tree_from(bank);
  } else if (a.algo == "bounded") {
    if (a.degree == 0) throw ci::ParameterError("--degree is required with --algo bounded");
    res = ci::learn_bounded_degree(bank, a.degree);
  } else {
    throw ci::ParameterError("unknown structure algorithm '" + a.algo + "' (expected tree or bounded)");
  }
  Sink sink(a.out);
  ci::write_undirected_edges(res.edges, bank.node_count(), sink.stream());
  sink.close();
  if (!a.ambiguities.empty()) {
    Sink log(a.ambiguities);
    ci::write_ambiguity_log(res, log.stream());
    log.close();
  }
  if (res.incomplete) std::cerr << "warning: fewer than n-1 pairs were ever co-infected; structure is incomplete\n";
  return kExitOk;
}

struct WeightArgs {
  std::string cascades, mode = "limited", algo = "pairwise", noise = "geometric:q=0.5", edges, out, flags;
  double p_min = 0.2, p_max = 0.8;
};

int run_learn_weights(const WeightArgs& a) {
  const auto mode = ci::parse_observation_mode(a.mode);
  if (mode == ci::ObservationMode::extreme_noise) {
    throw ci::ParameterError("weight learning needs infection times; extreme mode only exposes infection status");
  }
  const auto obs = ci::read_cascades(std::filesystem::path(a.cascades), mode);
  const auto bank = ci::accumulate(obs);
  const auto sk = weight_table(mode, a.noise);
  std::optional<ci::WeightEstimate> est;
  if (a.algo == "tree") {
    ci::UndirectedEdgeSet edges;
    if (a.edges.empty()) {
      edges = ci::learn_tree_from(bank).edges;
    } else {
      edges = ci::read_undirected_edges(a.edges);
    }
    est = ci::tree_weights(bank, edges, sk);
  } else if (a.algo == "pairwise") {
    est = ci::pairwise_weights(bank, sk);
  } else {
    throw ci::ParameterError("unknown weight algorithm '" + a.algo + "' (expected tree or pairwise)");
  }
  Sink sink(a.out);
  ci::format_edge_list(est->to_graph({a.p_min, a.p_max}), sink.stream());
  sink.close();
  if (!a.flags.empty()) {
    Sink f(a.flags);
    ci::write_weight_flags(*est, f.stream());
    f.close();
  }
  return kExitOk;
}

struct OracleArgs {
  std::string graph, noise = "geometric:q=0.5", out;
  std::int64_t t0 = 1;
  std::size_t cap = ci::kDefaultOracleCap;
};

int run_oracle(const OracleArgs& a) {
  const auto g = load_valid_graph(a.graph);
  const auto dist = ci::enumerate(g, a.t0, a.cap);
  const ci::ExactLimits lim(dist, ci::s_table(ci::NoiseModel::parse(a.noise)));
  Sink sink(a.out);
  ci::write_limits_csv(dist, lim, sink.stream());
  sink.close();
  return kExitOk;
}

struct SampleArgs {
  ci::ComplexityInputs in;
  std::string noise = "geometric:q=0.5";
};

int run_sample_size(const SampleArgs& a) {
  ci::ComplexityInputs in = a.in;
  const auto sk = ci::s_table(ci::NoiseModel::parse(a.noise));
  in.s0 = sk.s0();
  in.s2 = sk.s2();
  const auto sizes = ci::all_sample_sizes(in);
  std::cout << "m_tree_structure=" << sizes.tree_structure << '\n'
            << "m_bounded_structure=" << sizes.bounded_structure << '\n'
            << "m_tree_weights=" << sizes.tree_weights << '\n'
            << "m_bounded_weights="
            << (sizes.bounded_weights ? std::to_string(*sizes.bounded_weights) : std::string("not_applicable"))
            << '\n';
  return kExitOk;
}

struct ExperimentArgs {
  std::string config, output;
  std::vector<std::string> settings;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  ci::ExperimentConfig cfg;
  if (!a.config.empty()) cfg = ci::read_config(a.config);
  for (const auto& s : a.settings) ci::apply_setting(cfg, s);
  if (!a.output.empty()) cfg.output = a.output;
  const auto result = ci::run_experiment(cfg);
  ci::write_experiment(cfg, result);
  ci::write_metrics(cfg, result, std::cout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate noisy diffusion cascades and learn graph structure and edge weights."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cascade-infer 0.1.0");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate cascades on a graph and write a cascade file");
  c_sim->add_option("--graph", sim.graph, "Edge-list file")->required();
  c_sim->add_option("--noise", sim.noise, "Noise law, e.g. geometric:q=0.5 or pmf:0=0.5,1=0.5");
  c_sim->add_option("--cascades", sim.cascades, "Number of cascades");
  c_sim->add_option("--seed", sim.seed, "Random seed");
  c_sim->add_option("--t0", sim.t0, "Start time of every cascade");
  c_sim->add_option("--mode", sim.mode, "Columns to write: full, no_noise, limited or extreme");
  c_sim->add_option("--out", sim.out, "Output file (default stdout)");

  StructureArgs st;
  auto* c_st = app.add_subcommand("learn-structure", "Learn the undirected structure from a cascade file");
  c_st->add_option("--cascades", st.cascades, "Cascade file")->required();
  c_st->add_option("--mode", st.mode, "Observation setting to read as");
  c_st->add_option("--algo", st.algo, "tree or bounded");
  c_st->add_option("--degree", st.degree, "Maximum degree for --algo bounded");
  c_st->add_option("--out", st.out, "Output edge list (default stdout)");
  c_st->add_option("--ambiguities", st.ambiguities, "JSON-lines log of tied choices");

  WeightArgs wt;
  auto* c_wt = app.add_subcommand("learn-weights", "Estimate edge weights from a cascade file");
  c_wt->add_option("--cascades", wt.cascades, "Cascade file")->required();
  c_wt->add_option("--mode", wt.mode, "no_noise or limited");
  c_wt->add_option("--algo", wt.algo, "tree or pairwise");
  c_wt->add_option("--noise", wt.noise, "Noise law the times were observed under");
  c_wt->add_option("--edges", wt.edges, "Known undirected structure for --algo tree");
  c_wt->add_option("--p-min", wt.p_min, "Lower weight bound written to the output header");
  c_wt->add_option("--p-max", wt.p_max, "Upper weight bound written to the output header");
  c_wt->add_option("--out", wt.out, "Output edge list (default stdout)");
  c_wt->add_option("--flags", wt.flags, "CSV of per-pair solver flags");

  OracleArgs orc;
  auto* c_or = app.add_subcommand("oracle", "Exact estimator limits by enumeration on a small graph");
  c_or->add_option("--graph", orc.graph, "Edge-list file")->required();
  c_or->add_option("--noise", orc.noise, "Noise law");
  c_or->add_option("--t0", orc.t0, "Start time");
  c_or->add_option("--cap", orc.cap, "Maximum node count");
  c_or->add_option("--out", orc.out, "Output CSV (default stdout)");

  SampleArgs ss;
  auto* c_ss = app.add_subcommand("sample-size", "Print the sufficient cascade counts");
  c_ss->add_option("--n", ss.in.n, "Node count")->required();
  c_ss->add_option("--d", ss.in.d, "Maximum degree");
  c_ss->add_option("--delta", ss.in.delta, "Failure probability");
  c_ss->add_option("--eps", ss.in.eps, "Weight precision");
  c_ss->add_option("--p-min", ss.in.p_min, "Lower weight bound");
  c_ss->add_option("--p-max", ss.in.p_max, "Upper weight bound");
  c_ss->add_option("--noise", ss.noise, "Noise law");

  ExperimentArgs ex;
  auto* c_ex = app.add_subcommand("experiment", "Run a configured experiment and write metrics");
  c_ex->add_option("--config", ex.config, "key=value config file");
  c_ex->add_option("--set", ex.settings, "Override a config key (key=value), repeatable");
  c_ex->add_option("--output", ex.output, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_st->parsed()) return run_learn_structure(st);
    if (c_wt->parsed()) return run_learn_weights(wt);
    if (c_or->parsed()) return run_oracle(orc);
    if (c_ss->parsed()) return run_sample_size(ss);
    if (c_ex->parsed()) return run_experiment_cmd(ex);
  } catch (const ci::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ci::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
