#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cascade_infer/cascade.hpp"
#include "cascade_infer/graph.hpp"

namespace cascade_infer {

enum class Algorithm { tree, bounded, tree_weights, pairwise_weights };

std::string_view to_string(Algorithm algo);
/// "tree", "bounded", "tree-weights", "pairwise-weights".
Algorithm parse_algorithm(std::string_view text);
bool learns_weights(Algorithm algo);

/// Flat key=value experiment description. Graph specs:
///   tree:n=<n>
///   bounded:n=<n>,d=<d>[,density=<p>]
///   file:<path>
/// Generated graphs are redrawn per trial; a file graph is shared.
struct ExperimentConfig {
  std::string graph = "tree:n=10";
  double p_min = 0.2;
  double p_max = 0.8;
  std::string noise = "geometric:q=0.5";
  ObservationMode mode = ObservationMode::extreme_noise;
  std::optional<std::uint64_t> cascades;  // nullopt = auto
  Algorithm algo = Algorithm::tree;
  std::size_t degree = 0;  // 0 = take d from the graph spec
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  double delta = 0.1;
  double eps = 0.1;
  Time t0 = 1;
  std::uint64_t max_cascades = 100'000'000;
  std::string output = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Applies one "key=value" assignment. ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, std::string_view assignment);
/// Reads assignments line by line; '#' starts a comment.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig read_config(const std::filesystem::path& path);
/// Every key, one per line, in a form parse_config reads back.
void dump_config(const ExperimentConfig& cfg, std::ostream& out);

/// Rejects inconsistent settings (ConfigError) before any work is done.
void validate_config(const ExperimentConfig& cfg);

/// Graph of trial `trial` (file graphs ignore the trial).
WeightedDigraph experiment_graph(const ExperimentConfig& cfg, std::size_t trial);

struct CascadeBudget {
  std::uint64_t count = 0;
  std::string source;  // "fixed" or the formula name
};

CascadeBudget cascade_budget(const ExperimentConfig& cfg);

struct TrialMetrics {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t cascades = 0;
  std::optional<bool> exact;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> max_error;
  std::optional<double> mean_error;
  std::size_t ambiguities = 0;
  std::size_t flagged = 0;
  double seconds = 0.0;
  std::string learned;        // learned graph, edge-list text
  std::string ambiguity_log;  // JSON lines, bounded-degree mode
};

struct ExperimentResult {
  CascadeBudget budget;
  std::vector<TrialMetrics> trials;
};

/// Runs every trial. Trial k uses seed derive_seed(cfg.seed, k); results do
/// not depend on `threads` (0 = default_thread_count()).
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t threads = 0);

/// Metrics CSV: "#schema=1" and "#cascades=..." comments, a header, one row
/// per trial in trial order, then a "summary" row.
void write_metrics(const ExperimentConfig& cfg, const ExperimentResult& result, std::ostream& out);

/// Writes metrics.csv, effective.cfg, trial_<k>.edges (and the ambiguity log
/// for bounded-degree runs) into cfg.output; wall times go to timing.log.
void write_experiment(const ExperimentConfig& cfg, const ExperimentResult& result);

}  // namespace cascade_infer
