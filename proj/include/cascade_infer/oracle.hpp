#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cascade_infer/cascade.hpp"
#include "cascade_infer/graph.hpp"
#include "cascade_infer/matrix.hpp"
#include "cascade_infer/noise.hpp"

namespace cascade_infer {

struct Outcome {
  double prob = 0.0;
  NodeId source = 0;
  std::uint64_t status = 0;  // bit i set when node i was infected
  std::vector<Time> times;   // true times, kNever when not infected
};

/// Every possible cascade on a small graph with its probability.
class OutcomeDistribution {
 public:
  OutcomeDistribution(WeightedDigraph g, Time t0, std::vector<Outcome> outcomes)
      : graph_(std::move(g)), t0_(t0), outcomes_(std::move(outcomes)) {}

  const WeightedDigraph& graph() const noexcept { return graph_; }
  Time t0() const noexcept { return t0_; }
  std::span<const Outcome> outcomes() const noexcept { return outcomes_; }
  double total_mass() const;

 private:
  WeightedDigraph graph_;
  Time t0_;
  std::vector<Outcome> outcomes_;
};

inline constexpr std::size_t kDefaultOracleCap = 7;

/// Enumerates sources (probability 1/n each) and, step by step, every subset
/// of newly infected targets. ResourceError when n exceeds `node_cap`.
OutcomeDistribution enumerate(const WeightedDigraph& g, Time t0 = 1, std::size_t node_cap = kDefaultOracleCap);

/// Population values of every estimator under a noise law given by its s_k
/// table. Order-dependent limits weight each outcome by s_{T_i - T_j + 1}.
class ExactLimits {
 public:
  /// ParameterError when `sk` cannot answer a needed k.
  ExactLimits(const OutcomeDistribution& dist, const SkTable& sk);

  std::size_t node_count() const noexcept { return n_; }

  double h_pair(NodeId i, NodeId j) const;
  double f_lt(NodeId i, NodeId j) const;
  double g_excl(NodeId i, NodeId j) const;
  double h2(NodeId i, NodeId j) const;
  double f2_lt(NodeId i, NodeId j) const;
  double e1(NodeId i) const;
  double v(NodeId i, NodeId j) const;
  double h_set(NodeId i, std::span<const NodeId> set) const;
  /// Probability that the cascade has at least three infected nodes.
  double large_mass() const noexcept { return large_; }

 private:
  void check_pair(NodeId i, NodeId j) const;

  std::size_t n_;
  SquareMatrix<double> h_, f_, g_, h2_, f2_;
  std::vector<double> e1_;
  double large_ = 0.0;
  std::vector<std::pair<std::uint64_t, double>> status_mass_;
};

/// Probability that i is infected strictly before every other node of the
/// tree path from i to j. Never-infected nodes count as infinitely late.
/// ParameterError unless the graph's skeleton is a tree and i != j.
double path_prob(const OutcomeDistribution& dist, NodeId i, NodeId j);

/// CSV "quantity,i,j,value" for h_pair, f_lt, g_excl, h2, f2_lt, v over
/// ordered pairs, e1 per node (j empty), and path_prob when the graph is a tree.
void write_limits_csv(const OutcomeDistribution& dist, const ExactLimits& lim, std::ostream& out);

}  // namespace cascade_infer
