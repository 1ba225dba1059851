#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "cascade_infer/cascade.hpp"
#include "cascade_infer/graph.hpp"
#include "cascade_infer/matrix.hpp"
#include "cascade_infer/noise.hpp"

namespace cascade_infer {

/// Anything that answers the status-only co-infection queries. Implemented
/// by EstimatorBank (empirical fractions) and ExactLimits (population values).
template <class T>
concept StatusEstimates = requires(const T& t, NodeId i, NodeId j, std::span<const NodeId> set) {
  { t.node_count() } -> std::convertible_to<std::size_t>;
  { t.h_pair(i, j) } -> std::convertible_to<double>;
  { t.h_set(i, set) } -> std::convertible_to<double>;
};

/// Adds the time-ordered and small-cascade queries used by the weight solvers.
template <class T>
concept TimedEstimates = StatusEstimates<T> && requires(const T& t, NodeId i, NodeId j) {
  { t.f_lt(i, j) } -> std::convertible_to<double>;
  { t.g_excl(i, j) } -> std::convertible_to<double>;
  { t.h2(i, j) } -> std::convertible_to<double>;
  { t.f2_lt(i, j) } -> std::convertible_to<double>;
  { t.e1(i) } -> std::convertible_to<double>;
};

/// Exact counters over M cascades for every estimator family:
///
///   coinfect(i,j)     both infected
///   order_lt(i,j)     both infected and t'_i < t'_j (ties count in neither direction)
///   excl(i,j)         i infected, j not
///   only_pair(i,j)    the infected set is exactly {i, j}
///   only_pair_lt(i,j) the infected set is exactly {i, j} and t'_i < t'_j
///   only_single(i)    the infected set is exactly {i}
///
/// Infection patterns are kept as a histogram of packed bitsets for set
/// queries. Banks form a commutative monoid under merge().
class EstimatorBank {
 public:
  using PatternHistogram = std::map<std::vector<std::uint64_t>, std::uint64_t>;

  EstimatorBank(std::size_t node_count, bool has_times);

  /// One cascade: packed status bits and, when the bank has times, the
  /// observed time of every node.
  void add(std::span<const std::uint64_t> status, std::span<const Time> times);
  void merge(const EstimatorBank& other);

  std::size_t node_count() const noexcept { return n_; }
  std::uint64_t cascade_count() const noexcept { return m_; }
  bool has_times() const noexcept { return has_times_; }

  std::uint64_t infected_count(NodeId i) const;
  std::uint64_t coinfect_count(NodeId i, NodeId j) const;
  std::uint64_t order_lt_count(NodeId i, NodeId j) const;
  std::uint64_t excl_count(NodeId i, NodeId j) const;
  std::uint64_t only_pair_count(NodeId i, NodeId j) const;
  std::uint64_t only_pair_lt_count(NodeId i, NodeId j) const;
  std::uint64_t only_single_count(NodeId i) const;
  /// Cascades with i infected and at least one node of `set` infected.
  std::uint64_t h_set_count(NodeId i, std::span<const NodeId> set) const;

  // Fractions of the M cascades. Pair queries reject i == j (ParameterError);
  // ordered queries on a bank without times throw AccessError.
  double h_pair(NodeId i, NodeId j) const;
  double f_lt(NodeId i, NodeId j) const;
  double g_excl(NodeId i, NodeId j) const;
  double h2(NodeId i, NodeId j) const;
  double f2_lt(NodeId i, NodeId j) const;
  double e1(NodeId i) const;
  double h_set(NodeId i, std::span<const NodeId> set) const;

  const PatternHistogram& status_patterns() const noexcept { return patterns_; }

  /// Compares counters and pattern histograms.
  bool operator==(const EstimatorBank& other) const;

 private:
  void check_node(NodeId i) const;
  void check_pair(NodeId i, NodeId j) const;
  void check_times() const;
  double fraction(std::uint64_t count) const;

  std::size_t n_;
  bool has_times_;
  std::uint64_t m_ = 0;
  std::vector<std::uint64_t> infected_;
  SquareMatrix<std::uint64_t> coinfect_;
  SquareMatrix<std::uint64_t> order_lt_;
  SquareMatrix<std::uint64_t> only_pair_;
  SquareMatrix<std::uint64_t> only_pair_lt_;
  std::vector<std::uint64_t> only_single_;
  PatternHistogram patterns_;
  std::vector<NodeId> scratch_;
};

/// Single pass over an observation set. Extreme-noise input yields a bank
/// without times.
EstimatorBank accumulate(const ObservationSet& obs);

/// Simulates and accumulates without materializing the cascades. Produces
/// the same bank as accumulate(restrict_observation(simulate_batch(...), mode)).
EstimatorBank accumulate_simulated(const WeightedDigraph& g, const NoiseModel& noise, std::size_t count,
                                   Time t0, std::uint64_t seed, ObservationMode mode,
                                   std::size_t threads = 0);

/// Debug dump: "# M=.. n=.. times=.." then "counter,i,j,count" rows with
/// exact integers (j empty for per-node counters, zero rows omitted).
void write_bank_csv(const EstimatorBank& bank, std::ostream& out);

/// Symmetric matrix of h_pair scores with zero diagonal.
template <StatusEstimates T>
SquareMatrix<double> pairwise_scores(const T& estimates) {
  const std::size_t n = estimates.node_count();
  SquareMatrix<double> h(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = estimates.h_pair(static_cast<NodeId>(i), static_cast<NodeId>(j));
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

}  // namespace cascade_infer
