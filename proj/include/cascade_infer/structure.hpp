#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cascade_infer/errors.hpp"
#include "cascade_infer/estimators.hpp"
#include "cascade_infer/graph.hpp"
#include "cascade_infer/matrix.hpp"

namespace cascade_infer {

/// One step of the tree pass: a candidate pair, its score, and whether it
/// was kept.
struct PairDecision {
  NodeId a;
  NodeId b;
  double score;
  bool kept;
};

/// Best set found for one node by the bounded-degree pass.
struct NodeChoice {
  NodeId node;
  std::vector<NodeId> best_set;
  double value = 0.0;
  std::size_t sets_evaluated = 0;
};

/// A node whose maximizing set was not unique at the minimal size. `sets`
/// lists every tying set in enumeration order; the first one was chosen.
struct Ambiguity {
  NodeId node;
  std::vector<std::vector<NodeId>> sets;
  double value = 0.0;
};

struct StructureResult {
  UndirectedEdgeSet edges;
  std::vector<Ambiguity> ambiguities;
  std::vector<PairDecision> pair_trace;
  std::vector<NodeChoice> node_choices;
  /// Tree mode: fewer than n-1 edges could be placed.
  bool incomplete = false;
  /// Bounded-degree mode: nodes with no co-infection at all.
  std::vector<NodeId> isolated;
  /// Bounded-degree mode: edges found from one endpoint only.
  std::size_t disagreements = 0;
};

/// Greedy maximum spanning forest over the score matrix: pairs sorted by
/// score descending, then lexicographically, each kept unless it closes a
/// cycle. Zero-score pairs are never kept. `h` must be symmetric with values
/// in [0, 1] and a zero diagonal (ParameterError otherwise).
StructureResult learn_tree(const SquareMatrix<double>& h);

template <StatusEstimates T>
StructureResult learn_tree_from(const T& estimates) {
  return learn_tree(pairwise_scores(estimates));
}

namespace detail {

/// Advances `set` to the next size-k subset of {0..n-1} in lexicographic
/// order; false when exhausted.
bool next_combination(std::vector<NodeId>& set, std::size_t n);

void finish_bounded(StructureResult& result, std::size_t n);

}  // namespace detail

/// For each node i, the set S (i not in S, 1 <= |S| <= d) maximizing
/// h_set(i, S); ties broken by smaller size, then lexicographic order. Values
/// within `tie_tol` of each other count as equal. The output is the union
/// over nodes of {i, s} for s in the chosen set. d >= n is a ParameterError.
template <StatusEstimates T>
StructureResult learn_bounded_degree(const T& estimates, std::size_t d, double tie_tol = 0.0) {
  const std::size_t n = estimates.node_count();
  if (d < 1) throw ParameterError("max degree must be at least 1");
  if (d >= n) {
    throw ParameterError("max degree " + std::to_string(d) + " must be below the node count " +
                         std::to_string(n));
  }
  StructureResult result;
  std::vector<NodeId> others;
  std::vector<NodeId> pick;
  std::vector<NodeId> set;
  for (std::size_t node = 0; node < n; ++node) {
    const auto i = static_cast<NodeId>(node);
    others.clear();
    for (std::size_t v = 0; v < n; ++v) {
      if (v != node) others.push_back(static_cast<NodeId>(v));
    }
    NodeChoice choice{i, {}, -1.0, 0};
    std::vector<std::vector<NodeId>> ties;
    for (std::size_t k = 1; k <= d; ++k) {
      pick.resize(k);
      for (std::size_t a = 0; a < k; ++a) pick[a] = static_cast<NodeId>(a);
      do {
        set.resize(k);
        for (std::size_t a = 0; a < k; ++a) set[a] = others[static_cast<std::size_t>(pick[a])];
        const double value = estimates.h_set(i, set);
        ++choice.sets_evaluated;
        if (value > choice.value + tie_tol) {
          choice.value = value;
          choice.best_set = set;
          ties.assign(1, set);
        } else if (std::abs(value - choice.value) <= tie_tol && set.size() == choice.best_set.size()) {
          ties.push_back(set);
        }
      } while (detail::next_combination(pick, others.size()));
    }
    if (choice.value <= tie_tol) {
      choice.best_set.clear();
      choice.value = 0.0;
      result.isolated.push_back(i);
    } else {
      if (ties.size() > 1) result.ambiguities.push_back({i, ties, choice.value});
      for (NodeId s : choice.best_set) result.edges.insert(i, s);
    }
    result.node_choices.push_back(std::move(choice));
  }
  detail::finish_bounded(result, n);
  return result;
}

struct H3Report {
  bool holds = true;
  /// (i, j, k) with edges i-j and j-k, i < k, where h_ij > h_ik or
  /// h_jk > h_ik fails.
  std::vector<std::array<NodeId, 3>> violations;
};

/// Strict ordering condition over every path of length two in `tree`.
/// ParameterError when `tree` is not a spanning tree on the score matrix's
/// nodes.
H3Report check_h3_condition(const SquareMatrix<double>& h, const UndirectedEdgeSet& tree);

template <StatusEstimates T>
H3Report check_h3_condition(const T& estimates, const UndirectedEdgeSet& tree) {
  return check_h3_condition(pairwise_scores(estimates), tree);
}

// Undirected edge list: an optional "n=<count>" header, then "<a> <b>" per
// line. Lines with a third (weight) field are accepted and a directed pair
// contributes its undirected edge, so weighted graph files read too.
void write_undirected_edges(const UndirectedEdgeSet& edges, std::size_t n, std::ostream& out);
UndirectedEdgeSet parse_undirected_edges(std::istream& in, std::size_t* node_count = nullptr);
UndirectedEdgeSet read_undirected_edges(const std::filesystem::path& path, std::size_t* node_count = nullptr);

/// One JSON object per line: ambiguities, then isolated nodes.
void write_ambiguity_log(const StructureResult& result, std::ostream& out);

}  // namespace cascade_infer
