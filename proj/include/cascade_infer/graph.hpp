#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cascade_infer {

using NodeId = std::int32_t;

/// Global bounds on edge weights, 0 < p_min <= p_max < 1 when valid.
struct WeightBounds {
  double p_min = 0.2;
  double p_max = 0.8;

  bool valid() const noexcept { return 0.0 < p_min && p_min <= p_max && p_max < 1.0; }
  bool operator==(const WeightBounds&) const = default;
};

struct OutEdge {
  NodeId target;
  double weight;
};

/// Set of unordered node pairs, stored normalized as (min, max).
class UndirectedEdgeSet {
 public:
  using Edge = std::pair<NodeId, NodeId>;
  using const_iterator = std::set<Edge>::const_iterator;

  UndirectedEdgeSet() = default;

  /// Returns false when the pair was already present. Throws ParameterError
  /// for a == b.
  bool insert(NodeId a, NodeId b);
  bool contains(NodeId a, NodeId b) const;

  std::size_t size() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return edges_.empty(); }
  const_iterator begin() const noexcept { return edges_.begin(); }
  const_iterator end() const noexcept { return edges_.end(); }

  bool operator==(const UndirectedEdgeSet&) const = default;

 private:
  std::set<Edge> edges_;
};

/// Weighted directed graph on nodes 0..n-1. Immutable after construction;
/// a missing edge means weight 0. The constructor only rejects endpoints
/// outside [0, n); the remaining invariants are reported by validate().
class WeightedDigraph {
 public:
  using EdgeMap = std::map<std::pair<NodeId, NodeId>, double>;

  WeightedDigraph() = default;
  WeightedDigraph(std::size_t n, EdgeMap edges, WeightBounds bounds = {});

  std::size_t node_count() const noexcept { return n_; }
  const EdgeMap& edges() const noexcept { return edges_; }
  WeightBounds bounds() const noexcept { return bounds_; }

  double weight(NodeId from, NodeId to) const;
  bool has_edge(NodeId from, NodeId to) const { return edges_.contains({from, to}); }

  /// Out-edges of u ordered by target.
  std::span<const OutEdge> out_edges(NodeId u) const { return out_[static_cast<std::size_t>(u)]; }

  /// Pairs {i, j} with p_ij + p_ji > 0.
  UndirectedEdgeSet skeleton() const;

  /// Sorted undirected neighbor lists.
  std::vector<std::vector<NodeId>> undirected_neighbors() const;

  /// FNV-1a hash of the canonical edge-list serialization.
  std::uint64_t content_hash() const;

  bool operator==(const WeightedDigraph& other) const {
    return n_ == other.n_ && edges_ == other.edges_ && bounds_ == other.bounds_;
  }

 private:
  std::size_t n_ = 0;
  EdgeMap edges_;
  WeightBounds bounds_;
  std::vector<std::vector<OutEdge>> out_;
};

struct Violation {
  NodeId from;  // -1 for graph-level violations
  NodeId to;
  std::string rule;
};

/// Lists every invariant violation; empty iff the graph is valid.
std::vector<Violation> validate(const WeightedDigraph& g);

/// Whether the undirected skeleton is a spanning tree (connected, n-1 edges).
bool is_tree(const UndirectedEdgeSet& edges, std::size_t n);

/// Tree path from `from` to `to` (both included). Empty if disconnected.
std::vector<NodeId> tree_path(const UndirectedEdgeSet& tree, std::size_t n, NodeId from, NodeId to);

/// Uniform random labeled tree (Pruefer sequence); each tree edge becomes two
/// directed edges with weights drawn independently from U[p_min, p_max].
WeightedDigraph random_tree(std::size_t n, WeightBounds bounds, std::uint64_t seed);

/// Random graph with undirected degree <= max_degree. Candidate pairs are
/// visited in a seeded random order and kept with probability `density`
/// while both endpoints still have spare degree.
WeightedDigraph random_bounded_degree(std::size_t n, std::size_t max_degree, double density,
                                      WeightBounds bounds, std::uint64_t seed);

// Edge-list text format:
//
//   # comment
//   n=<node count>
//   p_min=<weight>        (optional)
//   p_max=<weight>        (optional)
//   <src> <dst> <weight>  (one directed edge per line, 0-based node ids)
//
// The n= header is always written. When it is missing on read, n is one more
// than the largest node id. When bounds are missing, the defaults are widened
// to cover the weights present.
WeightedDigraph parse_edge_list(std::istream& in);
void format_edge_list(const WeightedDigraph& g, std::ostream& out);
WeightedDigraph read_edge_list(const std::filesystem::path& path);
void write_edge_list(const WeightedDigraph& g, const std::filesystem::path& path);

}  // namespace cascade_infer
