#include "cascade_infer/graph.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>

#include "cascade_infer/errors.hpp"
#include "cascade_infer/rng.hpp"
#include "cascade_infer/text.hpp"

namespace cascade_infer {

bool UndirectedEdgeSet::insert(NodeId a, NodeId b) {
  if (a == b) throw ParameterError("undirected edge with identical endpoints");
  return edges_.insert(std::minmax(a, b)).second;
}

bool UndirectedEdgeSet::contains(NodeId a, NodeId b) const {
  return edges_.contains(std::minmax(a, b));
}

WeightedDigraph::WeightedDigraph(std::size_t n, EdgeMap edges, WeightBounds bounds)
    : n_(n), edges_(std::move(edges)), bounds_(bounds), out_(n) {
  for (const auto& [key, w] : edges_) {
    const auto [from, to] = key;
    if (from < 0 || to < 0 || static_cast<std::size_t>(from) >= n_ ||
        static_cast<std::size_t>(to) >= n_) {
      throw ParameterError("edge (" + std::to_string(from) + "," + std::to_string(to) +
                           ") outside node range of " + std::to_string(n_) + " nodes");
    }
    out_[static_cast<std::size_t>(from)].push_back({to, w});
  }
}

double WeightedDigraph::weight(NodeId from, NodeId to) const {
  const auto it = edges_.find({from, to});
  return it == edges_.end() ? 0.0 : it->second;
}

UndirectedEdgeSet WeightedDigraph::skeleton() const {
  UndirectedEdgeSet s;
  for (const auto& [key, w] : edges_) {
    if (key.first != key.second && w > 0.0) s.insert(key.first, key.second);
  }
  return s;
}

std::vector<std::vector<NodeId>> WeightedDigraph::undirected_neighbors() const {
  std::vector<std::vector<NodeId>> nbrs(n_);
  for (const auto& [a, b] : skeleton()) {
    nbrs[static_cast<std::size_t>(a)].push_back(b);
    nbrs[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& list : nbrs) std::sort(list.begin(), list.end());
  return nbrs;
}

std::uint64_t WeightedDigraph::content_hash() const {
  std::ostringstream text;
  format_edge_list(*this, text);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text.str()) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::vector<Violation> validate(const WeightedDigraph& g) {
  std::vector<Violation> out;
  const WeightBounds b = g.bounds();
  if (!b.valid()) out.push_back({-1, -1, "invalid bounds: need 0 < p_min <= p_max < 1"});
  for (const auto& [key, w] : g.edges()) {
    const auto [from, to] = key;
    if (from == to) {
      out.push_back({from, to, "self-loop"});
      continue;
    }
    if (!(w < 1.0)) {
      out.push_back({from, to, "weight >= 1"});
    } else if (!(w > 0.0)) {
      out.push_back({from, to, "weight <= 0"});
    } else if (w < b.p_min) {
      out.push_back({from, to, "weight below p_min"});
    } else if (w > b.p_max) {
      out.push_back({from, to, "weight above p_max"});
    }
  }
  return out;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

void check_bounds(WeightBounds bounds) {
  if (!bounds.valid()) {
    throw ParameterError("weight bounds must satisfy 0 < p_min <= p_max < 1 (got " +
                         format_double(bounds.p_min) + ", " + format_double(bounds.p_max) + ")");
  }
}

WeightedDigraph::EdgeMap weigh_pairs(const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                     WeightBounds bounds, Rng& rng) {
  WeightedDigraph::EdgeMap edges;
  const double span = bounds.p_max - bounds.p_min;
  for (const auto& [a, b] : pairs) {
    edges[{a, b}] = bounds.p_min + span * rng.uniform();
    edges[{b, a}] = bounds.p_min + span * rng.uniform();
  }
  return edges;
}

}  // namespace

bool is_tree(const UndirectedEdgeSet& edges, std::size_t n) {
  if (n == 0) return false;
  if (edges.size() != n - 1) return false;
  DisjointSets sets(n);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
      return false;
    }
    if (!sets.unite(static_cast<std::size_t>(a), static_cast<std::size_t>(b))) return false;
  }
  return true;
}

std::vector<NodeId> tree_path(const UndirectedEdgeSet& tree, std::size_t n, NodeId from, NodeId to) {
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& [a, b] : tree) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<NodeId> parent(n, -1);
  std::vector<bool> seen(n, false);
  std::queue<NodeId> queue;
  queue.push(from);
  seen[static_cast<std::size_t>(from)] = true;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop();
    if (u == to) break;
    for (NodeId v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        parent[static_cast<std::size_t>(v)] = u;
        queue.push(v);
      }
    }
  }
  if (!seen[static_cast<std::size_t>(to)]) return {};
  std::vector<NodeId> path;
  for (NodeId v = to; v != -1; v = parent[static_cast<std::size_t>(v)]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

WeightedDigraph random_tree(std::size_t n, WeightBounds bounds, std::uint64_t seed) {
  check_bounds(bounds);
  if (n == 0) throw ParameterError("random_tree needs at least one node");
  Rng rng(seed);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  if (n == 2) {
    pairs.emplace_back(0, 1);
  } else if (n > 2) {
    std::vector<NodeId> code(n - 2);
    for (auto& c : code) c = static_cast<NodeId>(rng.below(n));

    std::vector<std::size_t> degree(n, 1);
    for (NodeId c : code) ++degree[static_cast<std::size_t>(c)];
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> leaves;
    for (std::size_t v = 0; v < n; ++v) {
      if (degree[v] == 1) leaves.push(static_cast<NodeId>(v));
    }
    for (NodeId c : code) {
      const NodeId leaf = leaves.top();
      leaves.pop();
      pairs.emplace_back(std::min(leaf, c), std::max(leaf, c));
      if (--degree[static_cast<std::size_t>(c)] == 1) leaves.push(c);
    }
    const NodeId a = leaves.top();
    leaves.pop();
    const NodeId b = leaves.top();
    pairs.emplace_back(std::min(a, b), std::max(a, b));
    std::sort(pairs.begin(), pairs.end());
  }
  return WeightedDigraph(n, weigh_pairs(pairs, bounds, rng), bounds);
}

WeightedDigraph random_bounded_degree(std::size_t n, std::size_t max_degree, double density,
                                      WeightBounds bounds, std::uint64_t seed) {
  check_bounds(bounds);
  if (max_degree < 1) throw ParameterError("max degree must be at least 1");
  if (n < 2 || max_degree > n - 1) {
    throw ParameterError("max degree must satisfy 1 <= d <= n-1");
  }
  if (!(density >= 0.0 && density <= 1.0)) throw ParameterError("density must lie in [0, 1]");

  Rng rng(seed);
  std::vector<std::pair<NodeId, NodeId>> candidates;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      candidates.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    }
  }
  // Fisher-Yates with the project generator, so the order is stable across
  // standard library implementations.
  for (std::size_t k = candidates.size(); k > 1; --k) {
    std::swap(candidates[k - 1], candidates[rng.below(k)]);
  }

  std::vector<std::size_t> degree(n, 0);
  std::vector<std::pair<NodeId, NodeId>> kept;
  for (const auto& [a, b] : candidates) {
    const bool draw = rng.uniform() < density;
    auto& da = degree[static_cast<std::size_t>(a)];
    auto& db = degree[static_cast<std::size_t>(b)];
    if (draw && da < max_degree && db < max_degree) {
      ++da;
      ++db;
      kept.emplace_back(a, b);
    }
  }
  std::sort(kept.begin(), kept.end());
  return WeightedDigraph(n, weigh_pairs(kept, bounds, rng), bounds);
}

WeightedDigraph parse_edge_list(std::istream& in) {
  std::optional<std::size_t> declared_n;
  std::optional<double> p_min, p_max;
  WeightedDigraph::EdgeMap edges;
  std::map<std::pair<NodeId, NodeId>, std::size_t> edge_line;
  NodeId max_id = -1;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;

    try {
      if (const auto eq = line.find('='); eq != std::string_view::npos) {
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (!edges.empty()) throw ParseError(line_no, "header line after edges");
        if (key == "n") {
          declared_n = parse_uint(value);
        } else if (key == "p_min") {
          p_min = parse_double(value);
        } else if (key == "p_max") {
          p_max = parse_double(value);
        } else {
          throw ParseError(line_no, "unknown header key '" + std::string(key) + "'");
        }
        continue;
      }

      std::vector<std::string_view> fields;
      for (auto part : split(line, ' ')) {
        for (auto sub : split(part, '\t')) {
          if (!trim(sub).empty()) fields.push_back(trim(sub));
        }
      }
      if (fields.size() != 3) {
        throw ParseError(line_no, "expected 'src dst weight', got '" + std::string(line) + "'");
      }
      const auto src = parse_int(fields[0]);
      const auto dst = parse_int(fields[1]);
      const double w = parse_double(fields[2]);
      if (src < 0 || dst < 0 || src > INT32_MAX || dst > INT32_MAX) {
        throw ParseError(line_no, "node ids must be non-negative 32-bit integers");
      }
      if (!(w > 0.0 && w < 1.0)) {
        throw ValidationError("line " + std::to_string(line_no) + ": weight " +
                              std::string(fields[2]) + " outside (0,1)");
      }
      const std::pair<NodeId, NodeId> key{static_cast<NodeId>(src), static_cast<NodeId>(dst)};
      if (!edges.emplace(key, w).second) {
        throw ParseError(line_no, "duplicate edge, first defined on line " +
                                      std::to_string(edge_line[key]));
      }
      edge_line[key] = line_no;
      max_id = std::max({max_id, key.first, key.second});
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(line_no, e.what());
    }
  }

  const std::size_t n = declared_n.value_or(static_cast<std::size_t>(max_id + 1));
  if (max_id >= 0 && static_cast<std::size_t>(max_id) >= n) {
    throw ValidationError("node id " + std::to_string(max_id) + " outside declared n=" +
                          std::to_string(n));
  }

  WeightBounds bounds;
  for (const auto& [key, w] : edges) {
    if (!p_min) bounds.p_min = std::min(bounds.p_min, w);
    if (!p_max) bounds.p_max = std::max(bounds.p_max, w);
  }
  if (p_min) bounds.p_min = *p_min;
  if (p_max) bounds.p_max = *p_max;
  return WeightedDigraph(n, std::move(edges), bounds);
}

void format_edge_list(const WeightedDigraph& g, std::ostream& out) {
  out << "n=" << g.node_count() << '\n';
  out << "p_min=" << format_double(g.bounds().p_min) << '\n';
  out << "p_max=" << format_double(g.bounds().p_max) << '\n';
  for (const auto& [key, w] : g.edges()) {
    out << key.first << ' ' << key.second << ' ' << format_double(w) << '\n';
  }
}

WeightedDigraph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list '" + path.string() + "'");
  return parse_edge_list(in);
}

void write_edge_list(const WeightedDigraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write edge list '" + path.string() + "'");
  format_edge_list(g, out);
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

}  // namespace cascade_infer
