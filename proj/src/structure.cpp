#include "cascade_infer/structure.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cascade_infer/text.hpp"

namespace cascade_infer {

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

void check_score_matrix(const SquareMatrix<double>& h) {
  const std::size_t n = h.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (h(i, i) != 0.0) throw ParameterError("score matrix diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = h(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("score matrix values must lie in [0, 1]");
      if (v != h(j, i)) {
        throw ParameterError("score matrix is not symmetric at (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace

StructureResult learn_tree(const SquareMatrix<double>& h) {
  check_score_matrix(h);
  const std::size_t n = h.size();
  std::vector<PairDecision> pairs;
  pairs.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      pairs.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), h(i, j), false});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const PairDecision& x, const PairDecision& y) { return x.score > y.score; });

  StructureResult result;
  DisjointSets sets(n);
  std::size_t placed = 0;
  for (auto& pair : pairs) {
    if (placed + 1 >= n) break;
    if (pair.score <= 0.0) break;
    pair.kept = sets.unite(static_cast<std::size_t>(pair.a), static_cast<std::size_t>(pair.b));
    if (pair.kept) {
      result.edges.insert(pair.a, pair.b);
      ++placed;
    }
    result.pair_trace.push_back(pair);
  }
  result.incomplete = n > 0 && placed + 1 < n;
  return result;
}

namespace detail {

bool next_combination(std::vector<NodeId>& set, std::size_t n) {
  const std::size_t k = set.size();
  for (std::size_t pos = k; pos-- > 0;) {
    if (static_cast<std::size_t>(set[pos]) < n - k + pos) {
      ++set[pos];
      for (std::size_t q = pos + 1; q < k; ++q) set[q] = set[q - 1] + 1;
      return true;
    }
  }
  return false;
}

void finish_bounded(StructureResult& result, std::size_t) {
  const auto chose = [&](NodeId from, NodeId to) {
    const auto& s = result.node_choices[static_cast<std::size_t>(from)].best_set;
    return std::binary_search(s.begin(), s.end(), to);
  };
  for (const auto& [a, b] : result.edges) {
    if (!(chose(a, b) && chose(b, a))) ++result.disagreements;
  }
}

}  // namespace detail

H3Report check_h3_condition(const SquareMatrix<double>& h, const UndirectedEdgeSet& tree) {
  const std::size_t n = h.size();
  for (const auto& [a, b] : tree) {
    if (a < 0 || static_cast<std::size_t>(b) >= n) throw ParameterError("tree edge outside the node set");
  }
  if (!is_tree(tree, n)) throw ParameterError("reference structure is not a spanning tree");
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& [a, b] : tree) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  H3Report report;
  for (std::size_t j = 0; j < n; ++j) {
    auto& nb = adj[j];
    std::sort(nb.begin(), nb.end());
    for (std::size_t x = 0; x < nb.size(); ++x) {
      for (std::size_t y = x + 1; y < nb.size(); ++y) {
        const auto i = static_cast<std::size_t>(nb[x]);
        const auto k = static_cast<std::size_t>(nb[y]);
        if (!(h(i, j) > h(i, k) && h(j, k) > h(i, k))) {
          report.violations.push_back({nb[x], static_cast<NodeId>(j), nb[y]});
        }
      }
    }
  }
  std::sort(report.violations.begin(), report.violations.end());
  report.holds = report.violations.empty();
  return report;
}

void write_undirected_edges(const UndirectedEdgeSet& edges, std::size_t n, std::ostream& out) {
  out << "n=" << n << '\n';
  for (const auto& [a, b] : edges) out << a << ' ' << b << '\n';
}

UndirectedEdgeSet parse_undirected_edges(std::istream& in, std::size_t* node_count) {
  UndirectedEdgeSet edges;
  std::size_t declared = 0;
  bool have_n = false;
  NodeId max_id = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    try {
      if (view.starts_with("n=")) {
        declared = parse_uint(view.substr(2));
        have_n = true;
        continue;
      }
      if (view.starts_with("p_min=") || view.starts_with("p_max=")) continue;
      std::vector<std::string_view> fields;
      for (auto part : split(view, ' ')) {
        for (auto piece : split(part, '\t')) {
          if (!piece.empty()) fields.push_back(piece);
        }
      }
      if (fields.size() != 2 && fields.size() != 3) throw ParseError(0, "expected '<a> <b> [weight]'");
      const auto a = parse_int(fields[0]);
      const auto b = parse_int(fields[1]);
      if (a < 0 || b < 0 || a > INT32_MAX || b > INT32_MAX) throw ParseError(0, "node id out of range");
      if (a == b) throw ParseError(0, "self-loop");
      if (fields.size() == 3) parse_double(fields[2]);
      edges.insert(static_cast<NodeId>(a), static_cast<NodeId>(b));
      max_id = std::max({max_id, static_cast<NodeId>(a), static_cast<NodeId>(b)});
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  const std::size_t n = have_n ? declared : static_cast<std::size_t>(max_id + 1);
  if (max_id >= 0 && static_cast<std::size_t>(max_id) >= n) {
    throw ParseError(0, "edge endpoint " + std::to_string(max_id) + " outside n=" + std::to_string(n));
  }
  if (node_count != nullptr) *node_count = n;
  return edges;
}

UndirectedEdgeSet read_undirected_edges(const std::filesystem::path& path, std::size_t* node_count) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_undirected_edges(in, node_count);
}

void write_ambiguity_log(const StructureResult& result, std::ostream& out) {
  for (const auto& amb : result.ambiguities) {
    nlohmann::json row;
    row["node"] = amb.node;
    row["value"] = amb.value;
    row["chosen"] = amb.sets.front();
    row["sets"] = amb.sets;
    out << row.dump() << '\n';
  }
  for (NodeId node : result.isolated) {
    nlohmann::json row;
    row["node"] = node;
    row["isolated"] = true;
    out << row.dump() << '\n';
  }
}

}  // namespace cascade_infer
