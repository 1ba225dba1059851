#include "cascade_infer/weights.hpp"

#include <algorithm>
#include <ostream>

#include "cascade_infer/text.hpp"

namespace cascade_infer {

std::string flag_names(unsigned flags) {
  if (flags == kWeightOk) return "OK";
  static constexpr std::pair<unsigned, const char*> kNames[] = {
      {kNoPairCascade, "NO_PAIR_CASCADE"},
      {kClampedDelta, "CLAMPED_DELTA"},
      {kClampedRange, "CLAMPED_RANGE"},
      {kDegenerateDenom, "DEGENERATE_DENOM"},
  };
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if ((flags & bit) == 0) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

WeightedDigraph WeightEstimate::to_graph(WeightBounds bounds) const {
  const std::size_t n = node_count();
  WeightedDigraph::EdgeMap edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && p_hat(i, j) > 0.0) edges[{static_cast<NodeId>(i), static_cast<NodeId>(j)}] = p_hat(i, j);
    }
  }
  return WeightedDigraph(n, std::move(edges), bounds);
}

namespace detail {

void check_gap(double s0, double s2) {
  if (!(s0 > s2)) {
    throw ParameterError("weight recovery needs s0 > s2 (got s0=" + format_double(s0) +
                         ", s2=" + format_double(s2) + ")");
  }
}

void check_edges(const UndirectedEdgeSet& edges, std::size_t n) {
  for (const auto& [a, b] : edges) {
    if (a < 0 || static_cast<std::size_t>(b) >= n) throw ParameterError("edge outside the node set");
  }
}

}  // namespace detail

EdgeWeight tree_edge_weight(double f_ij, double f_ji, double g_ij, double s0, double s2) {
  detail::check_gap(s0, s2);
  const double num = f_ij * s0 - f_ji * s2;
  const double denom = g_ij * (s0 * s0 - s2 * s2) + num;
  if (!(denom > 0.0)) return {0.0, kDegenerateDenom};
  const double p = num / denom;
  if (p < 0.0) return {0.0, kClampedRange};
  if (p > 1.0) return {1.0, kClampedRange};
  return {p, kWeightOk};
}

VPair v_limit(double p_ij, double p_ji, double s0, double s2) {
  const double d = 1.0 + p_ij * p_ji;
  return {(p_ij * s0 + p_ji * s2) / d, (p_ji * s0 + p_ij * s2) / d};
}

double pair_discriminant(const VPair& v, double s0, double s2) {
  const double gap = s0 * s0 - s2 * s2;
  return gap * gap - 4.0 * (v.v_ji * s2 - v.v_ij * s0) * (v.v_ij * s2 - v.v_ji * s0);
}

PairSolution solve_pair(const VPair& v, double s0, double s2) {
  detail::check_gap(s0, s2);
  PairSolution out;
  double delta = pair_discriminant(v, s0, s2);
  if (delta < 0.0) {
    delta = 0.0;
    out.flags_ij |= kClampedDelta;
    out.flags_ji |= kClampedDelta;
  }
  const double denom = (s0 * s0 - s2 * s2) + std::sqrt(delta);
  const auto clamp = [](double p, unsigned& flags) {
    if (p < 0.0 || p > 1.0) flags |= kClampedRange;
    return std::clamp(p, 0.0, 1.0);
  };
  out.p_ij = clamp(2.0 * (v.v_ij * s0 - v.v_ji * s2) / denom, out.flags_ij);
  out.p_ji = clamp(2.0 * (v.v_ji * s0 - v.v_ij * s2) / denom, out.flags_ji);
  return out;
}

double delta_lower_bound(double s0, double s2, double p_max) {
  const double gap = s0 * s0 - s2 * s2;
  return gap * gap * (1.0 - p_max) * (1.0 - p_max) / (1.0 + p_max * p_max);
}

void write_weight_flags(const WeightEstimate& est, std::ostream& out) {
  out << "i,j,p_hat,flags\n";
  const std::size_t n = est.node_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!est.evaluated(i, j)) continue;
      out << i << ',' << j << ',' << format_double(est.p_hat(i, j)) << ',' << flag_names(est.flags(i, j))
          << '\n';
    }
  }
}

}  // namespace cascade_infer
