#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include "cascade_infer/errors.hpp"
#include "cascade_infer/estimators.hpp"
#include "cascade_infer/graph.hpp"
#include "cascade_infer/matrix.hpp"
#include "cascade_infer/noise.hpp"

namespace cascade_infer {

/// Bitmask of solver events; 0 means OK.
enum WeightFlag : unsigned {
  kWeightOk = 0,
  kNoPairCascade = 1u << 0,
  kClampedDelta = 1u << 1,
  kClampedRange = 1u << 2,
  kDegenerateDenom = 1u << 3,
};

/// "OK" or the set flags joined with '|', e.g. "CLAMPED_DELTA|CLAMPED_RANGE".
std::string flag_names(unsigned flags);

struct EdgeWeight {
  double p = 0.0;
  unsigned flags = kWeightOk;
};

struct WeightEstimate {
  explicit WeightEstimate(std::size_t n) : p_hat(n, 0.0), flags(n, kWeightOk), evaluated(n, 0) {}

  std::size_t node_count() const noexcept { return p_hat.size(); }

  /// Estimated weights as a graph; pairs with p_hat == 0 are dropped.
  WeightedDigraph to_graph(WeightBounds bounds) const;

  SquareMatrix<double> p_hat;
  SquareMatrix<unsigned> flags;
  /// Ordered pairs the solver produced a value for.
  SquareMatrix<unsigned char> evaluated;
};

/// Tree closed form for the directed edge i -> j from f_{i<j}, f_{j<i} and
/// g_{i,notj}. s0 <= s2 is a ParameterError.
EdgeWeight tree_edge_weight(double f_ij, double f_ji, double g_ij, double s0, double s2);

struct VPair {
  double v_ij = 0.0;
  double v_ji = 0.0;
};

/// Population value of V for given true weights: (p_ij s0 + p_ji s2) / (1 + p_ij p_ji).
VPair v_limit(double p_ij, double p_ji, double s0, double s2);

/// Discriminant of the pairwise quadratic (before clamping).
double pair_discriminant(const VPair& v, double s0, double s2);

struct PairSolution {
  double p_ij = 0.0;
  double p_ji = 0.0;
  unsigned flags_ij = kWeightOk;
  unsigned flags_ji = kWeightOk;
};

/// Root in [0, 1] of  V_ji s2 - V_ij s0 + (s0^2 - s2^2) p + (V_ij s2 - V_ji s0) p^2 = 0
/// and its mirror for p_ji. A negative discriminant is clamped to 0
/// (CLAMPED_DELTA); results outside [0, 1] are clamped (CLAMPED_RANGE).
PairSolution solve_pair(const VPair& v, double s0, double s2);

/// Lower bound on the discriminant over true weights in [0, p_max]^2.
double delta_lower_bound(double s0, double s2, double p_max);

/// Small-cascade ratios for the pair (i, j); nullopt when no cascade
/// infected exactly {i, j}.
template <TimedEstimates T>
std::optional<VPair> v_ratio(const T& est, NodeId i, NodeId j) {
  const double h2 = est.h2(i, j);
  if (h2 == 0.0) return std::nullopt;
  const double n = static_cast<double>(est.node_count());
  const double denom = h2 + n * est.e1(i) * est.e1(j);
  return VPair{est.f2_lt(i, j) / denom, est.f2_lt(j, i) / denom};
}

namespace detail {
void check_gap(double s0, double s2);
void check_edges(const UndirectedEdgeSet& edges, std::size_t n);
}  // namespace detail

/// Applies the tree closed form to both directions of every edge.
template <TimedEstimates T>
WeightEstimate tree_weights(const T& est, const UndirectedEdgeSet& edges, const SkTable& sk) {
  const double s0 = sk.s0();
  const double s2 = sk.s2();
  detail::check_gap(s0, s2);
  const std::size_t n = est.node_count();
  detail::check_edges(edges, n);
  WeightEstimate out(n);
  for (const auto& [a, b] : edges) {
    const auto i = static_cast<std::size_t>(a);
    const auto j = static_cast<std::size_t>(b);
    const double f_ab = est.f_lt(a, b);
    const double f_ba = est.f_lt(b, a);
    const EdgeWeight fwd = tree_edge_weight(f_ab, f_ba, est.g_excl(a, b), s0, s2);
    const EdgeWeight bwd = tree_edge_weight(f_ba, f_ab, est.g_excl(b, a), s0, s2);
    out.p_hat(i, j) = fwd.p;
    out.flags(i, j) = fwd.flags;
    out.p_hat(j, i) = bwd.p;
    out.flags(j, i) = bwd.flags;
    out.evaluated(i, j) = out.evaluated(j, i) = 1;
  }
  return out;
}

/// V-ratio solve over every unordered pair; valid for any graph.
template <TimedEstimates T>
WeightEstimate pairwise_weights(const T& est, const SkTable& sk) {
  const double s0 = sk.s0();
  const double s2 = sk.s2();
  detail::check_gap(s0, s2);
  const std::size_t n = est.node_count();
  WeightEstimate out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out.evaluated(i, j) = out.evaluated(j, i) = 1;
      const auto v = v_ratio(est, static_cast<NodeId>(i), static_cast<NodeId>(j));
      if (!v) {
        out.flags(i, j) = out.flags(j, i) = kNoPairCascade;
        continue;
      }
      const PairSolution sol = solve_pair(*v, s0, s2);
      out.p_hat(i, j) = sol.p_ij;
      out.p_hat(j, i) = sol.p_ji;
      out.flags(i, j) = sol.flags_ij;
      out.flags(j, i) = sol.flags_ji;
    }
  }
  return out;
}

/// Flags CSV: "i,j,p_hat,flags" for every evaluated ordered pair.
void write_weight_flags(const WeightEstimate& est, std::ostream& out);

}  // namespace cascade_infer
