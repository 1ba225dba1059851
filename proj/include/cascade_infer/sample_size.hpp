#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace cascade_infer {

// Cascade counts sufficient for each learning task to succeed with
// probability at least 1 - delta. Natural logarithms throughout; the ceiling
// is taken once at the end. Out-of-domain inputs throw ParameterError, counts
// beyond 64 bits throw ResourceError.

/// Tree structure: N (log(1/delta) + 2 log N) / (p_min (1 - p_max)).
std::uint64_t m_tree_structure(std::size_t n, double delta, double p_min, double p_max);

/// Bounded-degree structure:
/// ((d + 2) N log N + N log(d / delta)) / (p_min (1 - p_max)^(2(d - 1))).
std::uint64_t m_bounded_structure(std::size_t n, std::size_t d, double delta, double p_min, double p_max);

/// Tree weights to precision eps:
/// (N^2 / eps^2) log(12 N^2 / delta) ((s0^2 - s2^2 + s0 + s2) p_max + s0 + s2)^2 / (s0^2 - s2^2)^2.
std::uint64_t m_tree_weights(std::size_t n, double eps, double delta, double s0, double s2, double p_max);

/// Bounded-degree weights to precision eps:
/// 1152 e^(4 p_max (d + 1)) / (p_min^2 s2^2 (s0^2 - s2^2)^4) (N^2 / eps^2) log(9 N^2 / delta).
/// nullopt when s2 == 0, where the bound does not apply.
std::optional<std::uint64_t> m_bounded_weights(std::size_t n, std::size_t d, double eps, double delta,
                                               double p_min, double p_max, double s0, double s2);

/// Cascades for every V ratio to be within eps_v of its limit:
/// (1 / eps_v^2) 16 N^2 / (p_min^2 s2^2 (1 - p_max)^(4d)) (2 log(3N) - log delta) / 2.
/// nullopt when s2 == 0.
std::optional<std::uint64_t> m_v_precision(std::size_t n, std::size_t d, double eps_v, double delta,
                                           double p_min, double p_max, double s2);

struct ComplexityInputs {
  std::size_t n = 0;
  std::size_t d = 1;
  double delta = 0.1;
  double eps = 0.1;
  double p_min = 0.2;
  double p_max = 0.8;
  double s0 = 0.0;
  double s2 = 0.0;
};

struct SampleSizes {
  std::uint64_t tree_structure = 0;
  std::uint64_t bounded_structure = 0;
  std::uint64_t tree_weights = 0;
  std::optional<std::uint64_t> bounded_weights;
};

SampleSizes all_sample_sizes(const ComplexityInputs& in);

}  // namespace cascade_infer
