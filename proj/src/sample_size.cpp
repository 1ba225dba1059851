#include "cascade_infer/sample_size.hpp"

#include <cmath>
#include <string>

#include "cascade_infer/errors.hpp"

namespace cascade_infer {

namespace {

void check_common(std::size_t n, double delta, double p_min, double p_max) {
  if (n < 1) throw ParameterError("node count must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  if (!(p_min > 0.0 && p_min <= p_max && p_max < 1.0)) {
    throw ParameterError("weight bounds must satisfy 0 < p_min <= p_max < 1");
  }
}

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("precision must be positive");
}

void check_noise(double s0, double s2) {
  if (!(s2 >= 0.0 && s0 > s2 && s0 <= 1.0)) throw ParameterError("noise parameters must satisfy 0 <= s2 < s0 <= 1");
}

std::uint64_t to_count(double value) {
  const double c = std::ceil(value);
  if (!(c < 18446744073709551616.0)) throw ResourceError("sample size exceeds 64-bit range");
  return c <= 0.0 ? 0 : static_cast<std::uint64_t>(c);
}

}  // namespace

std::uint64_t m_tree_structure(std::size_t n, double delta, double p_min, double p_max) {
  check_common(n, delta, p_min, p_max);
  const double nn = static_cast<double>(n);
  return to_count(nn * (std::log(1.0 / delta) + 2.0 * std::log(nn)) / (p_min * (1.0 - p_max)));
}

std::uint64_t m_bounded_structure(std::size_t n, std::size_t d, double delta, double p_min, double p_max) {
  check_common(n, delta, p_min, p_max);
  if (d < 1) throw ParameterError("max degree must be at least 1");
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  const double num = (dd + 2.0) * nn * std::log(nn) + nn * std::log(dd / delta);
  return to_count(num / (p_min * std::pow(1.0 - p_max, 2.0 * (dd - 1.0))));
}

std::uint64_t m_tree_weights(std::size_t n, double eps, double delta, double s0, double s2, double p_max) {
  if (n < 1) throw ParameterError("node count must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  if (!(p_max > 0.0 && p_max < 1.0)) throw ParameterError("p_max must lie in (0, 1)");
  check_eps(eps);
  check_noise(s0, s2);
  const double nn = static_cast<double>(n);
  const double gap = s0 * s0 - s2 * s2;
  const double c = (gap + s0 + s2) * p_max + s0 + s2;
  return to_count(nn * nn / (eps * eps) * std::log(12.0 * nn * nn / delta) * c * c / (gap * gap));
}

std::optional<std::uint64_t> m_bounded_weights(std::size_t n, std::size_t d, double eps, double delta,
                                               double p_min, double p_max, double s0, double s2) {
  check_common(n, delta, p_min, p_max);
  check_eps(eps);
  check_noise(s0, s2);
  if (d < 1) throw ParameterError("max degree must be at least 1");
  if (s2 == 0.0) return std::nullopt;
  const double nn = static_cast<double>(n);
  const double gap = s0 * s0 - s2 * s2;
  const double lead = 1152.0 * std::exp(4.0 * p_max * (static_cast<double>(d) + 1.0)) /
                      (p_min * p_min * s2 * s2 * std::pow(gap, 4.0));
  return to_count(lead * nn * nn / (eps * eps) * std::log(9.0 * nn * nn / delta));
}

std::optional<std::uint64_t> m_v_precision(std::size_t n, std::size_t d, double eps_v, double delta,
                                           double p_min, double p_max, double s2) {
  check_common(n, delta, p_min, p_max);
  check_eps(eps_v);
  if (s2 < 0.0) throw ParameterError("s2 must be non-negative");
  if (s2 == 0.0) return std::nullopt;
  const double nn = static_cast<double>(n);
  const double lead = 16.0 * nn * nn /
                      (p_min * p_min * s2 * s2 * std::pow(1.0 - p_max, 4.0 * static_cast<double>(d)));
  return to_count(lead / (eps_v * eps_v) * (2.0 * std::log(3.0 * nn) - std::log(delta)) / 2.0);
}

SampleSizes all_sample_sizes(const ComplexityInputs& in) {
  SampleSizes out;
  out.tree_structure = m_tree_structure(in.n, in.delta, in.p_min, in.p_max);
  out.bounded_structure = m_bounded_structure(in.n, in.d, in.delta, in.p_min, in.p_max);
  out.tree_weights = m_tree_weights(in.n, in.eps, in.delta, in.s0, in.s2, in.p_max);
  out.bounded_weights = m_bounded_weights(in.n, in.d, in.eps, in.delta, in.p_min, in.p_max, in.s0, in.s2);
  return out;
}

}  // namespace cascade_infer
