#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cascade_infer/rng.hpp"

namespace cascade_infer {

/// I.i.d. non-negative integer reporting delay with finite (truncated)
/// support {0, ..., support_width()}. The stored pmf sums to 1;
/// tail_mass_bound() is the probability mass discarded by truncation.
class NoiseModel {
 public:
  /// Renormalizes when the total deviates from 1 by at most 1e-9.
  static NoiseModel from_pmf(const std::map<int, double>& table);

  /// pmf(t) = q (1-q)^t, truncated at the smallest K with (1-q)^(K+1) <= tail_eps.
  static NoiseModel geometric(double q, double tail_eps = 1e-12);

  /// "geometric:q=<float>[,tail=<float>]" or "pmf:<delay>=<prob>,...".
  static NoiseModel parse(std::string_view spec);

  /// Canonical spec string; parse(spec()) reproduces the model exactly.
  const std::string& spec() const noexcept { return spec_; }

  std::span<const double> pmf() const noexcept { return pmf_; }
  int support_width() const noexcept { return static_cast<int>(pmf_.size()) - 1; }
  double tail_mass_bound() const noexcept { return tail_mass_; }
  double mean() const;

  int sample(Rng& rng) const;

 private:
  NoiseModel(std::vector<double> pmf, double tail_mass, std::string spec);

  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double tail_mass_ = 0.0;
  std::string spec_;
};

/// s_k = P(n_j - n_i >= k) for two independent draws from the same model,
/// tabulated on [-k_max, k_max].
class SkTable {
 public:
  SkTable(std::vector<double> values, int k_max, int support_width, double tail_mass);

  int k_max() const noexcept { return k_max_; }
  int support_width() const noexcept { return width_; }
  double tail_mass_bound() const noexcept { return tail_mass_; }

  /// Whether at(k) answers for every integer k (table reaches past the support).
  bool covers_all() const noexcept { return k_max_ >= width_; }

  /// s_k. Beyond the table the value is still exact (1 or 0) when the table
  /// spans the support; otherwise ParameterError.
  double at(int k) const;

  double s0() const { return at(0); }
  double s2() const { return at(2); }

 private:
  std::vector<double> values_;  // index k + k_max
  int k_max_;
  int width_;
  double tail_mass_;
};

/// Exact summation over the support. k_max >= 2.
SkTable s_table(const NoiseModel& model, int k_max);

/// Default table width: 2 + support width.
SkTable s_table(const NoiseModel& model);

}  // namespace cascade_infer
