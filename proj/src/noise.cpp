#include "cascade_infer/noise.hpp"

#include <algorithm>
#include <cmath>

#include "cascade_infer/errors.hpp"
#include "cascade_infer/text.hpp"

namespace cascade_infer {

NoiseModel::NoiseModel(std::vector<double> pmf, double tail_mass, std::string spec)
    : pmf_(std::move(pmf)), tail_mass_(tail_mass), spec_(std::move(spec)) {
  cdf_.resize(pmf_.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < pmf_.size(); ++t) {
    acc += pmf_[t];
    cdf_[t] = acc;
  }
  cdf_.back() = 1.0;
}

NoiseModel NoiseModel::from_pmf(const std::map<int, double>& table) {
  if (table.empty()) throw ParameterError("noise pmf must not be empty");
  double total = 0.0;
  for (const auto& [delay, prob] : table) {
    if (delay < 0) throw ParameterError("negative noise delay " + std::to_string(delay));
    if (!(prob >= 0.0) || !std::isfinite(prob)) {
      throw ValidationError("noise probability for delay " + std::to_string(delay) +
                            " must be finite and non-negative");
    }
    total += prob;
  }
  if (!(std::abs(total - 1.0) <= 1e-9)) {
    throw ValidationError("noise pmf sums to " + format_double(total) + ", not 1");
  }

  int width = 0;
  for (const auto& [delay, prob] : table) {
    if (prob > 0.0) width = std::max(width, delay);
  }
  std::vector<double> pmf(static_cast<std::size_t>(width) + 1, 0.0);
  for (const auto& [delay, prob] : table) {
    if (delay <= width) pmf[static_cast<std::size_t>(delay)] = prob / total;
  }

  std::string spec = "pmf:";
  bool first = true;
  for (std::size_t t = 0; t < pmf.size(); ++t) {
    if (pmf[t] == 0.0) continue;
    if (!first) spec += ',';
    spec += std::to_string(t) + "=" + format_double(pmf[t]);
    first = false;
  }
  return NoiseModel(std::move(pmf), 0.0, std::move(spec));
}

NoiseModel NoiseModel::geometric(double q, double tail_eps) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("geometric noise needs 0 < q < 1");
  if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw ParameterError("tail_eps must lie in (0, 1)");

  std::vector<double> pmf;
  double stay = 1.0;  // (1-q)^t
  while (true) {
    pmf.push_back(q * stay);
    stay *= 1.0 - q;  // residual mass beyond the current support
    if (stay <= tail_eps) break;
  }
  const double kept = 1.0 - stay;
  for (auto& p : pmf) p /= kept;

  std::string spec = "geometric:q=" + format_double(q);
  if (tail_eps != 1e-12) spec += ",tail=" + format_double(tail_eps);
  return NoiseModel(std::move(pmf), stay, std::move(spec));
}

NoiseModel NoiseModel::parse(std::string_view spec) {
  spec = trim(spec);
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError(0, "noise spec needs 'geometric:' or 'pmf:' prefix: '" + std::string(spec) + "'");
  }
  const auto kind = spec.substr(0, colon);
  const auto body = spec.substr(colon + 1);

  std::map<std::string, std::string_view> kv;
  std::map<int, double> table;
  for (auto item : split(body, ',')) {
    item = trim(item);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(0, "expected key=value in noise spec, got '" + std::string(item) + "'");
    }
    const auto key = trim(item.substr(0, eq));
    const auto value = trim(item.substr(eq + 1));
    if (kind == "pmf") {
      const auto delay = parse_int(key);
      if (delay < 0) throw ParameterError("negative noise delay " + std::string(key));
      if (!table.emplace(static_cast<int>(delay), parse_double(value)).second) {
        throw ParseError(0, "duplicate delay " + std::string(key) + " in noise spec");
      }
    } else {
      kv[std::string(key)] = value;
    }
  }

  if (kind == "pmf") return from_pmf(table);
  if (kind == "geometric") {
    if (!kv.contains("q")) throw ParseError(0, "geometric noise spec needs q=<float>");
    double tail = 1e-12;
    for (const auto& [key, value] : kv) {
      if (key == "q") continue;
      if (key == "tail") {
        tail = parse_double(value);
      } else {
        throw ParseError(0, "unknown geometric noise key '" + key + "'");
      }
    }
    return geometric(parse_double(kv.at("q")), tail);
  }
  throw ParseError(0, "unknown noise kind '" + std::string(kind) + "'");
}

double NoiseModel::mean() const {
  double m = 0.0;
  for (std::size_t t = 0; t < pmf_.size(); ++t) m += static_cast<double>(t) * pmf_[t];
  return m;
}

int NoiseModel::sample(Rng& rng) const {
  if (pmf_.size() == 1) return 0;
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = std::min<std::ptrdiff_t>(it - cdf_.begin(), support_width());
  return static_cast<int>(idx);
}

SkTable::SkTable(std::vector<double> values, int k_max, int support_width, double tail_mass)
    : values_(std::move(values)), k_max_(k_max), width_(support_width), tail_mass_(tail_mass) {}

double SkTable::at(int k) const {
  if (k >= -k_max_ && k <= k_max_) return values_[static_cast<std::size_t>(k + k_max_)];
  if (covers_all()) return k < 0 ? 1.0 : 0.0;
  throw ParameterError("s_k table of half-width " + std::to_string(k_max_) +
                       " cannot answer k=" + std::to_string(k));
}

SkTable s_table(const NoiseModel& model, int k_max) {
  if (k_max < 2) throw ParameterError("s_k table needs k_max >= 2");
  const auto pmf = model.pmf();
  const int width = model.support_width();

  // tail[t] = P(n >= t) for t in [0, width + 1]; non-increasing by construction.
  std::vector<double> tail(static_cast<std::size_t>(width) + 2, 0.0);
  for (int t = width; t >= 0; --t) {
    tail[static_cast<std::size_t>(t)] = tail[static_cast<std::size_t>(t) + 1] + pmf[static_cast<std::size_t>(t)];
  }
  const auto tail_at = [&](int t) {
    if (t <= 0) return 1.0;
    if (t > width) return 0.0;
    return tail[static_cast<std::size_t>(t)];
  };

  std::vector<double> values(2 * static_cast<std::size_t>(k_max) + 1);
  for (int k = -k_max; k <= k_max; ++k) {
    double s = 0.0;
    if (k <= -width) {
      s = 1.0;
    } else if (k > width) {
      s = 0.0;
    } else {
      // P(n_j - n_i >= k) = sum_a P(n_i = a) P(n_j >= a + k)
      for (int a = 0; a <= width; ++a) s += pmf[static_cast<std::size_t>(a)] * tail_at(a + k);
      s = std::clamp(s, 0.0, 1.0);
    }
    values[static_cast<std::size_t>(k + k_max)] = s;
  }
  return SkTable(std::move(values), k_max, width, model.tail_mass_bound());
}

SkTable s_table(const NoiseModel& model) { return s_table(model, 2 + model.support_width()); }

}  // namespace cascade_infer
