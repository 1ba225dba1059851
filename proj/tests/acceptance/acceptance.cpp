// One PASS/FAIL line per criterion; exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "cascade_infer/estimators.hpp"
#include "cascade_infer/oracle.hpp"
#include "cascade_infer/rng.hpp"
#include "cascade_infer/sample_size.hpp"
#include "cascade_infer/structure.hpp"
#include "cascade_infer/weights.hpp"
#include "reference.hpp"

using namespace cascade_infer;

namespace {

// Pinned tolerances.
constexpr double kSigmas = 3.0;
constexpr double kOracleSeconds = 60.0;
constexpr double kClosedFormTol = 1e-9;
constexpr double kResidualTol = 1e-9;
constexpr double kRoundTripTol = 1e-10;
constexpr double kRecoveryRate = 0.8;
constexpr double kTreeSeconds = 120.0;
constexpr double kSlopeLo = -0.65;
constexpr double kSlopeHi = -0.35;
constexpr double kHugeCountRelTol = 1e-13;

constexpr std::uint64_t kOracleSeed = 20261014;
constexpr std::uint64_t kTreeSeed = 4148;
constexpr std::uint64_t kBoundedSeed = 1003;
constexpr std::uint64_t kScalingSeed = 77;

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

const NoiseModel& geo() {
  static const NoiseModel m = NoiseModel::geometric(0.5);
  return m;
}

// Deterministic count inequalities, tallied over every bank the run produces.
struct CountAudit {
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;

  void expect(bool ok) {
    ++checks;
    violations += ok ? 0 : 1;
  }

  void audit(const EstimatorBank& bank, const std::optional<UndirectedEdgeSet>& tree) {
    const auto n = static_cast<NodeId>(bank.node_count());
    if (bank.has_times()) {
      for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) {
          expect(bank.order_lt_count(i, j) + bank.order_lt_count(j, i) <= bank.coinfect_count(i, j));
          expect(bank.only_pair_lt_count(i, j) + bank.only_pair_lt_count(j, i) <= bank.only_pair_count(i, j));
        }
      }
    }
    // h_set monotone under adding one node: S of size <= 1, or <= 2 on small graphs.
    const std::size_t max_base = n <= 10 ? 2 : 1;
    for (NodeId i = 0; i < n; ++i) {
      std::vector<NodeId> others;
      for (NodeId k = 0; k < n; ++k) {
        if (k != i) others.push_back(k);
      }
      std::vector<std::vector<NodeId>> bases;
      for (std::size_t a = 0; a < others.size(); ++a) {
        bases.push_back({others[a]});
        if (max_base >= 2) {
          for (std::size_t b = a + 1; b < others.size(); ++b) bases.push_back({others[a], others[b]});
        }
      }
      for (const auto& base : bases) {
        const auto c = bank.h_set_count(i, base);
        for (NodeId k : others) {
          if (std::find(base.begin(), base.end(), k) != base.end()) continue;
          auto grown = base;
          grown.push_back(k);
          expect(c <= bank.h_set_count(i, grown));
        }
      }
    }
    if (tree) {
      // co-infection along a tree path cannot exceed that of any sub-path
      for (NodeId a = 0; a < n; ++a) {
        for (NodeId b = a + 1; b < n; ++b) {
          const auto path = tree_path(*tree, bank.node_count(), a, b);
          for (std::size_t m = 1; m + 1 < path.size(); ++m) {
            expect(bank.coinfect_count(a, b) <= bank.coinfect_count(a, path[m]));
            expect(bank.coinfect_count(a, b) <= bank.coinfect_count(path[m], b));
          }
          for (std::size_t m = 0; m + 1 < path.size(); ++m) {
            expect(bank.coinfect_count(a, b) <= bank.coinfect_count(path[m], path[m + 1]));
          }
        }
      }
    }
  }
} counts;

double max_weight_error(const WeightEstimate& est, const WeightedDigraph& g) {
  double worst = 0.0;
  const auto n = static_cast<NodeId>(g.node_count());
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i == j) continue;
      worst = std::max(worst, std::abs(est.p_hat(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) -
                                       g.weight(i, j)));
    }
  }
  return worst;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const auto sk = s_table(geo());
  constexpr std::uint64_t kM = 100'000;
  std::uint64_t checks = 0, misses = 0;
  double worst_z = 0.0;
  std::string where;
  std::uint64_t graph_index = 0;
  for (const auto& named : ref::battery()) {
    const auto& g = named.graph;
    const ExactLimits lim(enumerate(g), sk);
    const auto bank = accumulate_simulated(g, geo(), kM, 1, derive_seed(kOracleSeed, graph_index++),
                                           ObservationMode::limited_noise);
    counts.audit(bank, named.tree ? std::optional(g.skeleton()) : std::nullopt);
    const auto check = [&](const char* family, int i, int j, double mc, double exact) {
      ++checks;
      const double sigma = std::sqrt(std::max(0.0, exact * (1.0 - exact)) / static_cast<double>(kM));
      const double diff = std::abs(mc - exact);
      bool ok;
      double z = 0.0;
      if (sigma == 0.0) {
        ok = std::abs(mc - exact) <= 1e-12;
        z = ok ? 0.0 : INFINITY;
      } else {
        z = diff / sigma;
        ok = z <= kSigmas;
      }
      if (z > worst_z) {
        worst_z = z;
        where = fmt("%s %s(%d,%d)", named.name, family, i, j);
      }
      if (!ok) {
        ++misses;
        std::printf("  miss: %s %s(%d,%d) mc=%.6f exact=%.6f z=%.2f\n", named.name, family, i, j, mc, exact, z);
      }
    };
    const auto n = static_cast<NodeId>(g.node_count());
    const auto nbrs = g.undirected_neighbors();
    for (NodeId i = 0; i < n; ++i) {
      check("e1", i, -1, bank.e1(i), lim.e1(i));
      const auto& ni = nbrs[static_cast<std::size_t>(i)];
      check("h_set_nbrs", i, -1, bank.h_set(i, ni), lim.h_set(i, ni));
      for (NodeId j = 0; j < n; ++j) {
        if (i == j) continue;
        if (i < j) {
          check("h", i, j, bank.h_pair(i, j), lim.h_pair(i, j));
          check("h2", i, j, bank.h2(i, j), lim.h2(i, j));
        }
        check("f", i, j, bank.f_lt(i, j), lim.f_lt(i, j));
        check("g", i, j, bank.g_excl(i, j), lim.g_excl(i, j));
        check("f2", i, j, bank.f2_lt(i, j), lim.f2_lt(i, j));
      }
    }
  }
  const double secs = seconds_since(start);
  report(misses == 0 && secs < kOracleSeconds, "oracle_equivalence",
         fmt("%llu values, %llu outside %.0f sigma, worst z=%.2f at %s, %.1fs", static_cast<unsigned long long>(checks),
             static_cast<unsigned long long>(misses), kSigmas, worst_z, where.c_str(), secs));
}

void closed_form_exactness() {
  double worst = 0.0;
  std::string where = "-";
  for (const auto& noise : {NoiseModel::geometric(0.5)}) {
    const auto sk = s_table(noise);
    for (const auto& named : ref::battery()) {
      const ExactLimits lim(enumerate(named.graph), sk);
      const double pw = max_weight_error(pairwise_weights(lim, sk), named.graph);
      if (pw > worst) {
        worst = pw;
        where = std::string(named.name) + " pairwise";
      }
      if (named.tree) {
        const double tw = max_weight_error(tree_weights(lim, named.graph.skeleton(), sk), named.graph);
        if (tw > worst) {
          worst = tw;
          where = std::string(named.name) + " tree";
        }
      }
    }
  }
  report(worst <= kClosedFormTol, "closed_form_exactness",
         fmt("max |p_hat - p| = %.3g (%s), tolerance %.0e", worst, where.c_str(), kClosedFormTol));
}

std::vector<NoiseModel> grid_noise_models() {
  return {NoiseModel::geometric(0.5), NoiseModel::geometric(0.3),
          NoiseModel::from_pmf({{0, 0.5}, {1, 0.3}, {2, 0.2}})};
}

void quadratic_grid() {
  double worst_res = 0.0, worst_trip = 0.0;
  int models = 0;
  for (const auto& noise : grid_noise_models()) {
    ++models;
    const auto sk = s_table(noise);
    const double s0 = sk.s0(), s2 = sk.s2();
    for (int a = 0; a < 50; ++a) {
      for (int b = 0; b < 50; ++b) {
        const double pij = 0.8 * a / 49.0, pji = 0.8 * b / 49.0;
        const double vij = ref::v_forward(pij, pji, s0, s2), vji = ref::v_forward(pji, pij, s0, s2);
        const auto sol = solve_pair({vij, vji}, s0, s2);
        const auto res = [&](double x, double y, double p) {
          return std::abs(y * s2 - x * s0 + (s0 * s0 - s2 * s2) * p + (x * s2 - y * s0) * p * p);
        };
        worst_res = std::max({worst_res, res(vij, vji, sol.p_ij), res(vji, vij, sol.p_ji)});
        worst_trip = std::max({worst_trip, std::abs(sol.p_ij - pij), std::abs(sol.p_ji - pji)});
      }
    }
  }
  report(models >= 3 && worst_res <= kResidualTol && worst_trip <= kRoundTripTol, "quadratic_grid",
         fmt("%d noise models x 2500 points, max residual %.3g, max round-trip %.3g", models, worst_res, worst_trip));
}

void delta_bound() {
  constexpr double p_max = 0.8;
  std::uint64_t violations = 0, points = 0;
  double tightest = INFINITY;
  for (const auto& noise : grid_noise_models()) {
    const auto sk = s_table(noise);
    const double s0 = sk.s0(), s2 = sk.s2();
    const double bound = delta_lower_bound(s0, s2, p_max);
    for (int a = 0; a < 50; ++a) {
      for (int b = 0; b < 50; ++b) {
        const double pij = p_max * a / 49.0, pji = p_max * b / 49.0;
        const VPair v{ref::v_forward(pij, pji, s0, s2), ref::v_forward(pji, pij, s0, s2)};
        const double d = pair_discriminant(v, s0, s2);
        ++points;
        violations += d >= bound ? 0 : 1;
        tightest = std::min(tightest, d / bound);
      }
    }
  }
  report(violations == 0, "delta_bound",
         fmt("%llu points, %llu violations, min Delta/bound = %.4f", static_cast<unsigned long long>(points),
             static_cast<unsigned long long>(violations), tightest));
}

void tree_structure() {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t m = m_tree_structure(20, 0.1, 0.2, 0.8);
  int exact = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto g = random_tree(20, {0.2, 0.8}, derive_seed(kTreeSeed, 2 * s));
    const auto bank = accumulate_simulated(g, geo(), m, 1, derive_seed(kTreeSeed, 2 * s + 1),
                                           ObservationMode::extreme_noise);
    counts.audit(bank, g.skeleton());
    exact += learn_tree_from(bank).edges == g.skeleton() ? 1 : 0;
  }
  const double secs = seconds_since(start);
  report(exact >= kRecoveryRate * 20 && secs < kTreeSeconds, "tree_structure",
         fmt("N=20 M=%llu: exact recovery %d/20, %.1fs", static_cast<unsigned long long>(m), exact, secs));
}

void bounded_structure() {
  constexpr std::size_t n = 10, d = 3;
  constexpr WeightBounds bounds{0.2, 0.5};
  const std::uint64_t m = m_bounded_structure(n, d, 0.1, bounds.p_min, bounds.p_max);
  int exact = 0;
  std::uint64_t sep_checks = 0, sep_violations = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto g = random_bounded_degree(n, d, 0.5, bounds, derive_seed(kBoundedSeed, 2 * s));
    const auto bank = accumulate_simulated(g, geo(), m, 1, derive_seed(kBoundedSeed, 2 * s + 1),
                                           ObservationMode::extreme_noise);
    counts.audit(bank, is_tree(g.skeleton(), n) ? std::optional(g.skeleton()) : std::nullopt);
    exact += learn_bounded_degree(bank, d).edges == g.skeleton() ? 1 : 0;
    const auto nbrs = g.undirected_neighbors();
    for (NodeId i = 0; i < static_cast<NodeId>(n); ++i) {
      const auto& ni = nbrs[static_cast<std::size_t>(i)];
      const std::uint64_t top = ni.empty() ? 0 : bank.h_set_count(i, ni);
      std::vector<NodeId> others;
      for (NodeId k = 0; k < static_cast<NodeId>(n); ++k) {
        if (k != i) others.push_back(k);
      }
      for (std::size_t size = 1; size <= d; ++size) {
        std::vector<std::size_t> idx(size);
        for (std::size_t t = 0; t < size; ++t) idx[t] = t;
        while (true) {
          std::vector<NodeId> set;
          for (auto t : idx) set.push_back(others[t]);
          ++sep_checks;
          sep_violations += top >= bank.h_set_count(i, set) ? 0 : 1;
          std::size_t t = size;
          while (t > 0 && idx[t - 1] == others.size() - size + t - 1) --t;
          if (t == 0) break;
          ++idx[t - 1];
          for (std::size_t u = t; u < size; ++u) idx[u] = idx[u - 1] + 1;
        }
      }
    }
  }
  report(exact >= kRecoveryRate * 20 && sep_violations == 0, "bounded_structure",
         fmt("N=10 d=3 p=[0.2,0.5] M=%llu: exact recovery %d/20, separator %llu checks %llu violations",
             static_cast<unsigned long long>(m), exact, static_cast<unsigned long long>(sep_checks),
             static_cast<unsigned long long>(sep_violations)));
}

void weight_scaling() {
  const auto sk = s_table(geo());
  const std::vector<std::uint64_t> ms{10'000, 100'000, 1'000'000};
  std::vector<double> medians;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    std::vector<double> errs;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto g = random_bounded_degree(4, 2, 1.0, {0.3, 0.6}, derive_seed(kScalingSeed, s));
      const auto bank = accumulate_simulated(g, geo(), ms[k], 1, derive_seed(derive_seed(kScalingSeed, 100 + s), k),
                                             ObservationMode::limited_noise);
      counts.audit(bank, std::nullopt);
      errs.push_back(max_weight_error(pairwise_weights(bank, sk), g));
    }
    medians.push_back(median(errs));
  }
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    mx += std::log(static_cast<double>(ms[k]));
    my += std::log(medians[k]);
  }
  mx /= static_cast<double>(ms.size());
  my /= static_cast<double>(ms.size());
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    const double x = std::log(static_cast<double>(ms[k])) - mx;
    sxy += x * (std::log(medians[k]) - my);
    sxx += x * x;
  }
  const double slope = sxy / sxx;
  const bool decreasing = medians[0] > medians[1] && medians[1] > medians[2];
  report(decreasing && slope >= kSlopeLo && slope <= kSlopeHi, "weight_scaling",
         fmt("median max-error %.4f / %.4f / %.4f at M=1e4/1e5/1e6, slope %.3f", medians[0], medians[1], medians[2],
             slope));
}

void count_inequalities() {
  report(counts.violations == 0 && counts.checks > 0, "count_inequalities",
         fmt("%llu exact checks over all simulated banks, %llu violations",
             static_cast<unsigned long long>(counts.checks), static_cast<unsigned long long>(counts.violations)));
}

void sample_sizes() {
  // Geometric q = 1/2: s0 = 2/3, s2 = 1/6.
  const double s0 = 2.0 / 3.0, s2 = 1.0 / 6.0;
  std::vector<std::string> bad;
  const auto expect = [&](const char* what, std::uint64_t got, std::uint64_t want) {
    if (got != want) bad.push_back(fmt("%s=%llu (want %llu)", what, static_cast<unsigned long long>(got),
                                       static_cast<unsigned long long>(want)));
  };
  expect("m_tree_structure(20,.1,.2,.8)", m_tree_structure(20, 0.1, 0.2, 0.8), 4148);
  expect("m_tree_structure(10,.1,.2,.8)", m_tree_structure(10, 0.1, 0.2, 0.8), 1727);
  expect("m_bounded_structure(10,3,.1,.2,.5)", m_bounded_structure(10, 3, 0.1, 0.2, 0.5), 11932);
  expect("m_bounded_structure(10,1,.1,.2,.5)", m_bounded_structure(10, 1, 0.1, 0.2, 0.5), 461);
  expect("m_tree_weights(5,.1,.1,q=.5,.8)", m_tree_weights(5, 0.1, 0.1, s0, s2, 0.8), 387509);
  const auto bw = m_bounded_weights(4, 2, 0.1, 0.1, 0.2, 0.8, s0, s2);
  const double bw_hand = 5909688998725735.0;
  if (!bw || std::abs(static_cast<double>(*bw) - bw_hand) / bw_hand > kHugeCountRelTol) {
    bad.push_back(fmt("m_bounded_weights(4,2,.1,.1,.2,.8,q=.5)=%.17g", bw ? static_cast<double>(*bw) : -1.0));
  }
  if (m_bounded_weights(4, 2, 0.1, 0.1, 0.2, 0.8, 0.5, 0.0).has_value()) bad.push_back("s2=0 not flagged");
  std::string detail = bad.empty() ? "all hand-computed values reproduced" : "";
  for (const auto& b : bad) detail += b + "; ";
  report(bad.empty(), "sample_sizes", detail);
}

}  // namespace

int main() {
  oracle_equivalence();
  closed_form_exactness();
  quadratic_grid();
  delta_bound();
  tree_structure();
  bounded_structure();
  weight_scaling();
  count_inequalities();
  sample_sizes();
  std::printf("%s: %d failed\n", failures == 0 ? "ALL PASS" : "SOME FAILED", failures);
  return failures == 0 ? 0 : 1;
}
