#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cascade_infer/errors.hpp"
#include "cascade_infer/estimators.hpp"
#include "reference.hpp"

using namespace cascade_infer;

namespace {

ObservationSet hand_records() {
  ObservationSet obs(3, ObservationMode::limited_noise);
  const std::vector<Time> t1{2, 3, kNever};
  const std::vector<Time> t2{5, kNever, kNever};
  const std::vector<Time> t3{1, 3, 3};
  obs.append(0, 1, {true, true, false}, t1);
  obs.append(0, 1, {true, false, false}, t2);
  obs.append(0, 1, {true, true, true}, t3);
  return obs;
}

std::vector<std::vector<NodeId>> all_subsets_without(std::size_t n, NodeId skip) {
  std::vector<std::vector<NodeId>> out;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    if (mask >> skip & 1) continue;
    std::vector<NodeId> s;
    for (std::size_t v = 0; v < n; ++v) {
      if (mask >> v & 1) s.push_back(static_cast<NodeId>(v));
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("counts from three hand-written records") {
  const auto bank = accumulate(hand_records());
  CHECK(bank.cascade_count() == 3);
  CHECK(bank.coinfect_count(0, 1) == 2);
  CHECK(bank.coinfect_count(1, 0) == 2);
  CHECK(bank.order_lt_count(0, 1) == 2);
  CHECK(bank.order_lt_count(1, 0) == 0);
  CHECK(bank.only_pair_count(0, 1) == 1);
  CHECK(bank.only_pair_lt_count(0, 1) == 1);
  CHECK(bank.only_single_count(0) == 1);
  CHECK(bank.excl_count(0, 1) == 1);
  CHECK(bank.h_pair(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(bank.g_excl(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(bank.e1(0) == doctest::Approx(1.0 / 3.0));
  const std::vector<NodeId> s{1, 2};
  CHECK(bank.h_set(0, s) == doctest::Approx(2.0 / 3.0));
  SUBCASE("ties count in neither direction") {
    CHECK(bank.coinfect_count(1, 2) == 1);
    CHECK(bank.order_lt_count(1, 2) == 0);
    CHECK(bank.order_lt_count(2, 1) == 0);
  }
}

TEST_CASE("query errors") {
  const auto bank = accumulate(hand_records());
  CHECK_THROWS_AS(bank.h_pair(1, 1), ParameterError);
  CHECK_THROWS_AS(bank.f_lt(0, 0), ParameterError);
  CHECK_THROWS_AS(bank.h_pair(0, 3), ParameterError);
  const std::vector<NodeId> with_self{0, 1};
  CHECK_THROWS_AS(bank.h_set(0, with_self), ParameterError);
  CHECK_THROWS_AS(bank.h_set(0, std::vector<NodeId>{}), ParameterError);
  const EstimatorBank empty(3, true);
  CHECK_THROWS_AS(empty.h_pair(0, 1), ParameterError);

  ObservationSet ext(3, ObservationMode::extreme_noise);
  ext.append(0, 1, {true, true, false}, {});
  const auto sb = accumulate(ext);
  CHECK_FALSE(sb.has_times());
  CHECK(sb.h_pair(0, 1) == 1.0);
  CHECK_THROWS_AS(sb.f_lt(0, 1), AccessError);
  CHECK_THROWS_AS(sb.f2_lt(0, 1), AccessError);
  CHECK_THROWS_AS(sb.order_lt_count(0, 1), AccessError);
  CHECK(sb.h2(0, 1) == 1.0);
}

TEST_CASE("h_set with a singleton equals h_pair") {
  const auto g = random_bounded_degree(7, 3, 0.7, {0.2, 0.8}, 3);
  const auto bank = accumulate_simulated(g, NoiseModel::geometric(0.5), 20'000, 1, 4, ObservationMode::extreme_noise);
  for (NodeId i = 0; i < 7; ++i) {
    for (NodeId j = 0; j < 7; ++j) {
      if (i == j) continue;
      const std::vector<NodeId> s{j};
      CHECK(bank.h_set_count(i, s) == bank.coinfect_count(i, j));
    }
  }
}

TEST_CASE("sharded accumulation matches a single pass") {
  const auto g = random_tree(8, {0.2, 0.8}, 5);
  const auto noise = NoiseModel::geometric(0.5);
  const auto cs = simulate_batch(g, noise, 3000, 1, 17);
  for (auto mode : {ObservationMode::no_noise, ObservationMode::limited_noise, ObservationMode::extreme_noise}) {
    const auto obs = restrict_observation(cs, mode);
    const auto whole = accumulate(obs);
    std::vector<EstimatorBank> shards;
    const std::size_t cuts[] = {0, 700, 701, 2100, 3000};
    for (std::size_t c = 0; c + 1 < std::size(cuts); ++c) {
      EstimatorBank b(8, obs.has_times());
      for (std::size_t m = cuts[c]; m < cuts[c + 1]; ++m) {
        b.add(obs.status_row(m), obs.has_times() ? obs.observed_times(m) : std::span<const Time>{});
      }
      shards.push_back(b);
    }
    EstimatorBank forward(8, obs.has_times());
    for (const auto& s : shards) forward.merge(s);
    EstimatorBank backward(8, obs.has_times());
    for (auto it = shards.rbegin(); it != shards.rend(); ++it) backward.merge(*it);
    CHECK(forward == whole);
    CHECK(backward == whole);
    for (std::size_t threads : {1, 2, 5}) {
      CHECK(accumulate_simulated(g, noise, 3000, 1, 17, mode, threads) == whole);
    }
  }
  EstimatorBank other(9, true);
  EstimatorBank mine(8, true);
  CHECK_THROWS_AS(mine.merge(other), ParameterError);
}

TEST_CASE("2-node f2 fraction matches 5/24") {
  const auto bank =
      accumulate_simulated(ref::two_node(), NoiseModel::geometric(0.5), 100'000, 1, 3, ObservationMode::limited_noise);
  const double p = 5.0 / 24.0;
  const double sigma = std::sqrt(p * (1 - p) / 1e5);
  CHECK(std::abs(bank.f2_lt(0, 1) - p) <= 3 * sigma);
}

TEST_CASE("count invariants on simulated data") {
  const auto noise = NoiseModel::geometric(0.5);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto g = random_bounded_degree(7, 3, 0.8, {0.2, 0.8}, seed);
    const auto bank = accumulate_simulated(g, noise, 20'000, 1, seed, ObservationMode::limited_noise);
    const auto m = bank.cascade_count();
    for (NodeId i = 0; i < 7; ++i) {
      CHECK(bank.infected_count(i) <= m);
      for (NodeId j = 0; j < 7; ++j) {
        if (i == j) continue;
        CHECK(bank.coinfect_count(i, j) == bank.coinfect_count(j, i));
        CHECK(bank.order_lt_count(i, j) + bank.order_lt_count(j, i) <= bank.coinfect_count(i, j));
        CHECK(bank.only_pair_count(i, j) <= bank.coinfect_count(i, j));
        CHECK(bank.only_pair_lt_count(i, j) + bank.only_pair_lt_count(j, i) <= bank.only_pair_count(i, j));
        CHECK(bank.coinfect_count(i, j) + bank.excl_count(i, j) == bank.infected_count(i));
      }
    }
  }
}

TEST_CASE("no-noise times have no ties between neighbors so f + f = h on adjacent pairs") {
  const auto g = ref::two_node();
  const auto bank =
      accumulate_simulated(g, NoiseModel::geometric(0.5), 5000, 1, 8, ObservationMode::no_noise);
  CHECK(bank.order_lt_count(0, 1) + bank.order_lt_count(1, 0) == bank.coinfect_count(0, 1));
}

TEST_CASE("tree path property holds exactly on counts") {
  const auto noise = NoiseModel::geometric(0.5);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = random_tree(9, {0.2, 0.8}, seed);
    const auto bank = accumulate_simulated(g, noise, 10'000, 1, seed, ObservationMode::extreme_noise);
    const auto tree = g.skeleton();
    for (NodeId a = 0; a < 9; ++a) {
      for (NodeId b = a + 1; b < 9; ++b) {
        const auto path = tree_path(tree, 9, a, b);
        for (std::size_t r = 0; r + 1 < path.size(); ++r) {
          CHECK(bank.coinfect_count(a, b) <= bank.coinfect_count(path[r], path[r + 1]));
        }
      }
    }
  }
}

TEST_CASE("separator property and h_set monotonicity hold exactly") {
  const auto noise = NoiseModel::geometric(0.5);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto g = random_bounded_degree(6, 2, 0.9, {0.2, 0.8}, seed);
    const auto bank = accumulate_simulated(g, noise, 10'000, 1, seed, ObservationMode::extreme_noise);
    const auto nbrs = g.undirected_neighbors();
    for (NodeId i = 0; i < 6; ++i) {
      const auto subsets = all_subsets_without(6, i);
      for (const auto& s : subsets) {
        if (!nbrs[static_cast<std::size_t>(i)].empty()) {
          CHECK(bank.h_set_count(i, nbrs[static_cast<std::size_t>(i)]) >= bank.h_set_count(i, s));
        }
        for (NodeId extra = 0; extra < 6; ++extra) {
          if (extra == i || std::find(s.begin(), s.end(), extra) != s.end()) continue;
          auto bigger = s;
          bigger.push_back(extra);
          CHECK(bank.h_set_count(i, s) <= bank.h_set_count(i, bigger));
        }
      }
    }
  }
}

TEST_CASE("bank csv dump") {
  std::ostringstream out;
  write_bank_csv(accumulate(hand_records()), out);
  const std::string text = out.str();
  CHECK(text.rfind("# M=3 n=3 times=1\ncounter,i,j,count\n", 0) == 0);
  CHECK(text.find("coinfect,0,1,2\n") != std::string::npos);
  CHECK(text.find("only_single,0,,1\n") != std::string::npos);
  CHECK(text.find("order_lt,1,0,") == std::string::npos);
}
