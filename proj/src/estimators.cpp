#include "cascade_infer/estimators.hpp"

#include <bit>
#include <ostream>

#include "cascade_infer/errors.hpp"
#include "cascade_infer/parallel.hpp"

namespace cascade_infer {

namespace {

std::size_t idx(NodeId i) { return static_cast<std::size_t>(i); }

}  // namespace

EstimatorBank::EstimatorBank(std::size_t node_count, bool has_times)
    : n_(node_count),
      has_times_(has_times),
      infected_(node_count, 0),
      coinfect_(node_count, 0),
      order_lt_(node_count, 0),
      only_pair_(node_count, 0),
      only_pair_lt_(node_count, 0),
      only_single_(node_count, 0) {
  scratch_.reserve(node_count);
}

void EstimatorBank::add(std::span<const std::uint64_t> status, std::span<const Time> times) {
  const std::size_t words = (n_ + 63) / 64;
  if (status.size() != words) throw ParameterError("status row has wrong word count");
  if (has_times_ ? times.size() != n_ : !times.empty()) {
    throw ParameterError("time row does not match the bank's setting");
  }

  scratch_.clear();
  for (std::size_t w = 0; w < words; ++w) {
    for (std::uint64_t bits = status[w]; bits != 0; bits &= bits - 1) {
      scratch_.push_back(static_cast<NodeId>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
    }
  }

  ++m_;
  for (std::size_t a = 0; a < scratch_.size(); ++a) {
    const auto i = idx(scratch_[a]);
    ++infected_[i];
    for (std::size_t b = a + 1; b < scratch_.size(); ++b) {
      const auto j = idx(scratch_[b]);
      ++coinfect_(i, j);
      ++coinfect_(j, i);
      if (has_times_) {
        if (times[i] < times[j]) ++order_lt_(i, j);
        if (times[j] < times[i]) ++order_lt_(j, i);
      }
    }
  }
  if (scratch_.size() == 1) {
    ++only_single_[idx(scratch_[0])];
  } else if (scratch_.size() == 2) {
    const auto i = idx(scratch_[0]);
    const auto j = idx(scratch_[1]);
    ++only_pair_(i, j);
    ++only_pair_(j, i);
    if (has_times_) {
      if (times[i] < times[j]) ++only_pair_lt_(i, j);
      if (times[j] < times[i]) ++only_pair_lt_(j, i);
    }
  }

  auto it = patterns_.find(std::vector<std::uint64_t>(status.begin(), status.end()));
  if (it != patterns_.end()) {
    ++it->second;
  } else {
    patterns_.emplace(std::vector<std::uint64_t>(status.begin(), status.end()), 1);
  }
}

void EstimatorBank::merge(const EstimatorBank& other) {
  if (other.n_ != n_ || other.has_times_ != has_times_) {
    throw ParameterError("cannot merge banks with different node counts or settings");
  }
  m_ += other.m_;
  const auto add_all = [](auto& dst, const auto& src) {
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  };
  add_all(infected_, other.infected_);
  add_all(only_single_, other.only_single_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      coinfect_(i, j) += other.coinfect_(i, j);
      order_lt_(i, j) += other.order_lt_(i, j);
      only_pair_(i, j) += other.only_pair_(i, j);
      only_pair_lt_(i, j) += other.only_pair_lt_(i, j);
    }
  }
  for (const auto& [pattern, count] : other.patterns_) patterns_[pattern] += count;
}

bool EstimatorBank::operator==(const EstimatorBank& o) const {
  return n_ == o.n_ && has_times_ == o.has_times_ && m_ == o.m_ && infected_ == o.infected_ &&
         coinfect_ == o.coinfect_ && order_lt_ == o.order_lt_ && only_pair_ == o.only_pair_ &&
         only_pair_lt_ == o.only_pair_lt_ && only_single_ == o.only_single_ && patterns_ == o.patterns_;
}

void EstimatorBank::check_node(NodeId i) const {
  if (i < 0 || idx(i) >= n_) throw ParameterError("node " + std::to_string(i) + " out of range");
}

void EstimatorBank::check_pair(NodeId i, NodeId j) const {
  check_node(i);
  check_node(j);
  if (i == j) throw ParameterError("pair estimators need two distinct nodes");
}

void EstimatorBank::check_times() const {
  if (!has_times_) {
    throw AccessError("time-ordered estimators need observed times; bank was built from infection status only");
  }
}

double EstimatorBank::fraction(std::uint64_t count) const {
  if (m_ == 0) throw ParameterError("estimator bank holds no cascades");
  return static_cast<double>(count) / static_cast<double>(m_);
}

std::uint64_t EstimatorBank::infected_count(NodeId i) const {
  check_node(i);
  return infected_[idx(i)];
}

std::uint64_t EstimatorBank::coinfect_count(NodeId i, NodeId j) const {
  check_pair(i, j);
  return coinfect_(idx(i), idx(j));
}

std::uint64_t EstimatorBank::order_lt_count(NodeId i, NodeId j) const {
  check_pair(i, j);
  check_times();
  return order_lt_(idx(i), idx(j));
}

std::uint64_t EstimatorBank::excl_count(NodeId i, NodeId j) const {
  check_pair(i, j);
  return infected_[idx(i)] - coinfect_(idx(i), idx(j));
}

std::uint64_t EstimatorBank::only_pair_count(NodeId i, NodeId j) const {
  check_pair(i, j);
  return only_pair_(idx(i), idx(j));
}

std::uint64_t EstimatorBank::only_pair_lt_count(NodeId i, NodeId j) const {
  check_pair(i, j);
  check_times();
  return only_pair_lt_(idx(i), idx(j));
}

std::uint64_t EstimatorBank::only_single_count(NodeId i) const {
  check_node(i);
  return only_single_[idx(i)];
}

std::uint64_t EstimatorBank::h_set_count(NodeId i, std::span<const NodeId> set) const {
  check_node(i);
  if (set.empty()) throw ParameterError("h_set needs a non-empty node set");
  const std::size_t words = (n_ + 63) / 64;
  std::vector<std::uint64_t> mask(words, 0);
  for (NodeId s : set) {
    check_node(s);
    if (s == i) throw ParameterError("h_set: node " + std::to_string(i) + " must not belong to the set");
    mask[idx(s) / 64] |= std::uint64_t{1} << (idx(s) % 64);
  }
  const std::size_t iw = idx(i) / 64;
  const std::uint64_t ibit = std::uint64_t{1} << (idx(i) % 64);
  std::uint64_t total = 0;
  for (const auto& [pattern, count] : patterns_) {
    if ((pattern[iw] & ibit) == 0) continue;
    for (std::size_t w = 0; w < words; ++w) {
      if (pattern[w] & mask[w]) {
        total += count;
        break;
      }
    }
  }
  return total;
}

double EstimatorBank::h_pair(NodeId i, NodeId j) const { return fraction(coinfect_count(i, j)); }
double EstimatorBank::f_lt(NodeId i, NodeId j) const { return fraction(order_lt_count(i, j)); }
double EstimatorBank::g_excl(NodeId i, NodeId j) const { return fraction(excl_count(i, j)); }
double EstimatorBank::h2(NodeId i, NodeId j) const { return fraction(only_pair_count(i, j)); }
double EstimatorBank::f2_lt(NodeId i, NodeId j) const { return fraction(only_pair_lt_count(i, j)); }
double EstimatorBank::e1(NodeId i) const { return fraction(only_single_count(i)); }
double EstimatorBank::h_set(NodeId i, std::span<const NodeId> set) const {
  return fraction(h_set_count(i, set));
}

EstimatorBank accumulate(const ObservationSet& obs) {
  EstimatorBank bank(obs.node_count(), obs.has_times());
  for (std::size_t m = 0; m < obs.size(); ++m) {
    bank.add(obs.status_row(m), obs.has_times() ? obs.observed_times(m) : std::span<const Time>{});
  }
  return bank;
}

EstimatorBank accumulate_simulated(const WeightedDigraph& g, const NoiseModel& noise, std::size_t count,
                                   Time t0, std::uint64_t seed, ObservationMode mode, std::size_t threads) {
  if (count == 0) throw ParameterError("cascade count must be at least 1");
  const std::size_t n = g.node_count();
  const bool timed = mode != ObservationMode::extreme_noise;
  std::vector<EstimatorBank> shards(chunk_count(count, threads), EstimatorBank(n, timed));
  parallel_chunks(count, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    CascadeSimulator sim(g, noise);
    CascadeRecord record;
    std::vector<std::uint64_t> status((n + 63) / 64);
    auto& bank = shards[chunk];
    for (std::size_t m = begin; m < end; ++m) {
      Rng rng(derive_seed(seed, m));
      sim.run(t0, rng, record);
      std::fill(status.begin(), status.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        if (record.infected[i]) status[i / 64] |= std::uint64_t{1} << (i % 64);
      }
      std::span<const Time> times;
      if (mode == ObservationMode::no_noise) times = record.t_true;
      if (mode == ObservationMode::limited_noise) times = record.t_noisy;
      bank.add(status, times);
    }
  });
  for (std::size_t c = 1; c < shards.size(); ++c) shards[0].merge(shards[c]);
  return std::move(shards[0]);
}

void write_bank_csv(const EstimatorBank& bank, std::ostream& out) {
  const std::size_t n = bank.node_count();
  out << "# M=" << bank.cascade_count() << " n=" << n << " times=" << (bank.has_times() ? 1 : 0) << '\n';
  out << "counter,i,j,count\n";
  const auto node_row = [&](const char* name, std::size_t i, std::uint64_t c) {
    if (c != 0) out << name << ',' << i << ",," << c << '\n';
  };
  const auto pair_row = [&](const char* name, std::size_t i, std::size_t j, std::uint64_t c) {
    if (c != 0) out << name << ',' << i << ',' << j << ',' << c << '\n';
  };
  for (std::size_t i = 0; i < n; ++i) {
    node_row("infected", i, bank.infected_count(static_cast<NodeId>(i)));
    node_row("only_single", i, bank.only_single_count(static_cast<NodeId>(i)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto a = static_cast<NodeId>(i);
      const auto b = static_cast<NodeId>(j);
      pair_row("coinfect", i, j, bank.coinfect_count(a, b));
      pair_row("excl", i, j, bank.excl_count(a, b));
      pair_row("only_pair", i, j, bank.only_pair_count(a, b));
      if (bank.has_times()) {
        pair_row("order_lt", i, j, bank.order_lt_count(a, b));
        pair_row("only_pair_lt", i, j, bank.only_pair_lt_count(a, b));
      }
    }
  }
}

}  // namespace cascade_infer
