#include "cascade_infer/oracle.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <ostream>

#include "cascade_infer/errors.hpp"
#include "cascade_infer/text.hpp"

namespace cascade_infer {

double OutcomeDistribution::total_mass() const {
  double total = 0.0;
  for (const auto& o : outcomes_) total += o.prob;
  return total;
}

namespace {

class Enumerator {
 public:
  Enumerator(const WeightedDigraph& g, std::vector<Outcome>& out) : g_(g), out_(out), times_(g.node_count(), kNever) {}

  void run_source(NodeId s, Time t0, double prob) {
    std::fill(times_.begin(), times_.end(), kNever);
    source_ = s;
    times_[static_cast<std::size_t>(s)] = t0;
    step({s}, t0, prob);
  }

 private:
  void step(const std::vector<NodeId>& frontier, Time t, double prob) {
    std::map<NodeId, double> escape;  // target -> product of (1 - p) over frontier parents
    for (NodeId u : frontier) {
      for (const auto& e : g_.out_edges(u)) {
        if (times_[static_cast<std::size_t>(e.target)] != kNever) continue;
        auto [it, fresh] = escape.try_emplace(e.target, 1.0);
        it->second *= 1.0 - e.weight;
      }
    }
    std::vector<NodeId> targets;
    std::vector<double> hit;
    for (const auto& [v, q] : escape) {
      targets.push_back(v);
      hit.push_back(1.0 - q);
    }
    if (targets.empty()) {
      record(prob);
      return;
    }
    const std::size_t k = targets.size();
    std::vector<NodeId> next;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      double branch = prob;
      next.clear();
      for (std::size_t b = 0; b < k && branch > 0.0; ++b) {
        if (mask >> b & 1) {
          branch *= hit[b];
          next.push_back(targets[b]);
        } else {
          branch *= 1.0 - hit[b];
        }
      }
      if (branch <= 0.0) continue;
      if (next.empty()) {
        record(branch);
        continue;
      }
      for (NodeId v : next) times_[static_cast<std::size_t>(v)] = t + 1;
      step(next, t + 1, branch);
      for (NodeId v : next) times_[static_cast<std::size_t>(v)] = kNever;
    }
  }

  void record(double prob) {
    Outcome o;
    o.prob = prob;
    o.source = source_;
    o.times = times_;
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (times_[i] != kNever) o.status |= std::uint64_t{1} << i;
    }
    out_.push_back(std::move(o));
  }

  const WeightedDigraph& g_;
  std::vector<Outcome>& out_;
  std::vector<Time> times_;
  NodeId source_ = 0;
};

bool bit(std::uint64_t status, std::size_t i) { return (status >> i & 1) != 0; }

}  // namespace

OutcomeDistribution enumerate(const WeightedDigraph& g, Time t0, std::size_t node_cap) {
  const std::size_t n = g.node_count();
  if (n == 0) throw ParameterError("cannot enumerate cascades on an empty graph");
  if (n > node_cap || n > 63) {
    throw ResourceError("exact enumeration limited to " + std::to_string(std::min<std::size_t>(node_cap, 63)) +
                        " nodes (graph has " + std::to_string(n) + ")");
  }
  if (t0 < 1) throw ParameterError("start time must be at least 1");
  std::vector<Outcome> outcomes;
  Enumerator e(g, outcomes);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t s = 0; s < n; ++s) e.run_source(static_cast<NodeId>(s), t0, w);
  return OutcomeDistribution(g, t0, std::move(outcomes));
}

ExactLimits::ExactLimits(const OutcomeDistribution& dist, const SkTable& sk)
    : n_(dist.graph().node_count()),
      h_(n_, 0.0),
      f_(n_, 0.0),
      g_(n_, 0.0),
      h2_(n_, 0.0),
      f2_(n_, 0.0),
      e1_(n_, 0.0) {
  std::map<std::uint64_t, double> by_status;
  const auto order = [&](Time ti, Time tj) {
    const Time k = ti - tj + 1;
    if (k < -(1 << 30) || k > (1 << 30)) throw ParameterError("time span too large for s_k lookup");
    return sk.at(static_cast<int>(k));
  };
  for (const auto& o : dist.outcomes()) {
    by_status[o.status] += o.prob;
    const int size = std::popcount(o.status);
    if (size == 1) e1_[static_cast<std::size_t>(std::countr_zero(o.status))] += o.prob;
    if (size >= 3) large_ += o.prob;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!bit(o.status, i)) continue;
      for (std::size_t j = 0; j < n_; ++j) {
        if (j == i) continue;
        if (!bit(o.status, j)) {
          g_(i, j) += o.prob;
          continue;
        }
        const double p_order = o.prob * order(o.times[i], o.times[j]);
        h_(i, j) += o.prob;
        f_(i, j) += p_order;
        if (size == 2) {
          h2_(i, j) += o.prob;
          f2_(i, j) += p_order;
        }
      }
    }
  }
  status_mass_.assign(by_status.begin(), by_status.end());
}

void ExactLimits::check_pair(NodeId i, NodeId j) const {
  if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n_ || static_cast<std::size_t>(j) >= n_) {
    throw ParameterError("node out of range");
  }
  if (i == j) throw ParameterError("pair limits need two distinct nodes");
}

double ExactLimits::h_pair(NodeId i, NodeId j) const {
  check_pair(i, j);
  return h_(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}
double ExactLimits::f_lt(NodeId i, NodeId j) const {
  check_pair(i, j);
  return f_(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}
double ExactLimits::g_excl(NodeId i, NodeId j) const {
  check_pair(i, j);
  return g_(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}
double ExactLimits::h2(NodeId i, NodeId j) const {
  check_pair(i, j);
  return h2_(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}
double ExactLimits::f2_lt(NodeId i, NodeId j) const {
  check_pair(i, j);
  return f2_(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}
double ExactLimits::e1(NodeId i) const {
  if (i < 0 || static_cast<std::size_t>(i) >= n_) throw ParameterError("node out of range");
  return e1_[static_cast<std::size_t>(i)];
}
double ExactLimits::v(NodeId i, NodeId j) const {
  const double denom = h2(i, j) + static_cast<double>(n_) * e1(i) * e1(j);
  return denom > 0.0 ? f2_lt(i, j) / denom : 0.0;
}

double ExactLimits::h_set(NodeId i, std::span<const NodeId> set) const {
  if (i < 0 || static_cast<std::size_t>(i) >= n_) throw ParameterError("node out of range");
  if (set.empty()) throw ParameterError("h_set needs a non-empty node set");
  std::uint64_t mask = 0;
  for (NodeId s : set) {
    if (s < 0 || static_cast<std::size_t>(s) >= n_ || s == i) throw ParameterError("invalid h_set member");
    mask |= std::uint64_t{1} << s;
  }
  double total = 0.0;
  for (const auto& [status, prob] : status_mass_) {
    if (bit(status, static_cast<std::size_t>(i)) && (status & mask) != 0) total += prob;
  }
  return total;
}

double path_prob(const OutcomeDistribution& dist, NodeId i, NodeId j) {
  const auto& g = dist.graph();
  const std::size_t n = g.node_count();
  if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n || i == j) {
    throw ParameterError("path_prob needs two distinct nodes of the graph");
  }
  const auto skeleton = g.skeleton();
  if (!is_tree(skeleton, n)) throw ParameterError("path_prob is defined on trees only");
  const auto path = tree_path(skeleton, n, i, j);
  double total = 0.0;
  for (const auto& o : dist.outcomes()) {
    const Time ti = o.times[static_cast<std::size_t>(i)];
    if (ti == kNever) continue;
    bool first = true;
    for (std::size_t k = 1; k < path.size() && first; ++k) first = ti < o.times[static_cast<std::size_t>(path[k])];
    if (first) total += o.prob;
  }
  return total;
}

void write_limits_csv(const OutcomeDistribution& dist, const ExactLimits& lim, std::ostream& out) {
  const std::size_t n = lim.node_count();
  out << "quantity,i,j,value\n";
  for (std::size_t i = 0; i < n; ++i) out << "e1," << i << ",," << format_double(lim.e1(static_cast<NodeId>(i))) << '\n';
  const bool tree = is_tree(dist.graph().skeleton(), n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto a = static_cast<NodeId>(i);
      const auto b = static_cast<NodeId>(j);
      const auto row = [&](const char* name, double value) {
        out << name << ',' << i << ',' << j << ',' << format_double(value) << '\n';
      };
      row("h_pair", lim.h_pair(a, b));
      row("f_lt", lim.f_lt(a, b));
      row("g_excl", lim.g_excl(a, b));
      row("h2", lim.h2(a, b));
      row("f2_lt", lim.f2_lt(a, b));
      row("v", lim.v(a, b));
      if (tree) row("path_prob", path_prob(dist, a, b));
    }
  }
}

}  // namespace cascade_infer
