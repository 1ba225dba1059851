#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cascade_infer/graph.hpp"
#include "cascade_infer/noise.hpp"
#include "cascade_infer/rng.hpp"

namespace cascade_infer {

/// Discrete infection time; kNever for nodes that were never infected.
using Time = std::int64_t;
inline constexpr Time kNever = std::numeric_limits<Time>::max();

struct CascadeRecord {
  NodeId source = 0;
  Time t0 = 1;
  std::vector<Time> t_true;
  std::vector<Time> t_noisy;
  std::vector<bool> infected;

  bool operator==(const CascadeRecord&) const = default;
};

/// Structural invariant violations of a record simulated on `g` (empty when
/// the record is consistent with the propagation and observation models).
std::vector<std::string> check_record(const WeightedDigraph& g, const CascadeRecord& record);

struct Provenance {
  std::uint64_t graph_hash = 0;
  std::string noise_spec;
  std::uint64_t seed = 0;

  bool operator==(const Provenance&) const = default;
};

struct CascadeSet {
  std::size_t node_count = 0;
  std::vector<CascadeRecord> records;
  Provenance provenance;

  std::size_t size() const noexcept { return records.size(); }
  bool operator==(const CascadeSet&) const = default;
};

/// Discrete-time SIR independent cascade. Holds scratch buffers, so one
/// simulator per thread.
class CascadeSimulator {
 public:
  CascadeSimulator(const WeightedDigraph& g, const NoiseModel& noise);

  /// Overwrites `out`, reusing its storage. The source is uniform over the
  /// nodes; every node infected at time t gets one chance at t+1 to infect
  /// each still-susceptible out-neighbor, then is removed.
  void run(Time t0, Rng& rng, CascadeRecord& out);

 private:
  const WeightedDigraph& graph_;
  const NoiseModel& noise_;
  std::vector<NodeId> frontier_;
  std::vector<NodeId> next_;
};

CascadeRecord simulate_one(const WeightedDigraph& g, const NoiseModel& noise, Time t0, Rng& rng);

/// Record m is drawn from Rng(derive_seed(seed, m)); the result does not
/// depend on `threads` (0 = default_thread_count()).
CascadeSet simulate_batch(const WeightedDigraph& g, const NoiseModel& noise, std::size_t count,
                          Time t0, std::uint64_t seed, std::size_t threads = 0);

enum class ObservationMode { no_noise, limited_noise, extreme_noise };

std::string_view to_string(ObservationMode mode);

/// Accepts "no_noise"/"none", "limited_noise"/"limited", "extreme_noise"/"extreme".
ObservationMode parse_observation_mode(std::string_view text);

/// What an observer sees of a batch of cascades under one observation
/// setting. Times are the true times (no_noise), the noisy times
/// (limited_noise) or absent (extreme_noise); infection status is always
/// available. Accessors outside the setting throw AccessError.
class ObservationSet {
 public:
  ObservationSet(std::size_t node_count, ObservationMode mode);

  std::size_t node_count() const noexcept { return n_; }
  std::size_t size() const noexcept { return sources_.size(); }
  ObservationMode mode() const noexcept { return mode_; }
  bool has_times() const noexcept { return mode_ != ObservationMode::extreme_noise; }

  std::size_t words_per_row() const noexcept { return words_; }

  bool infected(std::size_t m, NodeId i) const;
  /// Packed infection bitset of cascade m (bit i of word i/64).
  std::span<const std::uint64_t> status_row(std::size_t m) const;

  /// The times this setting exposes.
  std::span<const Time> observed_times(std::size_t m) const;
  Time observed_time(std::size_t m, NodeId i) const;
  Time true_time(std::size_t m, NodeId i) const;
  Time noisy_time(std::size_t m, NodeId i) const;

  // Bookkeeping carried through files; not an input to any estimator.
  NodeId source(std::size_t m) const { return sources_.at(m); }
  Time start_time(std::size_t m) const { return starts_.at(m); }
  const Provenance& provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = std::move(p); }

  /// `times` must hold node_count() entries when has_times(), else be empty.
  void append(NodeId source, Time t0, const std::vector<bool>& infected, std::span<const Time> times);

 private:
  std::size_t n_;
  ObservationMode mode_;
  std::size_t words_;
  std::vector<std::uint64_t> status_;
  std::vector<Time> times_;
  std::vector<NodeId> sources_;
  std::vector<Time> starts_;
  Provenance provenance_;
};

ObservationSet restrict_observation(const CascadeSet& cascades, ObservationMode mode);

// Cascade file (tab separated):
//
//   #cascades  n=<n>  M=<M>  mode=<full|no_noise|limited_noise|extreme_noise>  graph_hash=<hex>  seed=<u64>  noise=<spec>
//   <id>  <source>  <t0>  <t_true|t_noisy|I>  ... one triple per node
//
// Unpopulated columns are "-", never-infected times are "inf", I is 0 or 1.

/// Writes every column (mode=full) or only those of `mode`.
void write_cascades(const CascadeSet& cascades, std::optional<ObservationMode> mode, std::ostream& out);
void write_cascades(const ObservationSet& obs, std::ostream& out);
void write_cascades(const CascadeSet& cascades, std::optional<ObservationMode> mode,
                    const std::filesystem::path& path);

/// Reads a cascade file as the requested setting. AccessError when the file
/// does not carry the columns that setting needs.
ObservationSet read_cascades(std::istream& in, ObservationMode mode);
ObservationSet read_cascades(const std::filesystem::path& path, ObservationMode mode);

/// Observation setting the file's columns support best.
ObservationMode cascade_file_mode(const std::filesystem::path& path);

}  // namespace cascade_infer
