#pragma once

// Slot-level Monte Carlo simulation of the relay-assisted random access
// protocol.
//
// Per slot: attempt coins, collision resolution on the shared channel, direct
// delivery or relay capture of a sole source packet, relay forwarding, then
// Bernoulli arrivals that become eligible in the next slot.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "relaystab/model.hpp"

namespace relaystab::sim {

enum class ModeKind {
  Original,
  /// S1 sends dummy packets with probability q1 whenever its queue is empty.
  DominantS1,
  DominantS2,
  /// The relay has its own orthogonal channel, transmits whenever backlogged
  /// and overhears the sources in every slot.
  OuterModified,
};

std::string_view to_string(ModeKind kind) noexcept;
std::optional<ModeKind> parse_mode(std::string_view name) noexcept;

struct SimMode {
  ModeKind kind = ModeKind::Original;
  /// Relay transmissions also fail whenever a source attempt coin fires,
  /// whether or not that source has a packet. Only valid in dominant modes.
  bool pessimistic_relay_interference = false;

  bool operator==(const SimMode&) const = default;
};

inline constexpr std::uint64_t kMinHorizon = 10'000;

struct SimConfig {
  SystemParams params;
  ArrivalPoint point;
  SimMode mode;
  std::uint64_t horizon = 1'000'000;
  std::uint64_t warmup = 100'000;
  std::uint64_t seed = 1;
  std::uint64_t sample_stride = 1'000;

  bool operator==(const SimConfig&) const = default;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws ConfigError describing the first problem found.
void validate(const SimConfig& config);

struct SourceCounters {
  std::uint64_t arrivals = 0;
  std::uint64_t direct_deliveries = 0;
  std::uint64_t relay_captures = 0;
  /// Packets that left the queue (direct deliveries plus relay captures).
  std::uint64_t departures = 0;
  /// Slots in which the source transmitted, dummy packets included.
  std::uint64_t attempts = 0;
  std::uint64_t dummy_attempts = 0;
  std::uint64_t backlogged_slots = 0;

  bool operator==(const SourceCounters&) const = default;
};

struct RelayCounters {
  std::uint64_t deliveries = 0;
  std::uint64_t attempts = 0;
  std::uint64_t backlogged_slots = 0;

  bool operator==(const RelayCounters&) const = default;
};

struct Counters {
  std::uint64_t slots = 0;
  std::array<SourceCounters, 2> sources{};
  RelayCounters relay;
  /// Slots with two or more transmissions on the shared channel.
  std::uint64_t collisions = 0;

  SourceCounters& source(Source s) { return sources[static_cast<int>(s) - 1]; }
  const SourceCounters& source(Source s) const { return sources[static_cast<int>(s) - 1]; }
  std::uint64_t relay_captures() const {
    return sources[0].relay_captures + sources[1].relay_captures;
  }

  bool operator==(const Counters&) const = default;
};

/// Queue lengths at the end of a slot.
struct Snapshot {
  std::uint64_t slot = 0;
  std::uint64_t q1 = 0;
  std::uint64_t q2 = 0;
  std::uint64_t q0 = 0;

  bool operator==(const Snapshot&) const = default;
};

enum class Queue { S1, S2, Relay };

struct SimResult {
  SimConfig config;
  /// Recorded after slots stride-1, 2*stride-1, ... (0-based).
  std::vector<Snapshot> trajectory;
  std::array<std::uint64_t, 3> final_queue{};  // S1, S2, relay
  /// Whole run, used for conservation checks.
  Counters total;
  /// Post-warmup slots only, used by the estimators.
  Counters window;

  std::uint64_t final_length(Queue q) const { return final_queue[static_cast<int>(q)]; }

  bool operator==(const SimResult&) const = default;
};

SimResult simulate(const SimConfig& config);

/// Exact packet-conservation check on the whole-run counters.
bool conserves_packets(const SimResult& result);

/// Seed for replication `index`: splitmix64 applied to
/// seed + (index + 1) * 0x9E3779B97F4A7C15.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Runs every config on up to `threads` worker threads (0 picks the hardware
/// concurrency). Output order follows input order.
std::vector<SimResult> simulate_batch(std::span<const SimConfig> configs, unsigned threads = 0);

/// `replications` runs with derived seeds, executed on up to
/// `threads` worker threads (0 picks the hardware concurrency). Element k is
/// bit-identical to simulate() with seed derive_seed(config.seed, k).
std::vector<SimResult> replicate(const SimConfig& config, std::size_t replications,
                                 unsigned threads = 0);

// ---------------------------------------------------------------------------
// Stability classification

enum class StabilityStatus { Stable, Unstable, Indeterminate };
std::string_view to_string(StabilityStatus status) noexcept;

struct ClassifierThresholds {
  double drift_epsilon = 1e-3;  // packets per slot
  double mean_cap = 1e3;        // packets
};

inline constexpr std::size_t kMinClassifierSnapshots = 20;

struct QueueVerdict {
  StabilityStatus status = StabilityStatus::Indeterminate;
  double drift = 0.0;        // least-squares slope, packets per slot
  double mean_length = 0.0;  // over the post-warmup snapshots
  double final_length = 0.0;
};

struct StabilityVerdict {
  std::array<QueueVerdict, 3> queues{};  // S1, S2, relay

  const QueueVerdict& queue(Queue q) const { return queues[static_cast<int>(q)]; }
  bool all_stable() const;
  bool any_unstable() const;
};

class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Classifies one sampled queue-length series (slot index, length).
QueueVerdict classify_series(std::span<const double> slots, std::span<const double> lengths,
                             const ClassifierThresholds& thresholds = {});

/// Classifies each queue from its post-warmup snapshots. Throws
/// InsufficientDataError with fewer than kMinClassifierSnapshots of them.
StabilityVerdict classify_stability(const SimResult& result,
                                    const ClassifierThresholds& thresholds = {});

// ---------------------------------------------------------------------------
// Empirical estimators

/// A ratio estimate with its binomial standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;

  /// |value - expected| <= k * std_error.
  bool within(double expected, double k) const;
};

/// Empirical counterparts of the analytic rates. An empty optional marks an
/// estimate whose denominator count is zero.
struct EmpiricalRates {
  std::optional<Estimate> lambda0;          // relay captures per slot
  std::optional<Estimate> mu0;              // relay deliveries per backlogged slot
  std::optional<Estimate> mu1;              // departures per backlogged slot
  std::optional<Estimate> mu2;
  std::optional<Estimate> relay_busy;       // fraction of slots Q0 > 0
  std::optional<Estimate> source_busy_1;
  std::optional<Estimate> source_busy_2;
  std::optional<Estimate> capture_fraction_1;  // captures / departures
  std::optional<Estimate> capture_fraction_2;
  std::optional<Estimate> departure_rate_1;    // departures per slot
  std::optional<Estimate> departure_rate_2;
  std::optional<Estimate> relay_attempt_success;  // deliveries / relay attempts
};

EmpiricalRates empirical_rates(const SimResult& result);

}  // namespace relaystab::sim
