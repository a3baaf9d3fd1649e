#include "relaystab/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <thread>

namespace relaystab::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// mt19937_64 output is fixed by the standard; the conversion to [0, 1) is done
// here rather than through uniform_real_distribution so the stream is the
// same on every standard library.
class SlotRng {
 public:
  explicit SlotRng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

bool is_dominant(ModeKind kind) {
  return kind == ModeKind::DominantS1 || kind == ModeKind::DominantS2;
}

Estimate ratio(std::uint64_t successes, std::uint64_t trials) {
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials};
}

std::optional<Estimate> maybe_ratio(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) return std::nullopt;
  return ratio(successes, trials);
}

}  // namespace

std::string_view to_string(ModeKind kind) noexcept {
  switch (kind) {
    case ModeKind::Original: return "original";
    case ModeKind::DominantS1: return "dom1";
    case ModeKind::DominantS2: return "dom2";
    case ModeKind::OuterModified: return "outer";
  }
  return "unknown";
}

std::optional<ModeKind> parse_mode(std::string_view name) noexcept {
  for (auto kind : {ModeKind::Original, ModeKind::DominantS1, ModeKind::DominantS2,
                    ModeKind::OuterModified}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

void validate(const SimConfig& config) {
  auto report = validate(config.params);
  if (!report.ok()) throw ConfigError(report.describe_errors());
  report = validate(config.point);
  if (!report.ok()) throw ConfigError(report.describe_errors());
  if (config.horizon < kMinHorizon) {
    throw ConfigError("horizon must be at least " + std::to_string(kMinHorizon) + " slots");
  }
  if (config.warmup >= config.horizon) throw ConfigError("warmup must be shorter than horizon");
  if (config.sample_stride < 1) throw ConfigError("sample_stride must be at least 1");
  if (config.mode.pessimistic_relay_interference && !is_dominant(config.mode.kind)) {
    throw ConfigError("pessimistic relay interference requires a dominant mode (dom1 or dom2)");
  }
}

SimResult simulate(const SimConfig& config) {
  validate(config);

  const auto& ch = config.params.channel;
  const auto& acc = config.params.access;
  const ModeKind kind = config.mode.kind;
  const bool outer = kind == ModeKind::OuterModified;
  const bool pessimistic = config.mode.pessimistic_relay_interference;
  const std::array<bool, 2> saturated = {kind == ModeKind::DominantS1,
                                         kind == ModeKind::DominantS2};
  const std::array<double, 2> q = {acc.q1, acc.q2};
  const std::array<double, 2> direct = {ch.p13, ch.p23};
  const std::array<double, 2> capture = {ch.p10, ch.p20};
  const std::array<double, 2> lambda = {config.point.lambda1, config.point.lambda2};

  SlotRng rng(config.seed);
  std::array<std::uint64_t, 2> queue = {0, 0};
  std::uint64_t relay_queue = 0;

  SimResult result;
  result.config = config;
  result.trajectory.reserve(config.horizon / config.sample_stride);

  for (std::uint64_t t = 0; t < config.horizon; ++t) {
    const bool in_window = t >= config.warmup;

    // Fixed draw layout per slot, independent of queue state.
    std::array<bool, 2> coin{};
    coin[0] = rng.bernoulli(q[0]);
    coin[1] = rng.bernoulli(q[1]);
    const bool relay_coin = rng.bernoulli(acc.q0);
    const double u_direct = rng.uniform();
    const double u_capture = rng.uniform();
    const double u_relay = rng.uniform();
    std::array<bool, 2> arrival{};
    arrival[0] = rng.bernoulli(lambda[0]);
    arrival[1] = rng.bernoulli(lambda[1]);

    std::array<bool, 2> backlogged = {queue[0] > 0, queue[1] > 0};
    const bool relay_backlogged = relay_queue > 0;

    std::array<bool, 2> transmits{};
    for (int i = 0; i < 2; ++i) transmits[i] = coin[i] && (backlogged[i] || saturated[i]);
    const bool relay_transmits = outer ? relay_backlogged : relay_backlogged && relay_coin;

    const int shared_transmitters =
        int(transmits[0]) + int(transmits[1]) + (outer ? 0 : int(relay_transmits));

    auto account = [&](Counters& c) {
      ++c.slots;
      for (int i = 0; i < 2; ++i) {
        auto& s = c.sources[i];
        s.backlogged_slots += backlogged[i];
        s.attempts += transmits[i];
        s.dummy_attempts += transmits[i] && !backlogged[i];
      }
      c.relay.backlogged_slots += relay_backlogged;
      c.relay.attempts += relay_transmits;
      c.collisions += shared_transmitters >= 2;
    };
    account(result.total);
    if (in_window) account(result.window);

    // Sole source transmission of a real packet.
    for (int i = 0; i < 2; ++i) {
      if (!transmits[i] || !backlogged[i]) continue;
      const bool sole = outer ? !transmits[1 - i] : shared_transmitters == 1;
      if (!sole) continue;
      // Half-duplex: the relay overhears only while not transmitting, except
      // on the orthogonal relay channel where it always listens.
      const bool relay_listening = outer || !relay_transmits;
      bool delivered = false;
      bool captured = false;
      if (u_direct < direct[i]) {
        delivered = true;
      } else if (relay_listening && u_capture < capture[i]) {
        captured = true;
      }
      if (!delivered && !captured) continue;
      --queue[i];
      if (captured) ++relay_queue;
      for (Counters* c : {&result.total, in_window ? &result.window : nullptr}) {
        if (c == nullptr) continue;
        auto& s = c->sources[i];
        ++s.departures;
        s.direct_deliveries += delivered;
        s.relay_captures += captured;
      }
    }

    if (relay_transmits) {
      bool success = u_relay < ch.p03;
      if (!outer) {
        success = success && shared_transmitters == 1;
        if (pessimistic) success = success && !coin[0] && !coin[1];
      }
      if (success) {
        --relay_queue;
        ++result.total.relay.deliveries;
        if (in_window) ++result.window.relay.deliveries;
      }
    }

    for (int i = 0; i < 2; ++i) {
      if (!arrival[i]) continue;
      ++queue[i];
      ++result.total.sources[i].arrivals;
      if (in_window) ++result.window.sources[i].arrivals;
    }

    if ((t + 1) % config.sample_stride == 0) {
      result.trajectory.push_back({t, queue[0], queue[1], relay_queue});
    }
  }

  result.final_queue = {queue[0], queue[1], relay_queue};
  return result;
}

bool conserves_packets(const SimResult& result) {
  const auto& c = result.total;
  for (int i = 0; i < 2; ++i) {
    const auto& s = c.sources[i];
    if (s.arrivals != s.direct_deliveries + s.relay_captures + result.final_queue[i]) return false;
    if (s.departures != s.direct_deliveries + s.relay_captures) return false;
  }
  return c.relay_captures() == c.relay.deliveries + result.final_queue[2];
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

std::vector<SimResult> simulate_batch(std::span<const SimConfig> configs, unsigned threads) {
  for (const auto& c : configs) validate(c);
  std::vector<SimResult> results(configs.size());
  if (configs.empty()) return results;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, configs.size()));

  // Static interleaved partition; each element of `results` has one writer.
  auto worker = [&](unsigned first) {
    for (std::size_t k = first; k < configs.size(); k += threads) results[k] = simulate(configs[k]);
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
  }
  return results;
}

std::vector<SimResult> replicate(const SimConfig& config, std::size_t replications,
                                 unsigned threads) {
  if (replications < 1) throw ConfigError("replications must be at least 1");
  std::vector<SimConfig> configs(replications, config);
  for (std::size_t k = 0; k < replications; ++k) configs[k].seed = derive_seed(config.seed, k);
  return simulate_batch(configs, threads);
}

std::string_view to_string(StabilityStatus status) noexcept {
  switch (status) {
    case StabilityStatus::Stable: return "stable";
    case StabilityStatus::Unstable: return "unstable";
    case StabilityStatus::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

bool StabilityVerdict::all_stable() const {
  return std::all_of(queues.begin(), queues.end(),
                     [](const QueueVerdict& q) { return q.status == StabilityStatus::Stable; });
}

bool StabilityVerdict::any_unstable() const {
  return std::any_of(queues.begin(), queues.end(),
                     [](const QueueVerdict& q) { return q.status == StabilityStatus::Unstable; });
}

QueueVerdict classify_series(std::span<const double> slots, std::span<const double> lengths,
                             const ClassifierThresholds& thresholds) {
  if (slots.size() != lengths.size()) {
    throw std::invalid_argument("slot and length series differ in size");
  }
  if (slots.size() < kMinClassifierSnapshots) {
    throw InsufficientDataError("need at least " + std::to_string(kMinClassifierSnapshots) +
                                " post-warmup snapshots, got " + std::to_string(slots.size()));
  }

  const double n = static_cast<double>(slots.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    mean_x += slots[k];
    mean_y += lengths[k];
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const double dx = slots[k] - mean_x;
    sxy += dx * (lengths[k] - mean_y);
    sxx += dx * dx;
  }

  QueueVerdict v;
  v.drift = sxx > 0.0 ? sxy / sxx : 0.0;
  v.mean_length = mean_y;
  v.final_length = lengths.back();
  if (v.drift > thresholds.drift_epsilon && v.final_length > thresholds.mean_cap) {
    v.status = StabilityStatus::Unstable;
  } else if (v.drift <= thresholds.drift_epsilon && v.mean_length <= thresholds.mean_cap) {
    v.status = StabilityStatus::Stable;
  } else {
    v.status = StabilityStatus::Indeterminate;
  }
  return v;
}

StabilityVerdict classify_stability(const SimResult& result,
                                    const ClassifierThresholds& thresholds) {
  std::vector<double> slots;
  std::array<std::vector<double>, 3> lengths;
  for (const auto& s : result.trajectory) {
    if (s.slot < result.config.warmup) continue;
    slots.push_back(static_cast<double>(s.slot));
    lengths[0].push_back(static_cast<double>(s.q1));
    lengths[1].push_back(static_cast<double>(s.q2));
    lengths[2].push_back(static_cast<double>(s.q0));
  }
  StabilityVerdict out;
  for (int q = 0; q < 3; ++q) out.queues[q] = classify_series(slots, lengths[q], thresholds);
  return out;
}

bool Estimate::within(double expected, double k) const {
  return std::abs(value - expected) <= k * std_error;
}

EmpiricalRates empirical_rates(const SimResult& result) {
  const Counters& w = result.window;
  if (w.slots == 0) throw InsufficientDataError("post-warmup window is empty");
  const auto& s1 = w.sources[0];
  const auto& s2 = w.sources[1];

  EmpiricalRates r;
  r.lambda0 = ratio(w.relay_captures(), w.slots);
  r.mu0 = maybe_ratio(w.relay.deliveries, w.relay.backlogged_slots);
  r.mu1 = maybe_ratio(s1.departures, s1.backlogged_slots);
  r.mu2 = maybe_ratio(s2.departures, s2.backlogged_slots);
  r.relay_busy = ratio(w.relay.backlogged_slots, w.slots);
  r.source_busy_1 = ratio(s1.backlogged_slots, w.slots);
  r.source_busy_2 = ratio(s2.backlogged_slots, w.slots);
  r.capture_fraction_1 = maybe_ratio(s1.relay_captures, s1.departures);
  r.capture_fraction_2 = maybe_ratio(s2.relay_captures, s2.departures);
  r.departure_rate_1 = ratio(s1.departures, w.slots);
  r.departure_rate_2 = ratio(s2.departures, w.slots);
  r.relay_attempt_success = maybe_ratio(w.relay.deliveries, w.relay.attempts);
  return r;
}

}  // namespace relaystab::sim
