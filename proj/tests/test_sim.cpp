#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "relaystab/regions.hpp"
#include "relaystab/sim.hpp"

using namespace relaystab;
using namespace relaystab::sim;

namespace {

const SystemParams kPoor = poor_direct_link_params();

SimConfig config_at(ArrivalPoint point, ModeKind kind = ModeKind::Original,
                    std::uint64_t horizon = 1'000'000, bool pessimistic = false) {
  SimConfig c;
  c.params = kPoor;
  c.point = point;
  c.mode = {kind, pessimistic};
  c.horizon = horizon;
  c.warmup = horizon / 10;
  c.sample_stride = horizon / 1000;
  c.seed = 20240501;
  return c;
}

constexpr ModeKind kAllModes[] = {ModeKind::Original, ModeKind::DominantS1,
                                  ModeKind::DominantS2, ModeKind::OuterModified};

}  // namespace

TEST_CASE("mode names round-trip") {
  for (auto m : kAllModes) CHECK(parse_mode(to_string(m)) == m);
  CHECK_FALSE(parse_mode("dominant").has_value());
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(validate(config_at({0.1, 0.1})));

  auto c = config_at({0.1, 0.1});
  c.horizon = kMinHorizon - 1;
  c.warmup = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = config_at({0.1, 0.1});
  c.warmup = c.horizon;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = config_at({0.1, 0.1});
  c.sample_stride = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);

  for (auto kind : {ModeKind::Original, ModeKind::OuterModified}) {
    c = config_at({0.1, 0.1}, kind, 10'000, true);
    CHECK_THROWS_AS(validate(c), ConfigError);
  }
  CHECK_NOTHROW(validate(config_at({0.1, 0.1}, ModeKind::DominantS2, 10'000, true)));

  c = config_at({0.1, 0.1});
  c.params.channel.p13 = 1.2;
  CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("p13"), ConfigError);
  c = config_at({1.5, 0.1});
  CHECK_THROWS_AS(simulate(c), ConfigError);
}

TEST_CASE("no traffic leaves every queue empty") {
  for (auto kind : kAllModes) {
    CAPTURE(to_string(kind));
    const auto r = simulate(config_at({0.0, 0.0}, kind, 20'000));
    for (const auto& s : r.trajectory) {
      CHECK(s.q1 == 0);
      CHECK(s.q2 == 0);
      CHECK(s.q0 == 0);
    }
    for (const auto& src : r.total.sources) {
      CHECK(src.arrivals == 0);
      CHECK(src.departures == 0);
      CHECK(src.relay_captures == 0);
      CHECK(src.direct_deliveries == 0);
      CHECK(src.backlogged_slots == 0);
      CHECK(src.attempts == src.dummy_attempts);
    }
    CHECK(r.total.relay.deliveries == 0);
    CHECK(r.total.relay.attempts == 0);
    CHECK((r.total.source(Source::One).attempts > 0) == (kind == ModeKind::DominantS1));
    CHECK((r.total.source(Source::Two).attempts > 0) == (kind == ModeKind::DominantS2));
    CHECK(r.total.collisions == 0);
    CHECK(classify_stability(r).all_stable());
  }
}

TEST_CASE("packets are conserved in every mode") {
  const ArrivalPoint points[] = {{0.08, 0.08}, {0.25, 0.25}, {0.02, 0.3}, {0.9, 0.0}};
  for (auto kind : kAllModes) {
    for (auto point : points) {
      for (bool pessimistic : {false, true}) {
        const bool dominant = kind == ModeKind::DominantS1 || kind == ModeKind::DominantS2;
        if (pessimistic && !dominant) continue;
        const auto r = simulate(config_at(point, kind, 50'000, pessimistic));
        CHECK(conserves_packets(r));
      }
    }
  }
}

TEST_CASE("degenerate links are allowed in the simulator") {
  auto c = config_at({0.05, 0.05}, ModeKind::Original, 20'000);
  c.params.channel.p13 = c.params.channel.p10 = 0.0;
  const auto r = simulate(c);
  CHECK(r.total.source(Source::One).departures == 0);
  CHECK(r.final_length(Queue::S1) == r.total.source(Source::One).arrivals);
  CHECK(conserves_packets(r));
}

TEST_CASE("identical configs give bit-identical results") {
  const auto c = config_at({0.1, 0.07}, ModeKind::DominantS2, 100'000, true);
  CHECK(simulate(c) == simulate(c));
  auto other = c;
  other.seed += 1;
  CHECK_FALSE(simulate(other) == simulate(c));
}

TEST_CASE("stable point at the poor-direct-link parameters") {
  const auto r = simulate(config_at({0.08, 0.08}));
  CHECK(conserves_packets(r));
  CHECK(classify_stability(r).all_stable());

  const auto rates = empirical_rates(r);
  REQUIRE(rates.lambda0.has_value());
  CHECK(rates.lambda0->within(relay_arrival_rate(kPoor.channel, {0.08, 0.08}), 3.0));
  REQUIRE(rates.capture_fraction_1.has_value());
  CHECK(rates.capture_fraction_1->within(relay_capture_fraction(kPoor.channel, Source::One), 3.0));
  CHECK(rates.capture_fraction_2->within(relay_capture_fraction(kPoor.channel, Source::Two), 3.0));
  CHECK(rates.departure_rate_1->within(0.08, 3.0));
  CHECK(rates.departure_rate_2->within(0.08, 3.0));
}

TEST_CASE("point beyond the outer bound is unstable") {
  REQUIRE_FALSE(outer_contains(kPoor, {0.25, 0.25}).inside);
  const auto r = simulate(config_at({0.25, 0.25}));
  CHECK(classify_stability(r).any_unstable());
}

TEST_CASE("pessimistic dominant system matches the analytic relay occupancy") {
  const auto r = simulate(config_at({0.08, 0.08}, ModeKind::DominantS1, 1'000'000, true));
  const auto rates = empirical_rates(r);
  const double analytic = relay_busy_probability(kPoor, {0.08, 0.08});
  CHECK(analytic == doctest::Approx(0.5883434454863026));
  CHECK(std::abs(rates.relay_busy->value - analytic) <= 0.02);

  const auto& a = kPoor.access;
  const double expected = (1 - a.q1) * (1 - a.q2) * kPoor.channel.p03;
  REQUIRE(rates.relay_attempt_success.has_value());
  CHECK(rates.relay_attempt_success->within(expected, 3.0));
}

TEST_CASE("saturated source attempts at its access probability") {
  for (auto [kind, source] : {std::pair{ModeKind::DominantS1, Source::One},
                              std::pair{ModeKind::DominantS2, Source::Two}}) {
    const auto r = simulate(config_at({0.05, 0.05}, kind, 200'000));
    const auto& w = r.window;
    const double q = kPoor.access.source(source);
    const double n = static_cast<double>(w.slots);
    const double freq = static_cast<double>(w.source(source).attempts) / n;
    CHECK(std::abs(freq - q) <= 3.0 * std::sqrt(q * (1 - q) / n));
  }
}

TEST_CASE("dummy packets never depart") {
  for (auto [kind, source] : {std::pair{ModeKind::DominantS1, Source::One},
                              std::pair{ModeKind::DominantS2, Source::Two}}) {
    ArrivalPoint point{0.1, 0.1};
    (source == Source::One ? point.lambda1 : point.lambda2) = 0.0;
    const auto r = simulate(config_at(point, kind, 100'000));
    const auto& s = r.total.source(source);
    CHECK(s.departures == 0);
    CHECK(s.relay_captures == 0);
    CHECK(s.direct_deliveries == 0);
    CHECK(s.attempts == s.dummy_attempts);
    CHECK(s.attempts > 0);
    const auto rates = empirical_rates(r);
    const auto& busy = source == Source::One ? rates.source_busy_1 : rates.source_busy_2;
    CHECK(busy->value == 0.0);
  }
}

TEST_CASE("orthogonal relay serves at p03 while backlogged") {
  const auto r = simulate(config_at({0.1, 0.1}, ModeKind::OuterModified));
  const auto rates = empirical_rates(r);
  REQUIRE(rates.mu0.has_value());
  CHECK(rates.mu0->within(kPoor.channel.p03, 3.0));
  CHECK(r.window.relay.attempts == r.window.relay.backlogged_slots);
}

TEST_CASE("departure rates equal arrival rates well inside the inner bound") {
  const ArrivalPoint points[] = {{0.05, 0.1}, {0.12, 0.02}, {0.06, 0.06}};
  for (auto p : points) {
    REQUIRE(inner_contains(kPoor, p).inside_with_margin(0.1));
    const auto rates = empirical_rates(simulate(config_at(p)));
    CHECK(rates.departure_rate_1->within(p.lambda1, 3.0));
    CHECK(rates.departure_rate_2->within(p.lambda2, 3.0));
  }
}

TEST_CASE("empirical rates without traffic") {
  const auto rates = empirical_rates(simulate(config_at({0.0, 0.0}, ModeKind::Original, 10'000)));
  CHECK_FALSE(rates.mu0.has_value());
  CHECK_FALSE(rates.mu1.has_value());
  CHECK_FALSE(rates.mu2.has_value());
  CHECK_FALSE(rates.capture_fraction_1.has_value());
  CHECK_FALSE(rates.capture_fraction_2.has_value());
  CHECK_FALSE(rates.relay_attempt_success.has_value());
  CHECK(rates.relay_busy->value == 0.0);
  CHECK(rates.source_busy_1->value == 0.0);
  CHECK(rates.source_busy_2->value == 0.0);
  CHECK(rates.lambda0->value == 0.0);
}

TEST_CASE("replications") {
  const auto c = config_at({0.08, 0.08}, ModeKind::Original, 200'000);

  const auto one = replicate(c, 1);
  REQUIRE(one.size() == 1);
  auto seeded = c;
  seeded.seed = derive_seed(c.seed, 0);
  CHECK(one[0] == simulate(seeded));

  const auto serial = replicate(c, 4, 1);
  const auto parallel = replicate(c, 4, 3);
  CHECK(serial == parallel);
  CHECK(replicate(c, 4, 2) == serial);

  CHECK_FALSE(serial[0].window == serial[1].window);
  const double lambda0 = relay_arrival_rate(kPoor.channel, {0.08, 0.08});
  for (const auto& r : serial) CHECK(empirical_rates(r).lambda0->within(lambda0, 3.0));

  CHECK_THROWS_AS(replicate(c, 0), ConfigError);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("classifier on synthetic trajectories") {
  std::vector<double> slots;
  std::vector<double> ramp;
  std::vector<double> alternating;
  for (int k = 0; k < 100; ++k) {
    slots.push_back(1000.0 * k);
    ramp.push_back(0.02 * 1000.0 * k);
    alternating.push_back(k % 2);
  }
  CHECK(classify_series(slots, ramp).status == StabilityStatus::Unstable);
  CHECK(classify_series(slots, ramp).drift == doctest::Approx(0.02));
  CHECK(classify_series(slots, alternating).status == StabilityStatus::Stable);

  // Slope 5e-4 reaching 400 packets: above a 1e-4 drift threshold but below
  // the level threshold, so neither verdict applies.
  std::vector<double> slow_slots;
  std::vector<double> slow;
  for (int k = 1; k <= 80; ++k) {
    slow_slots.push_back(10'000.0 * k);
    slow.push_back(5e-4 * 10'000.0 * k);
  }
  REQUIRE(slow.back() == doctest::Approx(400.0));
  const ClassifierThresholds tight{1e-4, 1e3};
  CHECK(classify_series(slow_slots, slow, tight).status == StabilityStatus::Indeterminate);

  // Above the level threshold with no drift is also undecided.
  std::vector<double> high(slots.size(), 5000.0);
  CHECK(classify_series(slots, high).status == StabilityStatus::Indeterminate);

  const std::vector<double> few(kMinClassifierSnapshots - 1, 0.0);
  CHECK_THROWS_AS(classify_series(few, few), InsufficientDataError);
}

TEST_CASE("classifier needs enough post-warmup snapshots") {
  auto c = config_at({0.05, 0.05}, ModeKind::Original, 10'000);
  c.sample_stride = 1000;  // ten snapshots in total
  c.warmup = 0;
  CHECK_THROWS_AS(classify_stability(simulate(c)), InsufficientDataError);
}
