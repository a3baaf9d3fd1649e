// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "relaystab/model.hpp"
#include "relaystab/regions.hpp"
#include "relaystab/sim.hpp"

using namespace relaystab;

namespace {

constexpr std::uint64_t kSlots = 1'000'000;
constexpr std::uint64_t kWarmup = 100'000;
constexpr std::uint64_t kSeed = 20240601;

// Hand-arithmetic values for the poor-direct-link parameter set.
constexpr double kInnerIntercept = 0.190174825;
constexpr double kOuterIntercept = 0.2775;
constexpr double kNoRelayIntercept = 0.075;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Every simulation made here goes through this, so conservation is checked on
// all of them and reported by the determinism check.
std::size_t g_runs = 0;
std::size_t g_conservation_failures = 0;

std::vector<sim::SimResult> run_all(const std::vector<sim::SimConfig>& configs) {
  auto results = sim::simulate_batch(configs);
  for (const auto& r : results) {
    ++g_runs;
    g_conservation_failures += !sim::conserves_packets(r);
  }
  return results;
}

sim::SimConfig base_config(const SystemParams& params, ArrivalPoint point, sim::ModeKind kind,
                           std::uint64_t seed) {
  sim::SimConfig c;
  c.params = params;
  c.point = point;
  c.mode.kind = kind;
  c.horizon = kSlots;
  c.warmup = kWarmup;
  c.seed = seed;
  return c;
}

struct Ray {
  double c, s;
  ArrivalPoint at(double r) const { return {r * c, r * s}; }
};

Ray ray(int k) {
  const double theta = (k + 0.5) / 10.0 * std::numbers::pi / 2.0;
  return {std::cos(theta), std::sin(theta)};
}

// Distance along the ray to the region boundary, by bisection inside [0, 1]^2.
double boundary_radius(const SystemParams& params, RegionKind kind, Ray d) {
  double lo = 0.0;
  double hi = 1.0 / std::max(d.c, d.s);
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (contains(params, kind, d.at(mid)).inside ? lo : hi) = mid;
  }
  return lo;
}

struct Grid {
  int n = 200;
  ArrivalPoint at(int i, int j) const { return {(i + 0.5) / n, (j + 0.5) / n}; }
};

Outcome criterion1() {
  const auto p = poor_direct_link_params();
  const double inner = axis_intercept(p, RegionKind::InnerBound, Axis::Lambda1);
  const double outer = axis_intercept(p, RegionKind::OuterBound, Axis::Lambda1);
  const double none = axis_intercept(p, RegionKind::NoRelay, Axis::Lambda1);
  const bool ok = std::abs(inner - kInnerIntercept) < 1e-4 &&
                  std::abs(outer - kOuterIntercept) < 1e-4 &&
                  std::abs(none - kNoRelayIntercept) < 1e-4;
  return {ok, fmt::format("lambda1 intercepts inner {:.6f} (expect {:.5f}), outer {:.6f} "
                          "(expect {:.4f}), no-relay {:.6f} (expect {:.3f})",
                          inner, kInnerIntercept, outer, kOuterIntercept, none,
                          kNoRelayIntercept)};
}

Outcome criterion2() {
  const Grid g;
  std::size_t inner_not_outer = 0;
  std::size_t closure_breaks = 0;
  for (const auto& p : {poor_direct_link_params(), better_direct_link_params()}) {
    for (int i = 0; i < g.n; ++i) {
      bool was_inside[3] = {true, true, true};
      for (int j = 0; j < g.n; ++j) {
        const auto pt = g.at(i, j);
        const bool in[3] = {inner_contains(p, pt).inside, outer_contains(p, pt).inside,
                            no_relay_contains(p, pt).inside};
        inner_not_outer += in[0] && !in[1];
        for (int k = 0; k < 3; ++k) {
          closure_breaks += in[k] && !was_inside[k];
          was_inside[k] = in[k];
        }
      }
    }
  }
  return {inner_not_outer == 0 && closure_breaks == 0,
          fmt::format("two 200x200 grids: {} inner-not-outer points, {} downward-closure breaks",
                      inner_not_outer, closure_breaks)};
}

Outcome criterion3() {
  const Grid g;
  const auto p = poor_direct_link_params();
  std::size_t inner = 0, none = 0;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      inner += inner_contains(p, g.at(i, j)).inside;
      none += no_relay_contains(p, g.at(i, j)).inside;
    }
  }
  const double ratio = none ? static_cast<double>(inner) / static_cast<double>(none) : 0.0;
  return {ratio > 2.0,
          fmt::format("grid area inner {} / no-relay {} = {:.3f} (need > 2)", inner, none, ratio)};
}

Outcome criterion4() {
  auto gap = [](const SystemParams& p) {
    return axis_intercept(p, RegionKind::InnerBound, Axis::Lambda1) -
           axis_intercept(p, RegionKind::NoRelay, Axis::Lambda1);
  };
  const double poor = gap(poor_direct_link_params());
  const double better = gap(better_direct_link_params());
  return {better < poor,
          fmt::format("inner minus no-relay lambda1 gap: poor links {:.6f}, better links {:.6f}",
                      poor, better)};
}

Outcome criterion5() {
  const auto p = poor_direct_link_params();
  std::vector<sim::SimConfig> configs;
  for (int k = 0; k < 10; ++k) {
    const auto d = ray(k);
    const double r = boundary_radius(p, RegionKind::InnerBound, d);
    // Start at 85% of the boundary radius and pull in until every deciding
    // inequality has 10% slack.
    double f = 0.85;
    while (f > 0.05 && !inner_contains(p, d.at(f * r)).inside_with_margin(0.1)) f -= 0.05;
    if (!inner_contains(p, d.at(f * r)).inside_with_margin(0.1)) {
      return {false, fmt::format("no point on ray {} has a 10% margin", k)};
    }
    configs.push_back(base_config(p, d.at(f * r), sim::ModeKind::Original,
                                  sim::derive_seed(kSeed, k)));
  }
  const auto results = run_all(configs);

  int stable = 0, lambda0_ok = 0;
  double worst_z = 0.0;
  for (const auto& r : results) {
    stable += sim::classify_stability(r).all_stable();
    const auto est = sim::empirical_rates(r).lambda0;
    const double expected = relay_arrival_rate(r.config.params.channel, r.config.point);
    if (est && est->within(expected, 3.0)) ++lambda0_ok;
    if (est && est->std_error > 0) {
      worst_z = std::max(worst_z, std::abs(est->value - expected) / est->std_error);
    }
  }
  return {stable == 10 && lambda0_ok == 10,
          fmt::format("{}/10 points all-stable, {}/10 lambda0 within 3 SE (worst {:.2f} SE)",
                      stable, lambda0_ok, worst_z)};
}

Outcome criterion6() {
  const auto p = poor_direct_link_params();
  std::vector<sim::SimConfig> configs;
  for (int k = 0; k < 10; ++k) {
    const auto d = ray(k);
    const double r = boundary_radius(p, RegionKind::OuterBound, d);
    double f = 1.15;
    while (f * r * std::max(d.c, d.s) <= 1.0 &&
           !outer_contains(p, d.at(f * r)).outside_with_margin(0.1)) {
      f += 0.05;
    }
    const auto pt = d.at(f * r);
    if (pt.lambda1 > 1.0 || pt.lambda2 > 1.0) {
      return {false, fmt::format("ray {} leaves the unit square before a 10% margin", k)};
    }
    configs.push_back(base_config(p, pt, sim::ModeKind::Original, sim::derive_seed(kSeed + 1, k)));
  }
  const auto results = run_all(configs);
  int unstable = 0;
  for (const auto& r : results) unstable += sim::classify_stability(r).any_unstable();
  return {unstable == 10, fmt::format("{}/10 points with an unstable queue", unstable)};
}

Outcome criterion7() {
  const auto p = poor_direct_link_params();
  const ArrivalPoint pt{0.08, 0.08};
  auto c = base_config(p, pt, sim::ModeKind::DominantS1, kSeed);
  c.mode.pessimistic_relay_interference = true;
  const auto r = run_all({c}).front();
  const auto est = sim::empirical_rates(r);
  const double relay_expected = relay_busy_probability(p, pt);
  const double s2_expected = dominant_service_rates(p, pt, Source::One).source_busy_2;
  const bool ok = est.relay_busy && est.source_busy_2 &&
                  std::abs(est.relay_busy->value - relay_expected) <= 0.02 &&
                  std::abs(est.source_busy_2->value - s2_expected) <= 0.03;
  return {ok, fmt::format("relay busy {:.4f} vs {:.4f} (+-0.02), source 2 busy {:.4f} vs {:.4f} "
                          "(+-0.03)",
                          est.relay_busy ? est.relay_busy->value : NAN, relay_expected,
                          est.source_busy_2 ? est.source_busy_2->value : NAN, s2_expected)};
}

Outcome criterion8() {
  const auto p = poor_direct_link_params();
  const auto r = run_all({base_config(p, {0.08, 0.08}, sim::ModeKind::OuterModified, kSeed)}).front();
  const auto mu0 = sim::empirical_rates(r).mu0;
  const double p03 = p.channel.p03;
  const bool ok = mu0 && r.window.relay_captures() > 0 && mu0->within(p03, 3.0);
  return {ok, mu0 ? fmt::format("relay deliveries per backlogged slot {:.5f} +- {:.5f} vs {}",
                                mu0->value, mu0->std_error, p03)
                  : std::string("relay never backlogged")};
}

Outcome criterion9() {
  const auto p = poor_direct_link_params();
  std::vector<sim::SimConfig> configs = {
      base_config(p, {0.08, 0.08}, sim::ModeKind::Original, 1),
      base_config(p, {0.25, 0.25}, sim::ModeKind::Original, 2),
      base_config(p, {0.05, 0.1}, sim::ModeKind::DominantS2, 3),
      base_config(better_direct_link_params(), {0.1, 0.02}, sim::ModeKind::OuterModified, 4),
  };
  const auto first = run_all(configs);
  const auto second = run_all(configs);
  int identical = 0;
  for (std::size_t k = 0; k < configs.size(); ++k) identical += first[k] == second[k];
  const bool ok = identical == static_cast<int>(configs.size()) && g_conservation_failures == 0;
  return {ok, fmt::format("{}/{} repeated runs bit-identical; conservation failed on {} of {} runs",
                          identical, configs.size(), g_conservation_failures, g_runs)};
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<Outcome()> check;
    double max_seconds;
  };
  constexpr double kNoLimit = INFINITY;
  const std::vector<Criterion> criteria = {
      {"analytic intercepts", criterion1, 1.0},
      {"containment and downward closure", criterion2, 5.0},
      {"relay area gain", criterion3, kNoLimit},
      {"gain shrinks with better direct links", criterion4, kNoLimit},
      {"simulation stable inside inner bound", criterion5, kNoLimit},
      {"simulation unstable outside outer bound", criterion6, kNoLimit},
      {"dominant-system occupancy", criterion7, kNoLimit},
      {"outer-modified relay service", criterion8, kNoLimit},
      {"determinism and conservation", criterion9, kNoLimit},
  };

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > criteria[k].max_seconds) {
      o.pass = false;
      o.detail += fmt::format("; over the {:g} s limit", criteria[k].max_seconds);
    }
    failures += !o.pass;
    fmt::print("{} {} {}: {} ({:.2f} s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].name,
               o.detail, secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
