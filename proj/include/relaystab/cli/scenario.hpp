#pragma once

// Flat `key = value` scenario files.
//
//   # comment lines and blank lines are ignored
//   preset        = fig2 | fig3        built-in parameter set, applied first
//   p13 p23 p10 p20 p03                link success probabilities, [0, 1]
//   q0 q1 q2                           attempt probabilities, [0, 1]
//   lambda1 lambda2                    arrival rates, packets/slot, [0, 1]
//   grid          = <n>x<m>            sweep grid size, points
//   grid_extent   = <rate>             sweep covers [0, rate]^2, packets/slot
//   mode          = original | dom1 | dom2 | outer
//   pessimistic_relay = true | false
//   horizon, warmup, sample_stride     slots
//   seed                               unsigned 64-bit integer
//   regions       = inner,outer,...    region names for `region`
//   resolution    = <n>                boundary samples per region
//   out_dir       = <path>             output directory
//   max_points_analytic, max_points_simulated   sweep caps, points
//
// Unknown keys, duplicate keys and malformed values are errors.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "relaystab/model.hpp"
#include "relaystab/regions.hpp"
#include "relaystab/sim.hpp"

namespace relaystab::cli {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  std::size_t columns = 0;  // lambda1 samples
  std::size_t rows = 0;     // lambda2 samples
};

/// Individually optional parameters, so a preset can be partially overridden.
struct ParamOverrides {
  std::optional<double> p13, p23, p10, p20, p03, q0, q1, q2;
};

struct Scenario {
  std::optional<std::string> preset;
  ParamOverrides params;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<GridSpec> grid;
  std::optional<double> grid_extent;
  std::optional<sim::ModeKind> mode;
  std::optional<bool> pessimistic_relay;
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> warmup;
  std::optional<std::uint64_t> sample_stride;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<RegionKind>> regions;
  std::optional<std::size_t> resolution;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> max_points_analytic;
  std::optional<std::size_t> max_points_simulated;

  /// Preset (if any) with explicit keys applied on top. Throws ScenarioError
  /// if a parameter is left unspecified.
  SystemParams resolve_params() const;
};

std::optional<SystemParams> preset_params(std::string_view name);

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// "0.08,0.08" -> point; throws ScenarioError on malformed input.
ArrivalPoint parse_point(std::string_view text);
/// "32x16" -> grid; throws ScenarioError on malformed or empty grids.
GridSpec parse_grid(std::string_view text);
std::vector<RegionKind> parse_region_list(std::string_view text);

}  // namespace relaystab::cli
