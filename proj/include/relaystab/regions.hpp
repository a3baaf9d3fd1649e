#pragma once

// Closed-form inner bound, outer bound and exact no-relay stability regions,
// together with the relay occupancy and dominant-system service rates that
// produce them.
//
// Every inequality is strict; a point exactly on a boundary is outside.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "relaystab/model.hpp"

namespace relaystab {

enum class RegionKind {
  InnerBound,
  OuterBound,
  NoRelay,
  InnerSub1,
  InnerSub2,
  InnerRelay,
  OuterSub1,
  OuterSub2,
  OuterRelay,
};

/// Short name used on the command line and in file names ("inner",
/// "outer-sub1", "no-relay", ...).
std::string_view to_string(RegionKind kind) noexcept;
std::optional<RegionKind> parse_region_kind(std::string_view name) noexcept;

/// Which part of the region algebra an inequality belongs to. A region is
/// (AND of Sub1) OR (AND of Sub2), intersected with Relay; kinds that lack a
/// part simply omit it.
enum class ConditionGroup { Sub1, Sub2, Relay };

/// One evaluated inequality `lhs < threshold`.
struct Condition {
  std::string label;
  ConditionGroup group = ConditionGroup::Sub1;
  double lhs = 0.0;
  double threshold = 0.0;

  bool holds() const noexcept { return lhs < threshold; }
  /// lhs / threshold; +inf when the threshold is not positive and lhs is.
  double load() const noexcept;

  bool operator==(const Condition&) const = default;
};

struct RegionVerdict {
  RegionKind region = RegionKind::InnerBound;
  bool inside = false;
  std::vector<Condition> conditions;

  const Condition* find(std::string_view label) const noexcept;
  /// The inequality that decides membership: the largest load within the
  /// least-loaded union member, or the relay condition if that is larger.
  const Condition& binding() const;
  /// True when the point is inside with every deciding inequality satisfied
  /// as lhs <= (1 - margin) * threshold.
  bool inside_with_margin(double margin) const;
  /// True when the point is outside with every union member (or the relay
  /// condition) violated as lhs >= (1 + margin) * threshold.
  bool outside_with_margin(double margin) const;
};

class RelayUnstableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SaturationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class EmptyRegionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inner bound: (sub1 OR sub2) AND relay, with five inequalities reported.
RegionVerdict inner_contains(const SystemParams& params, const ArrivalPoint& point);

/// Outer bound of the system whose relay transmits on an orthogonal channel.
RegionVerdict outer_contains(const SystemParams& params, const ArrivalPoint& point);

/// Exact stability region of the two sources without a relay.
RegionVerdict no_relay_contains(const SystemParams& params, const ArrivalPoint& point);

/// Membership in any region kind, including the individual sub-regions.
RegionVerdict contains(const SystemParams& params, RegionKind kind, const ArrivalPoint& point);

/// Relay service rate when both sources are assumed to attempt in every slot:
/// q0 (1 - q1) (1 - q2) p03.
double assumed_relay_service_rate(const SystemParams& params);

/// Pr[Q0 > 0] under the assumed relay service rate. Throws
/// RelayUnstableError unless lambda0 < assumed_relay_service_rate.
double relay_busy_probability(const SystemParams& params, const ArrivalPoint& point);

/// Service rates and occupancies of the dominant system in which `dominant`
/// transmits dummy packets when empty. Throws SaturationError when either
/// source occupancy reaches 1.
DerivedRates dominant_service_rates(const SystemParams& params, const ArrivalPoint& point,
                                    Source dominant);

struct BoundarySample {
  double lambda1 = 0.0;
  double lambda2_max = 0.0;

  bool operator==(const BoundarySample&) const = default;
};

struct BoundaryPolyline {
  RegionKind region = RegionKind::InnerBound;
  std::size_t resolution = 0;
  std::vector<BoundarySample> samples;
};

enum class Axis { Lambda1, Lambda2 };

/// Largest rate on the given axis (other rate zero) that is still inside,
/// found by bisection over [0, 1].
inline constexpr double kBoundaryTolerance = 1e-6;
double axis_intercept(const SystemParams& params, RegionKind kind, Axis axis);

/// `resolution` evenly spaced lambda1 samples from 0 to the lambda1 intercept,
/// each paired with the bisected largest inside lambda2. Throws
/// EmptyRegionError if the origin is outside and std::invalid_argument if
/// resolution < 2.
BoundaryPolyline boundary_polyline(const SystemParams& params, RegionKind kind,
                                   std::size_t resolution);

}  // namespace relaystab
