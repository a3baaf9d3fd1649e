#include "relaystab/regions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace relaystab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// coefficient * rate, with a zero rate contributing nothing even when the
// coefficient is infinite (a source that never transmits but has no traffic).
double term(double coefficient, double rate) {
  return rate == 0.0 ? 0.0 : coefficient * rate;
}

void require_valid(const SystemParams& params, const ArrivalPoint& point) {
  auto report = validate(params);
  auto point_report = validate(point);
  report.errors.insert(report.errors.end(), point_report.errors.begin(),
                       point_report.errors.end());
  if (!report.ok()) throw InvalidParamsError(report.describe_errors());
}

// Shorthands shared by the inner and outer bound inequalities.
struct Terms {
  double q0, q1, q2, p03;
  double c1, c2;        // p_i3 + p_i0 (1 - p_i3)
  double relayed1, relayed2;  // p_i0 (1 - p_i3)
  double f1, f2;        // capture fractions

  explicit Terms(const SystemParams& params)
      : q0(params.access.q0),
        q1(params.access.q1),
        q2(params.access.q2),
        p03(params.channel.p03),
        c1(departure_probability(params.channel, Source::One)),
        c2(departure_probability(params.channel, Source::Two)),
        relayed1(params.channel.p10 * (1.0 - params.channel.p13)),
        relayed2(params.channel.p20 * (1.0 - params.channel.p23)),
        f1(relay_capture_fraction(params.channel, Source::One)),
        f2(relay_capture_fraction(params.channel, Source::Two)) {}
};

bool compose(const std::vector<Condition>& conditions) {
  bool has_sub = false;
  bool sub1 = true;
  bool sub2 = true;
  bool has_sub1 = false;
  bool has_sub2 = false;
  bool relay = true;
  for (const auto& c : conditions) {
    switch (c.group) {
      case ConditionGroup::Sub1:
        has_sub = has_sub1 = true;
        sub1 = sub1 && c.holds();
        break;
      case ConditionGroup::Sub2:
        has_sub = has_sub2 = true;
        sub2 = sub2 && c.holds();
        break;
      case ConditionGroup::Relay:
        relay = relay && c.holds();
        break;
    }
  }
  if (!has_sub) return relay;
  const bool either = (has_sub1 && sub1) || (has_sub2 && sub2);
  return either && relay;
}

RegionVerdict make_verdict(RegionKind kind, std::vector<Condition> conditions) {
  RegionVerdict v;
  v.region = kind;
  v.inside = compose(conditions);
  v.conditions = std::move(conditions);
  return v;
}

std::vector<Condition> inner_conditions(const SystemParams& params, const ArrivalPoint& point) {
  const Terms t(params);
  const double l1 = point.lambda1;
  const double l2 = point.lambda2;
  const double a = (1 - t.q1) * (1 - t.q2) * t.p03;

  std::vector<Condition> out;
  // First dominant system (S1 saturated): S1 then S2.
  out.push_back({"inner.sub1.s1", ConditionGroup::Sub1,
                 term((a + t.q1 * t.relayed1) / (t.q1 * a * t.c1), l1) +
                     term(((1 - t.q2) * t.p03 + t.relayed2) / (a * t.c2), l2),
                 1.0});
  out.push_back({"inner.sub1.s2", ConditionGroup::Sub1,
                 term(t.relayed1 / t.c1, l1) +
                     term(((1 - t.q2) * t.p03 + t.q2 * t.relayed2) / (t.q2 * t.c2), l2),
                 a});
  // Second dominant system (S2 saturated): S2 then S1.
  out.push_back({"inner.sub2.s2", ConditionGroup::Sub2,
                 term(((1 - t.q1) * t.p03 + t.relayed1) / (a * t.c1), l1) +
                     term((a + t.q2 * t.relayed2) / (t.q2 * a * t.c2), l2),
                 1.0});
  out.push_back({"inner.sub2.s1", ConditionGroup::Sub2,
                 term((t.q1 * t.relayed1 + (1 - t.q1) * t.p03) / (t.q1 * t.c1), l1) +
                     term(t.relayed2 / t.c2, l2),
                 a});
  out.push_back({"inner.relay", ConditionGroup::Relay,
                 term(t.relayed1 / t.c1, l1) + term(t.relayed2 / t.c2, l2), t.q0 * a});
  return out;
}

std::vector<Condition> outer_conditions(const SystemParams& params, const ArrivalPoint& point) {
  const Terms t(params);
  const double l1 = point.lambda1;
  const double l2 = point.lambda2;

  std::vector<Condition> out;
  out.push_back({"outer.sub1.s1", ConditionGroup::Sub1,
                 term(1.0 / (t.q1 * t.c1), l1) + term(1.0 / ((1 - t.q1) * t.c2), l2), 1.0});
  out.push_back({"outer.sub1.s2", ConditionGroup::Sub1, l2, t.q2 * (1 - t.q1) * t.c2});
  out.push_back({"outer.sub2.s2", ConditionGroup::Sub2,
                 term(1.0 / (t.q2 * t.c2), l2) + term(1.0 / ((1 - t.q2) * t.c1), l1), 1.0});
  out.push_back({"outer.sub2.s1", ConditionGroup::Sub2, l1, t.q1 * (1 - t.q2) * t.c1});
  out.push_back({"outer.relay", ConditionGroup::Relay,
                 term(t.relayed1 / t.c1, l1) + term(t.relayed2 / t.c2, l2), t.p03});
  return out;
}

std::vector<Condition> no_relay_conditions(const SystemParams& params,
                                           const ArrivalPoint& point) {
  const double q1 = params.access.q1;
  const double q2 = params.access.q2;
  const double p13 = params.channel.p13;
  const double p23 = params.channel.p23;
  const double l1 = point.lambda1;
  const double l2 = point.lambda2;

  std::vector<Condition> out;
  out.push_back({"no_relay.sub1.s1", ConditionGroup::Sub1,
                 l1 + term(q1 * p13 / ((1 - q1) * p23), l2), q1 * p13});
  out.push_back({"no_relay.sub1.s2", ConditionGroup::Sub1, l2, q2 * (1 - q1) * p23});
  out.push_back({"no_relay.sub2.s2", ConditionGroup::Sub2,
                 l2 + term(q2 * p23 / ((1 - q2) * p13), l1), q2 * p23});
  out.push_back({"no_relay.sub2.s1", ConditionGroup::Sub2, l1, q1 * (1 - q2) * p13});
  return out;
}

std::vector<Condition> only(std::vector<Condition> all, ConditionGroup group) {
  std::erase_if(all, [group](const Condition& c) { return c.group != group; });
  return all;
}

double bisect_largest_inside(const auto& inside_at) {
  if (inside_at(1.0)) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > kBoundaryTolerance) {
    const double mid = 0.5 * (lo + hi);
    (inside_at(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

std::string_view to_string(RegionKind kind) noexcept {
  switch (kind) {
    case RegionKind::InnerBound: return "inner";
    case RegionKind::OuterBound: return "outer";
    case RegionKind::NoRelay: return "no-relay";
    case RegionKind::InnerSub1: return "inner-sub1";
    case RegionKind::InnerSub2: return "inner-sub2";
    case RegionKind::InnerRelay: return "inner-relay";
    case RegionKind::OuterSub1: return "outer-sub1";
    case RegionKind::OuterSub2: return "outer-sub2";
    case RegionKind::OuterRelay: return "outer-relay";
  }
  return "unknown";
}

std::optional<RegionKind> parse_region_kind(std::string_view name) noexcept {
  static constexpr std::array kAll = {
      RegionKind::InnerBound, RegionKind::OuterBound, RegionKind::NoRelay,
      RegionKind::InnerSub1,  RegionKind::InnerSub2,  RegionKind::InnerRelay,
      RegionKind::OuterSub1,  RegionKind::OuterSub2,  RegionKind::OuterRelay};
  for (auto kind : kAll) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

double Condition::load() const noexcept {
  if (threshold > 0.0) return lhs / threshold;
  return holds() ? 0.0 : kInf;
}

const Condition* RegionVerdict::find(std::string_view label) const noexcept {
  for (const auto& c : conditions) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

const Condition& RegionVerdict::binding() const {
  if (conditions.empty()) throw std::logic_error("verdict without conditions");
  const Condition* worst[2] = {nullptr, nullptr};
  const Condition* relay = nullptr;
  for (const auto& c : conditions) {
    const Condition** slot = c.group == ConditionGroup::Sub1   ? &worst[0]
                             : c.group == ConditionGroup::Sub2 ? &worst[1]
                                                               : &relay;
    if (*slot == nullptr || c.load() > (*slot)->load()) *slot = &c;
  }
  const Condition* best = nullptr;
  for (const auto* w : worst) {
    if (w != nullptr && (best == nullptr || w->load() < best->load())) best = w;
  }
  if (best == nullptr) return *relay;
  if (relay != nullptr && relay->load() > best->load()) return *relay;
  return *best;
}

bool RegionVerdict::inside_with_margin(double margin) const {
  auto ok = [margin](const Condition& c) { return c.lhs <= (1.0 - margin) * c.threshold; };
  bool has_sub = false;
  bool sub_ok[2] = {true, true};
  bool has[2] = {false, false};
  bool relay_ok = true;
  for (const auto& c : conditions) {
    if (c.group == ConditionGroup::Relay) {
      relay_ok = relay_ok && ok(c);
    } else {
      const int i = c.group == ConditionGroup::Sub1 ? 0 : 1;
      has_sub = has[i] = true;
      sub_ok[i] = sub_ok[i] && ok(c);
    }
  }
  const bool union_ok = !has_sub || (has[0] && sub_ok[0]) || (has[1] && sub_ok[1]);
  return union_ok && relay_ok;
}

bool RegionVerdict::outside_with_margin(double margin) const {
  auto violated = [margin](const Condition& c) {
    return !(c.lhs < (1.0 + margin) * c.threshold);
  };
  bool has_sub = false;
  bool sub_violated[2] = {false, false};
  bool has[2] = {false, false};
  bool relay_violated = false;
  for (const auto& c : conditions) {
    if (c.group == ConditionGroup::Relay) {
      relay_violated = relay_violated || violated(c);
    } else {
      const int i = c.group == ConditionGroup::Sub1 ? 0 : 1;
      has_sub = has[i] = true;
      sub_violated[i] = sub_violated[i] || violated(c);
    }
  }
  const bool union_violated =
      has_sub && (!has[0] || sub_violated[0]) && (!has[1] || sub_violated[1]);
  return union_violated || relay_violated;
}

RegionVerdict inner_contains(const SystemParams& params, const ArrivalPoint& point) {
  require_valid(params, point);
  return make_verdict(RegionKind::InnerBound, inner_conditions(params, point));
}

RegionVerdict outer_contains(const SystemParams& params, const ArrivalPoint& point) {
  require_valid(params, point);
  return make_verdict(RegionKind::OuterBound, outer_conditions(params, point));
}

RegionVerdict no_relay_contains(const SystemParams& params, const ArrivalPoint& point) {
  require_valid(params, point);
  return make_verdict(RegionKind::NoRelay, no_relay_conditions(params, point));
}

RegionVerdict contains(const SystemParams& params, RegionKind kind, const ArrivalPoint& point) {
  switch (kind) {
    case RegionKind::InnerBound: return inner_contains(params, point);
    case RegionKind::OuterBound: return outer_contains(params, point);
    case RegionKind::NoRelay: return no_relay_contains(params, point);
    default: break;
  }
  require_valid(params, point);
  const bool inner = kind == RegionKind::InnerSub1 || kind == RegionKind::InnerSub2 ||
                     kind == RegionKind::InnerRelay;
  auto all = inner ? inner_conditions(params, point) : outer_conditions(params, point);
  const ConditionGroup group =
      (kind == RegionKind::InnerSub1 || kind == RegionKind::OuterSub1)   ? ConditionGroup::Sub1
      : (kind == RegionKind::InnerSub2 || kind == RegionKind::OuterSub2) ? ConditionGroup::Sub2
                                                                         : ConditionGroup::Relay;
  return make_verdict(kind, only(std::move(all), group));
}

double assumed_relay_service_rate(const SystemParams& params) {
  const auto& a = params.access;
  return a.q0 * (1 - a.q1) * (1 - a.q2) * params.channel.p03;
}

double relay_busy_probability(const SystemParams& params, const ArrivalPoint& point) {
  require_valid(params, point);
  const double lambda0 = relay_arrival_rate(params.channel, point);
  const double mu0 = assumed_relay_service_rate(params);
  if (!(lambda0 < mu0)) {
    throw RelayUnstableError("relay arrival rate " + std::to_string(lambda0) +
                             " is not below the assumed relay service rate " +
                             std::to_string(mu0));
  }
  return lambda0 / mu0;
}

DerivedRates dominant_service_rates(const SystemParams& params, const ArrivalPoint& point,
                                    Source dominant) {
  const double relay_busy = relay_busy_probability(params, point);
  const Source dominated = other(dominant);
  const auto& access = params.access;

  const double q_dom = access.source(dominant);
  const double q_sub = access.source(dominated);
  const double relay_idle = 1.0 - access.q0 * relay_busy;

  auto occupancy = [](double lambda, double mu, Source s) {
    if (lambda == 0.0) return 0.0;
    const double busy = mu > 0.0 ? lambda / mu : kInf;
    if (!(busy < 1.0)) {
      throw SaturationError("source " + std::to_string(static_cast<int>(s)) +
                            " saturates in the dominant system (occupancy " +
                            std::to_string(busy) + ")");
    }
    return busy;
  };

  // The dominated source sees the saturated one in every slot.
  const double mu_sub =
      q_sub * (1 - q_dom) * relay_idle * departure_probability(params.channel, dominated);
  const double busy_sub = occupancy(point.rate(dominated), mu_sub, dominated);
  const double mu_dom = q_dom * (1 - q_sub * busy_sub) * relay_idle *
                        departure_probability(params.channel, dominant);
  const double busy_dom = occupancy(point.rate(dominant), mu_dom, dominant);

  DerivedRates out;
  out.lambda0 = relay_arrival_rate(params.channel, point);
  out.mu0 = assumed_relay_service_rate(params);
  out.relay_busy = relay_busy;
  if (dominant == Source::One) {
    out.mu1 = mu_dom;
    out.source_busy_1 = busy_dom;
    out.mu2 = mu_sub;
    out.source_busy_2 = busy_sub;
  } else {
    out.mu2 = mu_dom;
    out.source_busy_2 = busy_dom;
    out.mu1 = mu_sub;
    out.source_busy_1 = busy_sub;
  }
  return out;
}

double axis_intercept(const SystemParams& params, RegionKind kind, Axis axis) {
  if (!contains(params, kind, {0.0, 0.0}).inside) {
    throw EmptyRegionError(std::string(to_string(kind)) + " region does not contain the origin");
  }
  return bisect_largest_inside([&](double rate) {
    const ArrivalPoint p = axis == Axis::Lambda1 ? ArrivalPoint{rate, 0.0} : ArrivalPoint{0.0, rate};
    return contains(params, kind, p).inside;
  });
}

BoundaryPolyline boundary_polyline(const SystemParams& params, RegionKind kind,
                                   std::size_t resolution) {
  if (resolution < 2) throw std::invalid_argument("boundary resolution must be at least 2");
  const double intercept = axis_intercept(params, kind, Axis::Lambda1);

  BoundaryPolyline out;
  out.region = kind;
  out.resolution = resolution;
  out.samples.reserve(resolution);
  for (std::size_t k = 0; k < resolution; ++k) {
    const double lambda1 =
        k + 1 == resolution ? intercept
                            : intercept * static_cast<double>(k) / static_cast<double>(resolution - 1);
    double lambda2_max = 0.0;
    if (contains(params, kind, {lambda1, 0.0}).inside) {
      lambda2_max = bisect_largest_inside(
          [&](double rate) { return contains(params, kind, {lambda1, rate}).inside; });
    }
    out.samples.push_back({lambda1, lambda2_max});
  }
  return out;
}

}  // namespace relaystab
