#pragma once

// Parameter records for the two-source, one-relay random access network and
// the closed-form per-packet quantities derived from them.

#include <stdexcept>
#include <string>
#include <vector>

namespace relaystab {

/// Index of a traffic source. The relay never generates traffic.
enum class Source { One = 1, Two = 2 };

constexpr Source other(Source s) noexcept {
  return s == Source::One ? Source::Two : Source::One;
}

/// Per-slot success probabilities of the five links.
/// p13/p23: S1/S2 to destination; p10/p20: S1/S2 to relay; p03: relay to
/// destination.
struct ChannelParams {
  double p13 = 0.0;
  double p23 = 0.0;
  double p10 = 0.0;
  double p20 = 0.0;
  double p03 = 0.0;

  double direct(Source s) const noexcept { return s == Source::One ? p13 : p23; }
  double to_relay(Source s) const noexcept { return s == Source::One ? p10 : p20; }

  bool operator==(const ChannelParams&) const = default;
};

/// Transmission attempt probabilities of a backlogged node.
struct AccessProbs {
  double q0 = 0.0;  // relay
  double q1 = 0.0;
  double q2 = 0.0;

  double source(Source s) const noexcept { return s == Source::One ? q1 : q2; }

  bool operator==(const AccessProbs&) const = default;
};

/// Bernoulli arrival rates at the two sources, in packets per slot.
struct ArrivalPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  double rate(Source s) const noexcept { return s == Source::One ? lambda1 : lambda2; }

  bool operator==(const ArrivalPoint&) const = default;
};

struct SystemParams {
  ChannelParams channel;
  AccessProbs access;

  bool operator==(const SystemParams&) const = default;
};

/// Rates and occupancies of the three queues, in packets per slot.
/// relay_busy and source_busy_* are Pr[Q > 0].
struct DerivedRates {
  double lambda0 = 0.0;
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double relay_busy = 0.0;
  double source_busy_1 = 0.0;
  double source_busy_2 = 0.0;

  bool operator==(const DerivedRates&) const = default;
};

struct ValidationIssue {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const noexcept { return errors.empty(); }
  /// All errors joined into a single line, for exception messages.
  std::string describe_errors() const;
};

/// Thrown by analytic operations when p_i3 = p_i0 = 0, so no packet can
/// ever leave source i and the capture fraction is undefined.
class DegenerateLinkError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when parameters fail validation at an API boundary that cannot
/// return a report.
class InvalidParamsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Checks that every probability lies in the closed interval [0, 1] and warns
/// when the relay link is not strictly better than both direct links.
ValidationReport validate(const SystemParams& params);
ValidationReport validate(const ArrivalPoint& point);

/// Probability that a sole transmission from `source` leaves its queue:
/// p_i3 + p_i0 (1 - p_i3).
double departure_probability(const ChannelParams& channel, Source source);

/// Fraction of packets departing a source queue that enter the relay queue.
double relay_capture_fraction(const ChannelParams& channel, Source source);

/// Long-run packet arrival rate at the relay queue.
double relay_arrival_rate(const ChannelParams& channel, const ArrivalPoint& point);

/// Exchanges the roles of S1 and S2.
SystemParams swap_sources(const SystemParams& params);
ArrivalPoint swap_sources(const ArrivalPoint& point);

/// Built-in parameter sets. Both use q1 = q2 = 0.3, q0 = 0.45 and
/// p10 = p20 = p03 = 0.9; the direct links are 0.25 (poor) and 0.4 (better).
SystemParams poor_direct_link_params();
SystemParams better_direct_link_params();

}  // namespace relaystab
