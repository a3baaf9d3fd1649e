#include "relaystab/model.hpp"

#include <algorithm>
#include <utility>

namespace relaystab {

namespace {

void check_probability(ValidationReport& report, const char* field, double value) {
  // Written as a negated range test so NaN is rejected too.
  if (!(value >= 0.0 && value <= 1.0)) {
    report.errors.push_back({field, std::string(field) + " = " + std::to_string(value) +
                                        " is outside [0, 1]"});
  }
}

}  // namespace

std::string ValidationReport::describe_errors() const {
  std::string out;
  for (const auto& e : errors) {
    if (!out.empty()) out += "; ";
    out += e.message;
  }
  return out;
}

ValidationReport validate(const SystemParams& params) {
  ValidationReport report;
  const auto& ch = params.channel;
  check_probability(report, "p13", ch.p13);
  check_probability(report, "p23", ch.p23);
  check_probability(report, "p10", ch.p10);
  check_probability(report, "p20", ch.p20);
  check_probability(report, "p03", ch.p03);
  check_probability(report, "q0", params.access.q0);
  check_probability(report, "q1", params.access.q1);
  check_probability(report, "q2", params.access.q2);

  if (report.ok() && ch.p03 <= std::max(ch.p13, ch.p23)) {
    report.warnings.push_back(
        {"p03", "relay link p03 = " + std::to_string(ch.p03) +
                    " is not better than the direct links; the relay may degrade the network"});
  }
  return report;
}

ValidationReport validate(const ArrivalPoint& point) {
  ValidationReport report;
  check_probability(report, "lambda1", point.lambda1);
  check_probability(report, "lambda2", point.lambda2);
  return report;
}

double departure_probability(const ChannelParams& channel, Source source) {
  const double direct = channel.direct(source);
  return direct + channel.to_relay(source) * (1.0 - direct);
}

double relay_capture_fraction(const ChannelParams& channel, Source source) {
  const double leave = departure_probability(channel, source);
  if (leave <= 0.0) {
    throw DegenerateLinkError("source " + std::to_string(static_cast<int>(source)) +
                              " has p_i3 = p_i0 = 0; no packet can leave its queue");
  }
  return channel.to_relay(source) * (1.0 - channel.direct(source)) / leave;
}

double relay_arrival_rate(const ChannelParams& channel, const ArrivalPoint& point) {
  return relay_capture_fraction(channel, Source::One) * point.lambda1 +
         relay_capture_fraction(channel, Source::Two) * point.lambda2;
}

SystemParams swap_sources(const SystemParams& params) {
  SystemParams out = params;
  std::swap(out.channel.p13, out.channel.p23);
  std::swap(out.channel.p10, out.channel.p20);
  std::swap(out.access.q1, out.access.q2);
  return out;
}

ArrivalPoint swap_sources(const ArrivalPoint& point) {
  return {point.lambda2, point.lambda1};
}

SystemParams poor_direct_link_params() {
  return {{0.25, 0.25, 0.9, 0.9, 0.9}, {0.45, 0.3, 0.3}};
}

SystemParams better_direct_link_params() {
  return {{0.4, 0.4, 0.9, 0.9, 0.9}, {0.45, 0.3, 0.3}};
}

}  // namespace relaystab
