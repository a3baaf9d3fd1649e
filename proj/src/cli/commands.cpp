#include "relaystab/cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "relaystab/cli/output.hpp"
#include "relaystab/cli/scenario.hpp"
#include "relaystab/model.hpp"
#include "relaystab/regions.hpp"
#include "relaystab/sim.hpp"

namespace relaystab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::size_t kDefaultResolution = 200;
constexpr std::size_t kDefaultMaxAnalytic = 256 * 256;
constexpr std::size_t kDefaultMaxSimulated = 32 * 32;

// Raised when a run breaks an internal invariant; maps to exit code 3.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raw flag values. Empty strings and empty optionals mean "not given".
struct Flags {
  std::string scenario;
  std::string preset;
  std::string point;
  std::string grid;
  std::string regions;
  std::string mode;
  std::string out;
  std::string figure;
  std::optional<std::size_t> resolution;
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> warmup;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> sample_stride;
  std::optional<double> extent;
  bool simulate = false;
  bool pessimistic = false;
  bool json = false;
};

// Scenario file first, then flags on top.
Scenario merge(const Flags& f) {
  Scenario s = f.scenario.empty() ? Scenario{} : load_scenario(f.scenario);
  if (!f.preset.empty()) {
    if (!preset_params(f.preset)) {
      throw ScenarioError("unknown preset '" + f.preset + "' (expected fig2 or fig3)");
    }
    s.preset = f.preset;
  }
  if (!f.point.empty()) {
    const auto p = parse_point(f.point);
    s.lambda1 = p.lambda1;
    s.lambda2 = p.lambda2;
  }
  if (!f.grid.empty()) s.grid = parse_grid(f.grid);
  if (!f.regions.empty()) s.regions = parse_region_list(f.regions);
  if (!f.mode.empty()) {
    s.mode = sim::parse_mode(f.mode);
    if (!s.mode) throw ScenarioError("unknown mode '" + f.mode + "'");
  }
  if (f.pessimistic) s.pessimistic_relay = true;
  if (!f.out.empty()) s.out_dir = f.out;
  if (f.resolution) s.resolution = f.resolution;
  if (f.horizon) s.horizon = f.horizon;
  if (f.warmup) s.warmup = f.warmup;
  if (f.seed) s.seed = f.seed;
  if (f.sample_stride) s.sample_stride = f.sample_stride;
  if (f.extent) s.grid_extent = f.extent;
  return s;
}

SystemParams checked_params(const Scenario& s) {
  auto params = s.resolve_params();
  const auto report = validate(params);
  if (!report.ok()) throw InvalidParamsError(report.describe_errors());
  return params;
}

ArrivalPoint required_point(const Scenario& s) {
  if (!s.lambda1 || !s.lambda2) throw ScenarioError("no arrival point (use --point or lambda1/lambda2)");
  ArrivalPoint p{*s.lambda1, *s.lambda2};
  const auto report = validate(p);
  if (!report.ok()) throw InvalidParamsError(report.describe_errors());
  return p;
}

fs::path output_dir(const Scenario& s) {
  fs::path dir = ".";
  if (const char* env = std::getenv(kOutDirEnv); env && *env) dir = env;
  if (s.out_dir) dir = *s.out_dir;
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const auto& writer) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + path.string() + "'");
  writer(file);
  if (!file) throw std::runtime_error("error writing '" + path.string() + "'");
}

sim::SimConfig sim_config(const Scenario& s, const SystemParams& params, ArrivalPoint point) {
  sim::SimConfig c;
  c.params = params;
  c.point = point;
  c.mode.kind = s.mode.value_or(sim::ModeKind::Original);
  c.mode.pessimistic_relay_interference = s.pessimistic_relay.value_or(false);
  if (s.horizon) c.horizon = *s.horizon;
  if (s.warmup) c.warmup = *s.warmup;
  if (s.seed) c.seed = *s.seed;
  if (s.sample_stride) c.sample_stride = *s.sample_stride;
  sim::validate(c);
  const auto snapshots = (c.horizon - c.warmup) / c.sample_stride;
  if (snapshots < sim::kMinClassifierSnapshots) {
    throw sim::ConfigError(fmt::format(
        "only {} post-warmup snapshots; the classifier needs {} (lower sample_stride or warmup)",
        snapshots, sim::kMinClassifierSnapshots));
  }
  return c;
}

std::string params_title(const SystemParams& p) {
  return fmt::format("Stability region: p13={:g}, p23={:g}, p10={:g}, p20={:g}, p03={:g}",
                     p.channel.p13, p.channel.p23, p.channel.p10, p.channel.p20, p.channel.p03);
}

// ---------------------------------------------------------------------------
// JSON helpers

json to_json(const SystemParams& p) {
  return {{"p13", p.channel.p13}, {"p23", p.channel.p23}, {"p10", p.channel.p10},
          {"p20", p.channel.p20}, {"p03", p.channel.p03}, {"q0", p.access.q0},
          {"q1", p.access.q1},    {"q2", p.access.q2}};
}

json to_json(const ArrivalPoint& p) { return {{"lambda1", p.lambda1}, {"lambda2", p.lambda2}}; }

const char* group_name(ConditionGroup g) {
  switch (g) {
    case ConditionGroup::Sub1: return "sub1";
    case ConditionGroup::Sub2: return "sub2";
    case ConditionGroup::Relay: return "relay";
  }
  return "unknown";
}

json to_json(const RegionVerdict& v) {
  json conditions = json::array();
  for (const auto& c : v.conditions) {
    conditions.push_back({{"label", c.label},
                          {"group", group_name(c.group)},
                          {"lhs", c.lhs},
                          {"threshold", c.threshold},
                          {"holds", c.holds()}});
  }
  return {{"inside", v.inside}, {"binding", v.binding().label}, {"conditions", conditions}};
}

json to_json(const DerivedRates& r) {
  return {{"lambda0", r.lambda0},           {"mu0", r.mu0},
          {"mu1", r.mu1},                   {"mu2", r.mu2},
          {"relay_busy", r.relay_busy},     {"source_busy_1", r.source_busy_1},
          {"source_busy_2", r.source_busy_2}};
}

json to_json(const std::optional<sim::Estimate>& e) {
  if (!e) return nullptr;
  return {{"value", e->value}, {"std_error", e->std_error}, {"trials", e->trials}};
}

json to_json(const sim::EmpiricalRates& r) {
  return {{"lambda0", to_json(r.lambda0)},
          {"mu0", to_json(r.mu0)},
          {"mu1", to_json(r.mu1)},
          {"mu2", to_json(r.mu2)},
          {"relay_busy", to_json(r.relay_busy)},
          {"source_busy_1", to_json(r.source_busy_1)},
          {"source_busy_2", to_json(r.source_busy_2)},
          {"capture_fraction_1", to_json(r.capture_fraction_1)},
          {"capture_fraction_2", to_json(r.capture_fraction_2)},
          {"departure_rate_1", to_json(r.departure_rate_1)},
          {"departure_rate_2", to_json(r.departure_rate_2)},
          {"relay_attempt_success", to_json(r.relay_attempt_success)}};
}

json to_json(const sim::Counters& c) {
  json sources = json::array();
  for (const auto& s : c.sources) {
    sources.push_back({{"arrivals", s.arrivals},
                       {"direct_deliveries", s.direct_deliveries},
                       {"relay_captures", s.relay_captures},
                       {"departures", s.departures},
                       {"attempts", s.attempts},
                       {"dummy_attempts", s.dummy_attempts},
                       {"backlogged_slots", s.backlogged_slots}});
  }
  return {{"slots", c.slots},
          {"sources", sources},
          {"relay",
           {{"deliveries", c.relay.deliveries},
            {"attempts", c.relay.attempts},
            {"backlogged_slots", c.relay.backlogged_slots}}},
          {"collisions", c.collisions}};
}

json to_json(const sim::StabilityVerdict& v) {
  static constexpr const char* names[] = {"s1", "s2", "relay"};
  json out;
  for (int k = 0; k < 3; ++k) {
    const auto& q = v.queues[k];
    out[names[k]] = {{"status", std::string(to_string(q.status))},
                     {"drift", q.drift},
                     {"mean_length", q.mean_length},
                     {"final_length", q.final_length}};
  }
  return out;
}

json to_json(const sim::SimConfig& c) {
  return {{"params", to_json(c.params)},
          {"point", to_json(c.point)},
          {"mode", std::string(to_string(c.mode.kind))},
          {"pessimistic_relay", c.mode.pessimistic_relay_interference},
          {"horizon", c.horizon},
          {"warmup", c.warmup},
          {"seed", c.seed},
          {"sample_stride", c.sample_stride}};
}

template <class F>
json or_null(F&& f) {
  try {
    return f();
  } catch (const std::domain_error&) {
    return nullptr;
  }
}

// ---------------------------------------------------------------------------
// Commands

int cmd_classify(const Flags& f, std::ostream& out) {
  const auto s = merge(f);
  const auto params = checked_params(s);
  const auto point = required_point(s);

  const RegionVerdict verdicts[] = {inner_contains(params, point), outer_contains(params, point),
                                    no_relay_contains(params, point)};
  if (f.json) {
    json j{{"params", to_json(params)}, {"point", to_json(point)}};
    for (const auto& v : verdicts) j["regions"][std::string(to_string(v.region))] = to_json(v);
    j["lambda0"] = or_null([&] { return json(relay_arrival_rate(params.channel, point)); });
    j["relay_busy"] = or_null([&] { return json(relay_busy_probability(params, point)); });
    out << j.dump(2) << '\n';
    return kExitOk;
  }

  out << "point (" << format_number(point.lambda1) << ", " << format_number(point.lambda2)
      << ")\n";
  for (const auto& v : verdicts) {
    out << fmt::format("{:<9} {:<8} binding {}\n", to_string(v.region),
                       v.inside ? "inside" : "outside", v.binding().label);
    for (const auto& c : v.conditions) {
      out << fmt::format("  {:<16} {:>14} < {:<14} {}\n", c.label, format_number(c.lhs),
                         format_number(c.threshold), c.holds() ? "holds" : "fails");
    }
  }
  return kExitOk;
}

int cmd_region(const Flags& f, std::ostream& out) {
  const auto s = merge(f);
  const auto params = checked_params(s);
  const auto kinds = s.regions.value_or(
      std::vector{RegionKind::InnerBound, RegionKind::OuterBound, RegionKind::NoRelay});
  const auto resolution = s.resolution.value_or(kDefaultResolution);
  if (resolution < 2) throw ScenarioError("resolution must be at least 2");

  std::vector<BoundaryPolyline> lines;
  for (auto kind : kinds) lines.push_back(boundary_polyline(params, kind, resolution));

  const auto dir = output_dir(s);
  json files = json::array();
  for (const auto& line : lines) {
    const auto path = dir / (std::string(to_string(line.region)) + ".csv");
    write_file(path, [&](std::ostream& o) { write_boundary_csv(o, line); });
    files.push_back(path.string());
  }
  const auto svg = dir / "regions.svg";
  write_file(svg, [&](std::ostream& o) { write_region_svg(o, lines, params_title(params)); });
  files.push_back(svg.string());
  out << json{{"files", files}}.dump(2) << '\n';
  return kExitOk;
}

int cmd_simulate(const Flags& f, std::ostream& out) {
  const auto s = merge(f);
  const auto params = checked_params(s);
  const auto point = required_point(s);
  const auto config = sim_config(s, params, point);

  const auto result = sim::simulate(config);
  const bool conserved = sim::conserves_packets(result);

  json analytic{
      {"inner", inner_contains(params, point).inside},
      {"outer", outer_contains(params, point).inside},
      {"no_relay", no_relay_contains(params, point).inside},
      {"lambda0", or_null([&] { return json(relay_arrival_rate(params.channel, point)); })},
      {"mu0_assumed", assumed_relay_service_rate(params)},
      {"relay_busy", or_null([&] { return json(relay_busy_probability(params, point)); })},
      {"dom1", or_null([&] { return to_json(dominant_service_rates(params, point, Source::One)); })},
      {"dom2", or_null([&] { return to_json(dominant_service_rates(params, point, Source::Two)); })},
  };

  json j{{"config", to_json(config)},
         {"analytic", analytic},
         {"stability", to_json(sim::classify_stability(result))},
         {"empirical", to_json(sim::empirical_rates(result))},
         {"counters", to_json(result.total)},
         {"window_counters", to_json(result.window)},
         {"final_queue", result.final_queue},
         {"conservation", conserved}};
  out << j.dump(2) << '\n';
  if (!conserved) throw InvariantError("packet conservation failed");
  return kExitOk;
}

const char* sim_label(const sim::StabilityVerdict& v) {
  if (v.all_stable()) return "stable";
  if (v.any_unstable()) return "unstable";
  return "indeterminate";
}

int cmd_sweep(const Flags& f, std::ostream& out) {
  const auto s = merge(f);
  const auto params = checked_params(s);
  if (!s.grid) throw ScenarioError("sweep needs a grid (use --grid or grid = NxM)");
  const auto grid = *s.grid;
  const std::size_t total = grid.columns * grid.rows;
  const auto max_analytic = s.max_points_analytic.value_or(kDefaultMaxAnalytic);
  const auto max_simulated = s.max_points_simulated.value_or(kDefaultMaxSimulated);
  if (total > max_analytic) {
    throw ScenarioError(fmt::format("grid of {} points exceeds the analytic cap of {}", total,
                                    max_analytic));
  }
  if (f.simulate && total > max_simulated) {
    throw ScenarioError(fmt::format("grid of {} points exceeds the simulation cap of {}", total,
                                    max_simulated));
  }

  double extent = 0.0;
  if (s.grid_extent) {
    extent = *s.grid_extent;
  } else {
    for (auto axis : {Axis::Lambda1, Axis::Lambda2}) {
      extent = std::max(extent, axis_intercept(params, RegionKind::OuterBound, axis));
    }
    extent = std::min(1.0, extent > 0.0 ? 1.1 * extent : 1.0);
  }
  if (!(extent > 0.0 && extent <= 1.0)) throw ScenarioError("grid_extent must be in (0, 1]");

  // Cell centres, row-major with lambda2 as the outer index.
  std::vector<ArrivalPoint> points;
  points.reserve(total);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.columns; ++c) {
      points.push_back({(static_cast<double>(c) + 0.5) / static_cast<double>(grid.columns) * extent,
                        (static_cast<double>(r) + 0.5) / static_cast<double>(grid.rows) * extent});
    }
  }

  std::vector<sim::SimResult> results;
  std::vector<sim::SimConfig> configs;
  if (f.simulate) {
    for (std::size_t k = 0; k < points.size(); ++k) {
      configs.push_back(sim_config(s, params, points[k]));
      configs.back().seed = sim::derive_seed(configs.back().seed, k);
    }
    results = sim::simulate_batch(configs);
  }

  std::size_t inner_n = 0, outer_n = 0, no_relay_n = 0, inner_not_outer = 0, no_relay_not_inner = 0;
  std::size_t agreements = 0, disagreements = 0, indeterminates = 0, not_simulated = 0;
  bool conserved = true;
  json violations = json::array();

  const auto dir = output_dir(s);
  const auto csv_path = dir / "sweep.csv";
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write '" + csv_path.string() + "'");
  csv << "lambda1,lambda2,inner,outer,no_relay,binding,simulation,agreement\n";

  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    const auto inner = inner_contains(params, p);
    const auto outer = outer_contains(params, p);
    const auto no_relay = no_relay_contains(params, p);
    inner_n += inner.inside;
    outer_n += outer.inside;
    no_relay_n += no_relay.inside;
    inner_not_outer += inner.inside && !outer.inside;
    no_relay_not_inner += no_relay.inside && !inner.inside;

    std::string simulation = "not_simulated";
    std::string agreement = "not_simulated";
    if (f.simulate) {
      conserved = conserved && sim::conserves_packets(results[k]);
      const auto verdict = sim::classify_stability(results[k]);
      simulation = sim_label(verdict);
      if (simulation == "indeterminate") {
        agreement = "indeterminate";
        ++indeterminates;
      } else if ((simulation == "stable" && !outer.inside) ||
                 (simulation == "unstable" && inner.inside)) {
        agreement = "disagree";
        ++disagreements;
        violations.push_back({{"lambda1", p.lambda1},
                              {"lambda2", p.lambda2},
                              {"simulation", simulation},
                              {"inner", inner.inside},
                              {"outer", outer.inside}});
      } else {
        agreement = "agree";
        ++agreements;
      }
    } else {
      ++not_simulated;
    }

    csv << format_number(p.lambda1) << ',' << format_number(p.lambda2) << ',' << inner.inside
        << ',' << outer.inside << ',' << no_relay.inside << ',' << inner.binding().label << ','
        << simulation << ',' << agreement << '\n';
  }
  csv.close();
  if (!csv) throw std::runtime_error("error writing '" + csv_path.string() + "'");

  json j{{"grid", {{"columns", grid.columns}, {"rows", grid.rows}, {"extent", extent}}},
         {"points", total},
         {"inside", {{"inner", inner_n}, {"outer", outer_n}, {"no_relay", no_relay_n}}},
         {"inner_outside_outer", inner_not_outer},
         {"no_relay_outside_inner", no_relay_not_inner},
         {"agreements", agreements},
         {"disagreements", disagreements},
         {"indeterminates", indeterminates},
         {"not_simulated", not_simulated},
         {"violations", violations},
         {"conservation", conserved},
         {"csv", csv_path.string()}};
  out << j.dump(2) << '\n';
  if (!conserved) throw InvariantError("packet conservation failed in the sweep");
  if (inner_not_outer != 0) throw InvariantError("inner bound point outside the outer bound");
  return kExitOk;
}

int cmd_figure(const Flags& f, std::ostream& out) {
  auto preset = preset_params(f.figure);
  if (!preset) throw ScenarioError("unknown figure '" + f.figure + "' (expected fig2 or fig3)");
  auto s = merge(f);
  const auto params = *preset;
  const auto resolution = s.resolution.value_or(kDefaultResolution);
  if (resolution < 2) throw ScenarioError("resolution must be at least 2");

  const RegionKind kinds[] = {RegionKind::InnerBound, RegionKind::OuterBound, RegionKind::NoRelay};
  std::vector<BoundaryPolyline> lines;
  json intercepts;
  for (auto kind : kinds) {
    lines.push_back(boundary_polyline(params, kind, resolution));
    intercepts[std::string(to_string(kind))] = {
        {"lambda1", axis_intercept(params, kind, Axis::Lambda1)},
        {"lambda2", axis_intercept(params, kind, Axis::Lambda2)}};
  }

  const auto dir = output_dir(s);
  json files = json::array();
  for (const auto& line : lines) {
    const auto path = dir / (f.figure + "_" + std::string(to_string(line.region)) + ".csv");
    write_file(path, [&](std::ostream& o) { write_boundary_csv(o, line); });
    files.push_back(path.string());
  }
  const auto svg = dir / (f.figure + ".svg");
  write_file(svg, [&](std::ostream& o) { write_region_svg(o, lines, params_title(params)); });
  files.push_back(svg.string());

  const double gap = intercepts["inner"]["lambda1"].get<double>() -
                     intercepts["no-relay"]["lambda1"].get<double>();
  out << json{{"figure", f.figure},
              {"params", to_json(params)},
              {"intercepts", intercepts},
              {"inner_minus_no_relay_gap", gap},
              {"files", files}}
             .dump(2)
      << '\n';
  return kExitOk;
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scenario", f.scenario, "Scenario file (key = value)");
  cmd->add_option("--preset", f.preset, "Built-in parameter set: fig2 or fig3");
  cmd->add_option("--out", f.out, "Output directory (overrides $RELAYSTAB_OUT_DIR)");
}

void add_point(CLI::App* cmd, Flags& f) {
  cmd->add_option("--point", f.point, "Arrival rates <lambda1>,<lambda2> in packets/slot");
}

void add_sim(CLI::App* cmd, Flags& f) {
  cmd->add_option("--horizon", f.horizon, "Simulated slots");
  cmd->add_option("--warmup", f.warmup, "Slots discarded before estimation");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--sample-stride", f.sample_stride, "Slots between snapshots");
  cmd->add_option("--mode", f.mode, "original, dom1, dom2 or outer");
  cmd->add_flag("--pessimistic-relay", f.pessimistic,
                "Relay fails whenever a source attempt coin fires (dominant modes)");
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stability regions of a two-source random-access network with a relay",
               "relaystab"};
  app.require_subcommand(1);
  Flags f;

  auto* classify = app.add_subcommand("classify", "Region membership of one arrival point");
  add_common(classify, f);
  add_point(classify, f);
  classify->add_flag("--json", f.json, "Print JSON instead of text");

  auto* region = app.add_subcommand("region", "Boundary CSVs and an SVG overlay");
  add_common(region, f);
  region->add_option("--regions", f.regions, "Comma-separated region names");
  region->add_option("--resolution", f.resolution, "Boundary samples");

  auto* simulate = app.add_subcommand("simulate", "Simulate one arrival point");
  add_common(simulate, f);
  add_point(simulate, f);
  add_sim(simulate, f);

  auto* sweep = app.add_subcommand("sweep", "Classify (and optionally simulate) a grid");
  add_common(sweep, f);
  add_sim(sweep, f);
  sweep->add_option("--grid", f.grid, "Grid size <n>x<m>");
  sweep->add_option("--extent", f.extent, "Grid covers [0, extent]^2");
  sweep->add_flag("--simulate", f.simulate, "Simulate every grid point");

  auto* figure = app.add_subcommand("figure", "Reproduce a built-in region figure");
  figure->add_option("name", f.figure, "fig2 or fig3")->required();
  figure->add_option("--out", f.out, "Output directory (overrides $RELAYSTAB_OUT_DIR)");
  figure->add_option("--resolution", f.resolution, "Boundary samples");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "relaystab: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (classify->parsed()) return cmd_classify(f, out);
    if (region->parsed()) return cmd_region(f, out);
    if (simulate->parsed()) return cmd_simulate(f, out);
    if (sweep->parsed()) return cmd_sweep(f, out);
    return cmd_figure(f, out);
  } catch (const InvariantError& e) {
    err << "relaystab: invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    err << "relaystab: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace relaystab::cli
