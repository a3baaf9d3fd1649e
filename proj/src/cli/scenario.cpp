#include "relaystab/cli/scenario.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace relaystab::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  // std::from_chars for double is missing from older libstdc++; stod with a
  // full-consumption check is equivalent here.
  const std::string text(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) {
    throw ScenarioError(std::string(key) + ": expected a number, got '" + text + "'");
  }
  return out;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) {
    throw ScenarioError(std::string(key) + ": expected a non-negative integer, got '" +
                        std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ScenarioError(std::string(key) + ": expected true or false, got '" + std::string(value) +
                      "'");
}

}  // namespace

std::optional<SystemParams> preset_params(std::string_view name) {
  if (name == "fig2") return poor_direct_link_params();
  if (name == "fig3") return better_direct_link_params();
  return std::nullopt;
}

SystemParams Scenario::resolve_params() const {
  SystemParams out;
  bool have_base = false;
  if (preset) {
    auto base = preset_params(*preset);
    if (!base) throw ScenarioError("unknown preset '" + *preset + "' (expected fig2 or fig3)");
    out = *base;
    have_base = true;
  }
  auto apply = [&](const std::optional<double>& v, double& field, const char* name) {
    if (v) {
      field = *v;
    } else if (!have_base) {
      throw ScenarioError(std::string("missing parameter ") + name +
                          " (set it or choose a preset)");
    }
  };
  apply(params.p13, out.channel.p13, "p13");
  apply(params.p23, out.channel.p23, "p23");
  apply(params.p10, out.channel.p10, "p10");
  apply(params.p20, out.channel.p20, "p20");
  apply(params.p03, out.channel.p03, "p03");
  apply(params.q0, out.access.q0, "q0");
  apply(params.q1, out.access.q1, "q1");
  apply(params.q2, out.access.q2, "q2");
  return out;
}

ArrivalPoint parse_point(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw ScenarioError("point: expected '<lambda1>,<lambda2>', got '" + std::string(text) + "'");
  }
  return {parse_double("lambda1", trim(text.substr(0, comma))),
          parse_double("lambda2", trim(text.substr(comma + 1)))};
}

GridSpec parse_grid(std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos) {
    throw ScenarioError("grid: expected '<n>x<m>', got '" + std::string(text) + "'");
  }
  GridSpec g{parse_u64("grid", trim(text.substr(0, x))),
             parse_u64("grid", trim(text.substr(x + 1)))};
  if (g.columns == 0 || g.rows == 0) throw ScenarioError("grid: empty grid");
  return g;
}

std::vector<RegionKind> parse_region_list(std::string_view text) {
  std::vector<RegionKind> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto name = trim(text.substr(0, comma));
    auto kind = parse_region_kind(name);
    if (!kind) throw ScenarioError("unknown region '" + std::string(name) + "'");
    out.push_back(*kind);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
  }
  if (out.empty()) throw ScenarioError("regions: empty list");
  return out;
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::set<std::string, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ScenarioError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.emplace(key).second) {
      throw ScenarioError("line " + std::to_string(line_no) + ": duplicate key '" +
                          std::string(key) + "'");
    }

    auto& p = s.params;
    if (key == "preset") s.preset = std::string(value);
    else if (key == "p13") p.p13 = parse_double(key, value);
    else if (key == "p23") p.p23 = parse_double(key, value);
    else if (key == "p10") p.p10 = parse_double(key, value);
    else if (key == "p20") p.p20 = parse_double(key, value);
    else if (key == "p03") p.p03 = parse_double(key, value);
    else if (key == "q0") p.q0 = parse_double(key, value);
    else if (key == "q1") p.q1 = parse_double(key, value);
    else if (key == "q2") p.q2 = parse_double(key, value);
    else if (key == "lambda1") s.lambda1 = parse_double(key, value);
    else if (key == "lambda2") s.lambda2 = parse_double(key, value);
    else if (key == "grid") s.grid = parse_grid(value);
    else if (key == "grid_extent") s.grid_extent = parse_double(key, value);
    else if (key == "mode") {
      s.mode = sim::parse_mode(value);
      if (!s.mode) {
        throw ScenarioError("mode: expected original, dom1, dom2 or outer, got '" +
                            std::string(value) + "'");
      }
    }
    else if (key == "pessimistic_relay") s.pessimistic_relay = parse_bool(key, value);
    else if (key == "horizon") s.horizon = parse_u64(key, value);
    else if (key == "warmup") s.warmup = parse_u64(key, value);
    else if (key == "sample_stride") s.sample_stride = parse_u64(key, value);
    else if (key == "seed") s.seed = parse_u64(key, value);
    else if (key == "regions") s.regions = parse_region_list(value);
    else if (key == "resolution") s.resolution = parse_u64(key, value);
    else if (key == "out_dir") s.out_dir = std::string(value);
    else if (key == "max_points_analytic") s.max_points_analytic = parse_u64(key, value);
    else if (key == "max_points_simulated") s.max_points_simulated = parse_u64(key, value);
    else {
      throw ScenarioError("line " + std::to_string(line_no) + ": unknown key '" +
                          std::string(key) + "'");
    }
  }
  if (s.preset && !preset_params(*s.preset)) {
    throw ScenarioError("unknown preset '" + *s.preset + "' (expected fig2 or fig3)");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace relaystab::cli
