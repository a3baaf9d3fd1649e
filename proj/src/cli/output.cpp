#include "relaystab/cli/output.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace relaystab::cli {

namespace {

constexpr double kWidth = 800;
constexpr double kHeight = 600;
constexpr double kLeft = 80;
constexpr double kRight = 30;
constexpr double kTop = 50;
constexpr double kBottom = 70;

const char* colour(RegionKind kind) {
  switch (kind) {
    case RegionKind::InnerBound: return "#1f77b4";
    case RegionKind::OuterBound: return "#d62728";
    case RegionKind::NoRelay: return "#2ca02c";
    case RegionKind::InnerSub1:
    case RegionKind::InnerSub2:
    case RegionKind::InnerRelay: return "#9ecae1";
    case RegionKind::OuterSub1:
    case RegionKind::OuterSub2:
    case RegionKind::OuterRelay: return "#fc9272";
  }
  return "#000000";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_number(double value) { return fmt::format("{:.9g}", value); }

void write_boundary_csv(std::ostream& out, const BoundaryPolyline& line) {
  out << "lambda1,lambda2_max\n";
  for (const auto& s : line.samples) {
    out << format_number(s.lambda1) << ',' << format_number(s.lambda2_max) << '\n';
  }
}

void write_region_svg(std::ostream& out, std::span<const BoundaryPolyline> lines,
                      const std::string& title) {
  double extent = 0.0;
  for (const auto& line : lines) {
    for (const auto& s : line.samples) extent = std::max({extent, s.lambda1, s.lambda2_max});
  }
  extent = extent > 0.0 ? 1.1 * extent : 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + x / extent * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - y / extent * plot_h; };

  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"13\">\n",
      kWidth, kHeight);
  out << fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  out << fmt::format("<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     kWidth / 2, escape(title));

  // Axes, ticks and grid.
  out << fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
      kLeft, kTop, plot_w, plot_h);
  constexpr int kTicks = 5;
  for (int k = 0; k <= kTicks; ++k) {
    const double v = extent * k / kTicks;
    out << fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#dddddd\"/>\n", px(v),
        kTop, kTop + plot_h);
    out << fmt::format(
        "<line x1=\"{1}\" y1=\"{0:.2f}\" x2=\"{2}\" y2=\"{0:.2f}\" stroke=\"#dddddd\"/>\n", py(v),
        kLeft, kLeft + plot_w);
    out << fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", px(v),
                       kTop + plot_h + 20, v);
    out << fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n",
                       kLeft - 8, py(v) + 4, v);
  }
  out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">λ1 (packets/slot)</text>\n",
                     kLeft + plot_w / 2, kHeight - 20);
  out << fmt::format(
      "<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">"
      "λ2 (packets/slot)</text>\n",
      kTop + plot_h / 2);

  int legend_row = 0;
  for (const auto& line : lines) {
    out << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << colour(line.region)
        << "\" points=\"";
    for (std::size_t k = 0; k < line.samples.size(); ++k) {
      if (k) out << ' ';
      out << fmt::format("{:.2f},{:.2f}", px(line.samples[k].lambda1),
                         py(line.samples[k].lambda2_max));
    }
    out << "\"/>\n";

    const double ly = kTop + 20 + 20 * legend_row++;
    const double lx = kLeft + plot_w - 150;
    out << fmt::format(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n", lx,
        ly - 4, lx + 30, ly - 4, colour(line.region));
    out << fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 38, ly,
                       to_string(line.region));
  }
  out << "</svg>\n";
}

}  // namespace relaystab::cli
