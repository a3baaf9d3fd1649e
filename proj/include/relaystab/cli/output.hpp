#pragma once

#include <ostream>
#include <span>
#include <string>

#include "relaystab/regions.hpp"

namespace relaystab::cli {

/// Nine significant digits, the fixed numeric format of every CSV.
std::string format_number(double value);

/// Header `lambda1,lambda2_max`, one row per sample, LF line endings.
void write_boundary_csv(std::ostream& out, const BoundaryPolyline& line);

/// 800x600 overlay with one polyline per region. Both axes span
/// [0, 1.1 * largest axis intercept].
void write_region_svg(std::ostream& out, std::span<const BoundaryPolyline> lines,
                      const std::string& title);

}  // namespace relaystab::cli
