#pragma once

#include <array>
#include <string>
#include <vector>

namespace wkbsplit {

struct SvgSeries {
    std::string label;
    std::vector<std::array<double, 2>> points;  // (x, y), both positive
};

// Self-contained log-log SVG: one polyline per series, grid lines and tick
// labels at powers of ten spanning the data. Non-positive points are skipped.
// Throws std::runtime_error with the path on I/O failure.
void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<SvgSeries>& series);

}  // namespace wkbsplit
