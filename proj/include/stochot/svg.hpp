#pragma once

#include <string>
#include <vector>

namespace stochot {

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

struct SvgAxes {
  std::string title, xlabel, ylabel;
  bool logx = false;
  bool logy = false;
};

// Self-contained deterministic SVG: one polyline per series, decade ticks on
// log axes, legend in the top right. Points that cannot be placed on a log
// axis (values <= 0) are dropped from their polyline.
std::string render_svg(const std::vector<SvgSeries>& series, const SvgAxes& axes);

void emit_svg(const std::string& path, const std::vector<SvgSeries>& series,
              const SvgAxes& axes);

}  // namespace stochot
