#pragma once

#include <string>
#include <vector>

namespace lodbs {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  ///< non-finite or non-positive entries are skipped
};

/// Dashed reference slope anchored at (x0, y0) and drawn up to x1,
/// y(x) = y0 * (x/x0)^order.
struct GuideLine {
  double order = 1.0;
  double x0 = 1.0, y0 = 1.0, x1 = 1.0;
  std::string label;
};

/// Render a log-log chart as a standalone SVG document. Output bytes depend
/// only on the inputs.
std::string render_loglog_svg(const std::string& title,
                              const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<PlotSeries>& series,
                              const std::vector<GuideLine>& guides = {});

}  // namespace lodbs
