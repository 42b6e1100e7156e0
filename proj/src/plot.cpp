#include "lodbs/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace lodbs {

namespace {

constexpr double kWidth = 760.0, kHeight = 540.0;
constexpr double kLeft = 78.0, kRight = 200.0, kTop = 48.0, kBottom = 64.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string fmt(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string tick_label(int exponent) {
  return "1e" + std::to_string(exponent);
}

struct Axis {
  double lmin = 0.0, lmax = 1.0;  // log10 range
  double lo_px = 0.0, hi_px = 1.0;

  double place(double value) const {
    const double t = (std::log10(value) - lmin) / (lmax - lmin);
    return lo_px + t * (hi_px - lo_px);
  }
};

void marker(std::ostringstream& svg, int series_index, double cx, double cy,
            const std::string& color) {
  switch (series_index % 4) {
    case 0:
      svg << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy)
          << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
      break;
    case 1:
      svg << "<rect x=\"" << fmt(cx - 3.2) << "\" y=\"" << fmt(cy - 3.2)
          << "\" width=\"6.4\" height=\"6.4\" fill=\"" << color << "\"/>\n";
      break;
    case 2:
      svg << "<path d=\"M " << fmt(cx) << ' ' << fmt(cy - 4.2) << " L "
          << fmt(cx + 3.8) << ' ' << fmt(cy + 3.0) << " L " << fmt(cx - 3.8)
          << ' ' << fmt(cy + 3.0) << " Z\" fill=\"" << color << "\"/>\n";
      break;
    default:
      svg << "<path d=\"M " << fmt(cx) << ' ' << fmt(cy - 4.4) << " L "
          << fmt(cx + 4.0) << ' ' << fmt(cy) << " L " << fmt(cx) << ' '
          << fmt(cy + 4.4) << " L " << fmt(cx - 4.0) << ' ' << fmt(cy)
          << " Z\" fill=\"" << color << "\"/>\n";
  }
}

}  // namespace

std::string render_loglog_svg(const std::string& title,
                              const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<PlotSeries>& series,
                              const std::vector<GuideLine>& guides) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  auto admit = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y) || x <= 0.0 || y <= 0.0)
      return false;
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
    return true;
  };
  for (const PlotSeries& sr : series)
    for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i)
      admit(sr.x[i], sr.y[i]);
  for (const GuideLine& g : guides) {
    admit(g.x0, g.y0);
    if (g.x0 > 0.0 && g.y0 > 0.0 && g.x1 > 0.0)
      admit(g.x1, g.y0 * std::pow(g.x1 / g.x0, g.order));
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth, 0)
      << "\" height=\"" << fmt(kHeight, 0) << "\" viewBox=\"0 0 "
      << fmt(kWidth, 0) << ' ' << fmt(kHeight, 0) << "\">\n";
  svg << "<rect width=\"" << fmt(kWidth, 0) << "\" height=\"" << fmt(kHeight, 0)
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fmt((kLeft + kWidth - kRight) / 2.0)
      << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\" "
         "text-anchor=\"middle\">"
      << escape(title) << "</text>\n";

  if (!(xmin < xmax) && !(xmin == xmax && std::isfinite(xmin))) {
    svg << "<text x=\"" << fmt(kWidth / 2.0) << "\" y=\"" << fmt(kHeight / 2.0)
        << "\" font-family=\"sans-serif\" font-size=\"14\" "
           "text-anchor=\"middle\">no data</text>\n</svg>\n";
    return svg.str();
  }

  Axis ax, ay;
  ax.lmin = std::log10(xmin);
  ax.lmax = std::log10(xmax);
  ay.lmin = std::log10(ymin);
  ay.lmax = std::log10(ymax);
  auto pad = [](double& lo, double& hi) {
    const double margin = (hi - lo) < 1e-12 ? 0.5 : 0.06 * (hi - lo);
    lo -= margin;
    hi += margin;
  };
  pad(ax.lmin, ax.lmax);
  pad(ay.lmin, ay.lmax);
  ax.lo_px = kLeft;
  ax.hi_px = kWidth - kRight;
  ay.lo_px = kHeight - kBottom;  // y grows downward
  ay.hi_px = kTop;

  // Frame and decade grid.
  svg << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
      << fmt(kWidth - kRight - kLeft) << "\" height=\""
      << fmt(kHeight - kBottom - kTop)
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  for (int k = static_cast<int>(std::ceil(ax.lmin));
       k <= static_cast<int>(std::floor(ax.lmax)); ++k) {
    const double px = ax.place(std::pow(10.0, k));
    svg << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
        << fmt(px) << "\" y2=\"" << fmt(kHeight - kBottom)
        << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(kHeight - kBottom + 18)
        << "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">"
        << tick_label(k) << "</text>\n";
  }
  for (int k = static_cast<int>(std::ceil(ay.lmin));
       k <= static_cast<int>(std::floor(ay.lmax)); ++k) {
    const double py = ay.place(std::pow(10.0, k));
    svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py) << "\" x2=\""
        << fmt(kWidth - kRight) << "\" y2=\"" << fmt(py)
        << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(py + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"end\">"
        << tick_label(k) << "</text>\n";
  }
  svg << "<text x=\"" << fmt((kLeft + kWidth - kRight) / 2.0) << "\" y=\""
      << fmt(kHeight - 16)
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  svg << "<text x=\"20\" y=\"" << fmt((kTop + kHeight - kBottom) / 2.0)
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << fmt((kTop + kHeight - kBottom) / 2.0) << ")\">" << escape(y_label)
      << "</text>\n";

  for (const GuideLine& g : guides) {
    if (!(g.x0 > 0.0) || !(g.y0 > 0.0) || !(g.x1 > 0.0)) continue;
    const double y1 = g.y0 * std::pow(g.x1 / g.x0, g.order);
    svg << "<line x1=\"" << fmt(ax.place(g.x0)) << "\" y1=\""
        << fmt(ay.place(g.y0)) << "\" x2=\"" << fmt(ax.place(g.x1))
        << "\" y2=\"" << fmt(ay.place(y1))
        << "\" stroke=\"#888888\" stroke-dasharray=\"5 4\"/>\n";
    if (!g.label.empty()) {
      const double mx = std::sqrt(g.x0 * g.x1);
      const double my = g.y0 * std::pow(mx / g.x0, g.order);
      svg << "<text x=\"" << fmt(ax.place(mx) + 6) << "\" y=\""
          << fmt(ay.place(my) - 6)
          << "\" font-family=\"sans-serif\" font-size=\"11\" "
             "fill=\"#666666\">"
          << escape(g.label) << "</text>\n";
    }
  }

  int drawn = 0;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& sr = series[si];
    const std::string color = kPalette[si % kPaletteSize];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
      const double x = sr.x[i], y = sr.y[i];
      if (std::isfinite(x) && std::isfinite(y) && x > 0.0 && y > 0.0)
        pts.emplace_back(ax.place(x), ay.place(y));
    }
    if (pts.size() >= 2) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.8\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i)
        svg << (i ? " " : "") << fmt(pts[i].first) << ',' << fmt(pts[i].second);
      svg << "\"/>\n";
    }
    for (const auto& [px, py] : pts)
      marker(svg, static_cast<int>(si), px, py, color);

    const double ly = kTop + 12 + 22.0 * drawn;
    const double lx = kWidth - kRight + 14;
    svg << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << fmt(lx + 26) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"1.8\"/>\n";
    marker(svg, static_cast<int>(si), lx + 13, ly, color);
    svg << "<text x=\"" << fmt(lx + 32) << "\" y=\"" << fmt(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(sr.label) << "</text>\n";
    ++drawn;
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace lodbs
