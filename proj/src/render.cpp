#include "graphlay/render.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace graphlay {

std::string render_svg(const Graph& g, const Layout& x) {
  if (x.rows() != g.num_nodes() || x.cols() != 2)
    throw std::invalid_argument("layout shape does not match graph");
  constexpr double kSize = 1000.0;
  constexpr double kMargin = 0.05 * kSize;

  double xmin = 1e308, xmax = -1e308, ymin = 1e308, ymax = -1e308;
  for (int i = 0; i < x.rows(); ++i) {
    xmin = std::min(xmin, x(i, 0));
    xmax = std::max(xmax, x(i, 0));
    ymin = std::min(ymin, x(i, 1));
    ymax = std::max(ymax, x(i, 1));
  }
  const double extent = std::max(xmax - xmin, ymax - ymin);
  const double scale = extent > 0.0 ? (kSize - 2.0 * kMargin) / extent : 0.0;
  // Center the drawing; degenerate layouts collapse to the midpoint.
  const double xoff = (kSize - scale * (xmax - xmin)) / 2.0;
  const double yoff = (kSize - scale * (ymax - ymin)) / 2.0;

  auto px = [&](int i) { return xoff + scale * (x(i, 0) - xmin); };
  auto py = [&](int i) { return yoff + scale * (x(i, 1) - ymin); };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" "
         "viewBox=\"0 0 1000 1000\">\n";
  svg += "<rect width=\"1000\" height=\"1000\" fill=\"white\"/>\n";
  for (auto [u, v] : g.edges()) {
    svg += "<line x1=\"" + fmt(px(u)) + "\" y1=\"" + fmt(py(u)) + "\" x2=\"" +
           fmt(px(v)) + "\" y2=\"" + fmt(py(v)) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }
  for (int i = 0; i < x.rows(); ++i) {
    svg += "<circle cx=\"" + fmt(px(i)) + "\" cy=\"" + fmt(py(i)) +
           "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace graphlay
