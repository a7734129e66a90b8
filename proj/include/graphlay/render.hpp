#pragma once

#include <string>

#include "graphlay/graph.hpp"
#include "graphlay/layouts.hpp"

namespace graphlay {

/// Deterministic SVG: 1000x1000 viewport, 5% margin, 1px edges, radius-3
/// node circles. Coordinates are written with fixed precision so repeated
/// renders are byte-identical.
std::string render_svg(const Graph& g, const Layout& x);

}  // namespace graphlay
