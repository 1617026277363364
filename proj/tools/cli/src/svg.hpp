#pragma once

#include <optional>
#include <string>

#include "hmrgeom/fitting.hpp"

namespace hmrgeom::cli {

/// Scatter of target height against mean 2D error (px, left axis) and
/// PA-MPJPE to the reference (mm, right axis). The most divergent pair is
/// joined by a line; the true height, when known, is marked.
std::string ambiguity_svg(const HeightSweepResult& sweep, std::optional<double> true_height);

}  // namespace hmrgeom::cli
