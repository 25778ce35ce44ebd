#pragma once

#include <string>

#include "cfx/distances.hpp"
#include "cfx/timeseries.hpp"

namespace cfx {

struct SvgOptions {
    double width = 800.0;
    double panel_height = 180.0;
    std::string title;
};

/// Standalone SVG 1.1: one panel per channel with the original (blue) and
/// counterfactual (orange) polylines and a translucent rectangle over each
/// changed segment. Time t maps to the centre of a column of equal width,
/// so a segment [s, e] spans columns s..e exactly.
std::string render_svg(const TimeSeries& x, const TimeSeries& cf, const ChangeMask& mask, const SvgOptions& opts = {});

}  // namespace cfx
