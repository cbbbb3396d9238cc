#pragma once

#include <string>
#include <vector>

#include "pnpkit/core.hpp"

namespace pnpkit::cli {

/// Two-panel SVG: log10 step residual (left) and PSNR (right) against
/// iteration, one polyline per trace in each panel.
std::string render_svg(const std::vector<Trace>& traces, const std::vector<std::string>& labels);

}  // namespace pnpkit::cli
