#pragma once

#include <string>
#include <vector>

#include "pnpkit/core.hpp"

namespace pnpkit {

/// Synthetic grayscale test images: piecewise-constant shapes over a smooth
/// ramp, values in [0, 1].
std::vector<std::string> builtin_image_names();
Signal builtin_image(const std::string& name, int size = 64);
bool is_builtin_image(const std::string& name);

}  // namespace pnpkit
