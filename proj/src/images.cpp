#include "pnpkit/images.hpp"

#include <algorithm>
#include <cmath>

namespace pnpkit {

std::vector<std::string> builtin_image_names() { return {"shapes", "blocks", "rings"}; }

bool is_builtin_image(const std::string& name) {
  const auto names = builtin_image_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Signal builtin_image(const std::string& name, int size) {
  if (size < 8) throw InvalidArgument("builtin images need size >= 8");
  const double n = size;
  Signal img({size, size});
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const double u = r / n;
      const double v = c / n;
      double value;
      if (name == "shapes") {
        value = 0.2 + 0.3 * v;
        if (u > 0.15 && u < 0.45 && v > 0.1 && v < 0.5) value = 0.85;
        if ((u - 0.68) * (u - 0.68) + (v - 0.65) * (v - 0.65) < 0.04) value = 0.1;
        if (u > 0.55 && v < 0.35 && v > u - 0.55) value = 0.6;
      } else if (name == "blocks") {
        value = 0.3 + 0.4 * u * v;
        if (u > 0.1 && u < 0.4 && v > 0.55 && v < 0.9) value = 0.95;
        if (u > 0.5 && u < 0.9 && v > 0.15 && v < 0.45) value = 0.05;
        if (u > 0.6 && u < 0.8 && v > 0.6 && v < 0.8) value = 0.7;
      } else if (name == "rings") {
        value = 0.5 + 0.25 * std::sin(3.0 * u);
        const double rad = std::hypot(u - 0.5, v - 0.5);
        if (rad < 0.35 && rad > 0.25) value = 0.9;
        if (rad < 0.12) value = 0.15;
        if (u < 0.15 && v > 0.7) value = 0.4;
      } else {
        throw InvalidArgument("unknown builtin image '" + name + "'");
      }
      img[static_cast<Eigen::Index>(r) * size + c] = value;
    }
  }
  img.range_hint = std::array<double, 2>{0.0, 1.0};
  return img;
}

}  // namespace pnpkit
