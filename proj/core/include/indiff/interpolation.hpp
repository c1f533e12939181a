#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace indiff {

/// Four-point Lagrange stencil on a uniform grid x_i = origin + i * spacing,
/// i in [0, count). Near the ends the stencil is shifted inwards. Grids with
/// fewer than four nodes fall back to linear weights.
struct CubicStencil {
  std::size_t first = 0;
  std::size_t size = 0;
  std::array<double, 4> weights{};
};

inline CubicStencil cubic_stencil(double x, double origin, double spacing, std::size_t count) {
  CubicStencil s;
  const double u = (x - origin) / spacing;
  if (count < 4) {
    const double cell = std::clamp(std::floor(u), 0.0, static_cast<double>(count > 1 ? count - 2 : 0));
    s.first = static_cast<std::size_t>(cell);
    if (count == 1) {
      s.size = 1;
      s.weights[0] = 1.0;
      return s;
    }
    const double f = u - cell;
    s.size = 2;
    s.weights[0] = 1.0 - f;
    s.weights[1] = f;
    return s;
  }
  const double base = std::clamp(std::floor(u) - 1.0, 0.0, static_cast<double>(count - 4));
  s.first = static_cast<std::size_t>(base);
  s.size = 4;
  const double v = u - base;  // position relative to node `first`
  for (std::size_t i = 0; i < 4; ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (j == i) continue;
      w *= (v - static_cast<double>(j)) / (static_cast<double>(i) - static_cast<double>(j));
    }
    s.weights[i] = w;
  }
  return s;
}

}  // namespace indiff
