// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "knd/errors.hpp"

namespace knd {

/// Uniform mesh of (0, pi) with n elements, nodes theta_j = j*pi/n.
struct Mesh {
  int n = 0;        ///< element count (>= 4)
  double h = 0.0;   ///< mesh width pi/n

  /// theta_j; endpoints are returned exactly as 0 and pi.
  double node(int j) const {
    if (j <= 0) return 0.0;
    if (j >= n) return std::numbers::pi;
    return j * h;
  }
};

/// Throws MeshTooCoarse below the standing assumption n >= 4.
inline Mesh build_mesh(int n) {
  if (n < 4) {
    throw MeshTooCoarse("mesh needs n >= 4 elements, got " + std::to_string(n));
  }
  return Mesh{n, std::numbers::pi / n};
}

/// Number of elements for a requested mesh width (n = round(pi/h), min 4).
inline int elements_for_width(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw MeshTooCoarse("mesh width must be positive and finite");
  }
  auto n = static_cast<long long>(std::llround(std::numbers::pi / h));
  return static_cast<int>(std::max(n, 4LL));
}

/// Hat function b_j (j = 1..n-1), piecewise affine, b_j(theta_k) = delta_jk,
/// vanishing at 0 and pi.
inline double hat_value(const Mesh& mesh, int j, double theta) {
  const double lo = mesh.node(j - 1), mid = mesh.node(j), hi = mesh.node(j + 1);
  if (theta <= lo || theta >= hi) return 0.0;
  return theta <= mid ? (theta - lo) / (mid - lo) : (hi - theta) / (hi - mid);
}

/// b_j' = +-1/h on the two support elements, 0 elsewhere (undefined at nodes;
/// callers must stay in element interiors).
inline double hat_derivative(const Mesh& mesh, int j, double theta) {
  const double lo = mesh.node(j - 1), mid = mesh.node(j), hi = mesh.node(j + 1);
  if (theta <= lo || theta >= hi) return 0.0;
  return theta <= mid ? 1.0 / (mid - lo) : -1.0 / (hi - mid);
}

}  // namespace knd
