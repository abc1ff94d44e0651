#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "relnet/simd.hpp"

namespace relnet {

/// Stable softmax in place (max subtracted before exponentiation).
inline void softmax_inplace(std::span<double> x) {
  if (x.empty()) return;
  const double mx = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double& v : x) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : x) v /= sum;
}

/// Backprop through softmax: given y = softmax(z) and dL/dy, writes dL/dz.
inline void softmax_backward(std::span<const double> y, std::span<const double> grad_y,
                             std::span<double> grad_z) {
  double inner = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) inner += y[i] * grad_y[i];
  for (std::size_t i = 0; i < y.size(); ++i) grad_z[i] = y[i] * (grad_y[i] - inner);
}

inline constexpr double kNormFloor = 1e-12;

inline double norm(std::span<const double> x) { return std::sqrt(simd::dot(x, x)); }

/// Cosine similarity with norms clamped below at 1e-12.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  return simd::dot(a, b) / (std::max(norm(a), kNormFloor) * std::max(norm(b), kNormFloor));
}

}  // namespace relnet
