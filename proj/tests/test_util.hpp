#pragma once

#include <random>
#include <vector>

#include "aed/tensor.hpp"

namespace aed::testutil {

// Uniform values in [lo, hi] with |v| >= margin, so relu/maxpool gradchecks
// stay away from subgradient kinks.
inline Tensor64 random_tensor(std::vector<std::size_t> shape, std::uint64_t seed, double lo = -1.0,
                              double hi = 1.0, double margin = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor64 t = Tensor64::zeros(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) {
    double v = dist(rng);
    while (margin > 0.0 && std::fabs(v) < margin) v = dist(rng);
    t[i] = v;
  }
  return t;
}

inline bool bitwise_equal(const Tensor64& a, const Tensor64& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.numel(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace aed::testutil
