#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "aed/graph.hpp"

// Central-difference gradient verification. 64-bit only: f32 rounding noise
// swamps the (f(x+e) - f(x-e)) / 2e quotient at useful step sizes.

namespace aed {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coords_checked = 0;
};

// Compares analytic gradients of build() against central differences taken
// by perturbing the parameter tensors in place. build() must construct a
// fresh scalar-rooted graph from the current parameter values each call.
// Checks every coordinate when max_coords_per_param is 0, otherwise a seeded
// random subset per parameter.
inline GradCheckReport finite_diff_check(const std::function<NodePtr<double>()>& build,
                                         const std::vector<NodePtr<double>>& params, double eps,
                                         std::size_t max_coords_per_param = 0,
                                         std::uint64_t coord_seed = 0) {
  NodePtr<double> root = build();
  backward(root);

  std::vector<Tensor64> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    if (p->grad.numel() == 0)
      analytic.push_back(Tensor64::zeros(p->value.shape()));
    else
      analytic.push_back(p->grad);
  }

  std::mt19937_64 rng(coord_seed);
  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Node<double>& p = *params[pi];
    const std::size_t n = p.value.numel();
    std::vector<std::size_t> coords;
    if (max_coords_per_param == 0 || n <= max_coords_per_param) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < max_coords_per_param; ++i) coords.push_back(pick(rng));
    }
    for (std::size_t ci : coords) {
      const double saved = p.value[ci];
      p.value[ci] = saved + eps;
      const double f_plus = build()->value[0];
      p.value[ci] = saved - eps;
      const double f_minus = build()->value[0];
      p.value[ci] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * eps);
      const double a = analytic[pi][ci];
      // error relative to max(|analytic|, |numeric|, 1)
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1.0});
      const double rel = std::fabs(a - numeric) / denom;
      ++report.coords_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p.name;
        report.worst_index = ci;
      }
    }
  }
  return report;
}

}  // namespace aed
