#pragma once

// Shared test helpers: central finite differences and random tensors.
// Oracles here must stay independent of the library's backward paths.

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace testutil {

inline std::vector<double> random_vec(std::mt19937_64& rng, size_t n,
                                      double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Central finite-difference gradient of a scalar function of a parameter
// vector that is mutated in place.
inline std::vector<double> fd_gradient(std::span<double> params,
                                       const std::function<double()>& eval,
                                       double h = 1e-6) {
  std::vector<double> g(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    const double step = h * std::max(1.0, std::abs(keep));
    params[i] = keep + step;
    const double up = eval();
    params[i] = keep - step;
    const double down = eval();
    params[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

// Max relative error between analytic and finite-difference gradients.
// Floors the denominator so that near-zero pairs compare absolutely.
inline double max_rel_err(std::span<const double> analytic,
                          std::span<const double> fd, double floor = 1e-4) {
  double worst = 0.0;
  for (size_t i = 0; i < analytic.size(); ++i) {
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(fd[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - fd[i]) / denom);
  }
  return worst;
}

}  // namespace testutil
