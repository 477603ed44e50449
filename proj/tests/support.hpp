#pragma once

#include "kcurv/symmetric_curvature.hpp"

#include <random>

namespace kcurv::test {

/// Rejection sample from Gamma_k: shifted Gaussian tuples, kept when admissible.
inline EigenTuple sample_gamma_k(std::mt19937_64& rng, int n, int k) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-0.5, 2.0);
  for (;;) {
    EigenTuple lambda(n);
    const double s = shift(rng);
    for (int i = 0; i < n; ++i) lambda(i) = s + normal(rng);
    if (in_gamma_k(lambda, k).member) return lambda;
  }
}

/// Subset enumeration of S_k.
inline double sigma_by_subsets(const EigenTuple& lambda, int k) {
  const int n = int(lambda.size());
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    double prod = 1.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) prod *= lambda(i);
    total += prod;
  }
  return total;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

}  // namespace kcurv::test
