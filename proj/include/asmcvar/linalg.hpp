#pragma once

#include "asmcvar/types.hpp"

#include <cstdint>
#include <functional>

namespace asmcvar {

using LinearMap = std::function<void(const Vector& in, Vector& out)>;

struct PowerIterationResult {
  double value = 0.0;  // Rayleigh-quotient estimate of the top eigenvalue
  int iterations = 0;
  bool converged = false;
};

// Multiplicative slack applied to power-iteration estimates before they are
// used as step-size denominators.
inline constexpr double kNormInflation = 1.0 + 1e-6;

// All-ones direction with a seeded relative jitter of 1e-3, unit norm.
Vector jittered_start(Index dim, std::uint64_t seed);

// Power iteration for the largest eigenvalue of a symmetric positive
// semidefinite operator. Stops when successive estimates agree to rel_tol.
// Hitting max_iter emits a warning and returns the best estimate.
PowerIterationResult power_iteration(const LinearMap& gram, Index dim,
                                     std::uint64_t seed, double rel_tol = 1e-8,
                                     int max_iter = 1000);

}  // namespace asmcvar
