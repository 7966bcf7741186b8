#include "asmcvar/errors.hpp"
#include "asmcvar/linalg.hpp"
#include "asmcvar/rng.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

namespace asmcvar {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink() {
  static WarningSink s = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return s;
}

}  // namespace

void set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(s);
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

double Rng::normal() {
  if (spare_) {
    const double out = *spare_;
    spare_.reset();
    return out;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  return r * std::cos(angle);
}

Vector jittered_start(Index dim, std::uint64_t seed) {
  Rng rng(seed);
  Vector x(dim);
  for (Index i = 0; i < dim; ++i) x[i] = 1.0 + 1e-3 * (2.0 * rng.uniform() - 1.0);
  return x / x.norm();
}

PowerIterationResult power_iteration(const LinearMap& gram, Index dim,
                                     std::uint64_t seed, double rel_tol, int max_iter) {
  PowerIterationResult result;
  if (dim == 0) {
    result.converged = true;
    return result;
  }
  Vector x = jittered_start(dim, seed);
  Vector y(dim);
  double previous = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    gram(x, y);
    const double estimate = x.dot(y);
    result.value = std::max(result.value, estimate);
    result.iterations = it;
    const double norm = y.norm();
    if (norm == 0.0) {
      result.converged = true;
      return result;
    }
    if (it > 1 && std::abs(estimate - previous) <= rel_tol * std::abs(estimate)) {
      result.converged = true;
      return result;
    }
    previous = estimate;
    x = y / norm;
  }
  warn("power iteration hit its cap of " + std::to_string(max_iter) +
       " iterations; using best estimate " + std::to_string(result.value));
  return result;
}

}  // namespace asmcvar
