#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace asmcvar {

// Seeded 64-bit Mersenne Twister. Uniform and Gaussian draws are derived
// from the raw engine output by fixed formulas (53-bit mantissa fill and
// Box-Muller) rather than std:: distributions, whose algorithms are
// implementation-defined.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64/u53/box-muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal.
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace asmcvar
