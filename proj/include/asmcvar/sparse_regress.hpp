#pragma once

#include "asmcvar/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <vector>

namespace asmcvar {

// Synthetic sparse regression: y = X beta* + eps, rows of X ~ N(0, Sigma)
// with Sigma_ij = 0.5^|i-j|, eps ~ N(0, 1).
struct RegressionInstance {
  Matrix X;
  Vector y;
  Vector beta_true;
  int m = 3;
  double gamma = 1e-7;
  std::uint64_t seed = 0;
};

struct RegressionShape {
  Index n = 50;
  Index d = 10;
  int m = 3;
  Index true_support = 3;  // beta* = (1_k, 0_{d-k})
};

Matrix toeplitz_covariance(Index d, double base = 0.5);

RegressionInstance generate_instance(std::uint64_t seed, double gamma = 1e-7,
                                     const RegressionShape& shape = {});

// 0.5 ||X beta - y||^2 + (1/(2 gamma)) ||beta - eta||^2.
double relaxed_objective(const RegressionInstance& inst, const Vector& beta,
                         const Vector& eta);
// 0.5 ||X beta - y||^2.
double original_objective(const RegressionInstance& inst, const Vector& beta);

struct RegressResult {
  Vector beta;
  Vector eta;
  long iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // every trace_stride iterations
};

// PALM on the relaxed model from beta = eta = 0:
//   beta <- beta - a1 [X'(X beta - y) + (beta - eta)/gamma]
//   eta  <- S_m((1 - a2/gamma) eta + (a2/gamma) beta)
// with a1 = 0.99 / ||X'X + I/gamma||_2 and a2 = 0.99 gamma.
RegressResult palm_regress(const RegressionInstance& inst, long iteration_cap = 5'000'000,
                           double tol = 1e-12, long trace_stride = 0);

struct OracleResult {
  double objective = 0.0;
  Support support;
  Vector solution;  // beta (and for the relaxed model, beta at the optimum)
  long cases = 0;
};

inline constexpr long kMaxOracleCases = 100000;

long binomial(long n, long k);

// Best objective over every support of size m. The original model solves
// least squares on the support; the relaxed model solves the joint
// (d + m) normal system in (beta, eta_S). Throws CombinatorialLimitError
// when C(d, m) exceeds kMaxOracleCases.
OracleResult exhaustive_oracle(const RegressionInstance& inst, bool relaxed);

struct TrialRecord {
  std::uint64_t seed = 0;
  Support palm_support;
  Support relaxed_support;
  Support original_support;
  double palm_objective = 0.0;
  double relaxed_objective = 0.0;
  double original_objective = 0.0;
  double objective_gap = 0.0;  // (palm - relaxed) / |relaxed|
  bool palm_matches_original = false;
  bool relaxed_matches_original = false;
  long palm_iterations = 0;
};

TrialRecord run_trial(std::uint64_t seed, double gamma, const RegressionShape& shape,
                      long iteration_cap, double tol);

nlohmann::json to_json(const TrialRecord& record);

}  // namespace asmcvar
