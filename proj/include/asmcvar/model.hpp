#pragma once

#include "asmcvar/data.hpp"
#include "asmcvar/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>

namespace asmcvar {

struct ModelParams {
  double c = 0.99;       // CVaR confidence level
  double rho = 0.02;     // expected return level
  double gamma = 1e-5;   // tail approximation parameter
  int m = 10;            // sparsity budget
  std::optional<double> lambda;  // defaults to default_lambda()
  std::uint64_t seed = 0;        // power-iteration start vector
};

// Compact form of the sparse mean-CVaR problem for one window.
//
// The decision vector is v = (w, tau, z) of length N1 = N + 1 + T. The
// constraint Qv >= q (N2 = 2T + N + 2 rows) stacks
//   R w + tau 1 + z >= 0,  z >= 0,  w >= 0,  1'w >= 1,  -1'w >= -1.
// Q is applied blockwise and never stored.
struct ProblemData {
  Matrix R;       // T x N
  Vector mu_hat;  // column means of R
  Vector h1;      // (0_N, 1, 1/((1-c)T) 1_T)
  Vector h2;      // (mu_hat, 0_{1+T})
  Vector q;       // (0_{2T+N}, 1, -1)
  double c = 0.0;
  double rho = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  int m = 0;
  Index N = 0;
  Index T = 0;
  Index N1 = 0;
  Index N2 = 0;
  double L1 = 0.0;  // Lipschitz constant of grad_v H
  double L2 = 0.0;  // Lipschitz constant of grad_y H
  double q_norm_sq = 0.0;  // inflated estimate of ||Q||_2^2
};

ProblemData assemble(const Matrix& R, const ModelParams& params);
ProblemData assemble(const Window& window, const ModelParams& params);

// lambda = 1 / ((1-c) sqrt(T) (rbar - rho)^2), rbar the mean of all entries.
double default_lambda(const Matrix& R, double c, double rho);

// Qv and Q'u in O(TN).
void apply_Q(const ProblemData& pd, const Vector& v, Vector& out);
void apply_Qt(const ProblemData& pd, const Vector& u, Vector& out);
Vector apply_Q(const ProblemData& pd, const Vector& v);
Vector apply_Qt(const ProblemData& pd, const Vector& u);

enum class ConstraintOperator {
  full,    // Q
  qtilde,  // the leading 2T rows only
};

// ||Q||_2^2 (or ||Q~||_2^2) by power iteration on Q'Q, inflated by
// kNormInflation so that 1.99 / estimate stays under 2 / ||Q||_2^2.
double spectral_norm_sq(const ProblemData& pd, std::uint64_t seed,
                        ConstraintOperator which = ConstraintOperator::full);

nlohmann::json to_json(const ProblemData& pd);

}  // namespace asmcvar
