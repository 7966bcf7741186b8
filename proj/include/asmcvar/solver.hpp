#pragma once

#include "asmcvar/model.hpp"
#include "asmcvar/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace asmcvar {

struct SolverConfig {
  int max_outer = 10000;
  double tol_outer = 1e-4;
  int max_inner = 200;
  double tol_inner = 1e-3;
  // Step sizes; unset means 0.99/L1, 0.99/L2 and 1.99/||Q||^2.
  std::optional<double> beta1;
  std::optional<double> beta2;
  std::optional<double> theta;
  // Use ||Q~||^2 instead of ||Q||^2 for the default theta.
  bool theta_use_qtilde = false;
  bool warm_start_inner = true;
  std::uint64_t seed = 0;

  // Inner tolerance 1e-10 with a generous inner cap; used by property
  // tests that need the projection solved essentially exactly.
  static SolverConfig tightened();
};

struct StepSizes {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double theta = 0.0;
};

// Fills unset step sizes and checks 0 < beta1 < 1/L1, 0 < beta2 < 1/L2,
// 0 < theta < 2/||Q||^2. The theta bound is only warned about when
// theta_use_qtilde is set.
StepSizes resolve_steps(const ProblemData& pd, const SolverConfig& cfg);

struct FppaResult {
  Vector u;  // approximate projection of p onto {u : Qu >= q}
  Vector z;  // final dual iterate, reusable as a warm start
  int iterations = 0;
  bool converged = false;
};

// Fixed-point proximity iteration for prox_{iota_q o Q}(p):
//   x = Qp + z - theta QQ'z,  z <- x - max{x, q},  u = p - theta Q'z.
// Stops on relative change of z below tol or after max_iter z-updates.
FppaResult fppa_prox(const ProblemData& pd, const Vector& p, const Vector& z_init,
                     double theta, double tol, int max_iter);

struct SolveReport {
  Vector v_final;
  Vector y_final;
  int outer_iterations = 0;
  std::vector<int> inner_iterations;   // one entry per outer step
  std::vector<double> objective_trace; // G(v^k, y^k), k = 0..outer_iterations
  std::vector<double> smooth_trace;    // H(v^k, y^k), same indexing
  bool converged = false;
  double wall_time = 0.0;  // seconds; not part of the JSON export
  double feasibility_residual = 0.0;  // ||max(q - Q v_final, 0)||_inf
  double residual_tol = 0.0;
  StepSizes steps;
};

// v0 = (1/N 1_N, 0_{1+T}), y0 = 1/N 1_N.
Vector default_v0(const ProblemData& pd);
Vector default_y0(const ProblemData& pd);

// PALM outer loop with the FPPA inner solve. Throws NumericalError when an
// iterate turns non-finite.
SolveReport palm_solve(const ProblemData& pd, const SolverConfig& cfg,
                       const Vector& v0, const Vector& y0);
SolveReport palm_solve(const ProblemData& pd, const SolverConfig& cfg);

enum class ExtractionMode { raw, thresholded };

struct Portfolio {
  Vector weights;
  Support support;
  std::size_t trade_index = 0;
  // Raw-mode portfolios are not exactly on the simplex; this records
  // max(-min_j w_j, |1'w - 1|, constraint residual).
  std::optional<double> feasibility_residual;
};

Portfolio make_portfolio(Vector weights);
Portfolio uniform_portfolio(Index N);

// raw: w = v_{1:N}. thresholded: hard-threshold to m entries, clip
// negatives, renormalize to the simplex. Throws DegenerateSolutionError
// when nothing positive survives.
Portfolio extract_portfolio(const SolveReport& report, const ProblemData& pd,
                            ExtractionMode mode);

// Constant from the tail bound: zeta + 2 lambda sqrt((N-m)^2 + (N-m))
// (||mu||^2 + rho ||mu||), where zeta = max_{i,j} |r_ij - r_{i,j1}| and j1 is
// the leading index of the m-LAV set of w.
double tail_constant(const ProblemData& pd, const Vector& w);

// sqrt(2 L gamma): bound on the off-support weights of an exact solution.
double tail_weight_bound(const ProblemData& pd, double L_tilde);
// sqrt(2 L^3 gamma): bound on the objective gap to the l0-constrained model.
double objective_gap_bound(const ProblemData& pd, double L_tilde);

nlohmann::json to_json(const SolveReport& report);

}  // namespace asmcvar
