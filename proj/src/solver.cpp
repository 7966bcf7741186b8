#include "asmcvar/solver.hpp"

#include "asmcvar/errors.hpp"
#include "asmcvar/operators.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <limits>

namespace asmcvar {

namespace {

// Relative-change test with a guard for iterates at the origin.
bool relative_change_small(double numerator, double denominator, double tol) {
  constexpr double kTiny = 1e-12;
  if (denominator < kTiny) return numerator < kTiny || numerator <= tol;
  return numerator / denominator <= tol;
}

nlohmann::json finite_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

SolverConfig SolverConfig::tightened() {
  SolverConfig cfg;
  cfg.tol_inner = 1e-10;
  cfg.max_inner = 200000;
  return cfg;
}

StepSizes resolve_steps(const ProblemData& pd, const SolverConfig& cfg) {
  StepSizes s;
  s.beta1 = cfg.beta1.value_or(0.99 / pd.L1);
  s.beta2 = cfg.beta2.value_or(0.99 / pd.L2);
  if (cfg.theta) {
    s.theta = *cfg.theta;
  } else if (cfg.theta_use_qtilde) {
    s.theta = 1.99 / spectral_norm_sq(pd, cfg.seed, ConstraintOperator::qtilde);
  } else {
    s.theta = 1.99 / pd.q_norm_sq;
  }
  if (!(s.beta1 > 0.0 && s.beta1 < 1.0 / pd.L1))
    throw ParameterError("beta1 must lie in (0, 1/L1)");
  if (!(s.beta2 > 0.0 && s.beta2 < 1.0 / pd.L2))
    throw ParameterError("beta2 must lie in (0, 1/L2)");
  if (!(s.theta > 0.0)) throw ParameterError("theta must be positive");
  if (!(s.theta < 2.0 / pd.q_norm_sq)) {
    if (!cfg.theta_use_qtilde) throw ParameterError("theta must lie in (0, 2/||Q||^2)");
    warn("theta = 1.99/||Q~||^2 exceeds 2/||Q||^2; the inner iteration may not converge");
  }
  return s;
}

FppaResult fppa_prox(const ProblemData& pd, const Vector& p, const Vector& z_init,
                     double theta, double tol, int max_iter) {
  if (p.size() != pd.N1) throw ShapeError("fppa_prox: p has wrong length");
  if (z_init.size() != pd.N2) throw ShapeError("fppa_prox: z_init has wrong length");

  FppaResult r;
  Vector Qp;
  apply_Q(pd, p, Qp);
  Vector z = z_init;
  Vector Qtz, QQtz, x(pd.N2), z_next(pd.N2);
  apply_Qt(pd, z, Qtz);

  int l = 0;
  while (l < max_iter) {
    apply_Q(pd, Qtz, QQtz);
    x = Qp + z - theta * QQtz;
    z_next = x - x.cwiseMax(pd.q);
    const double change = (z_next - z).norm();
    const double base = z.norm();
    z.swap(z_next);
    ++l;
    apply_Qt(pd, z, Qtz);
    if (relative_change_small(change, base, tol)) {
      r.converged = true;
      break;
    }
  }
  r.u = p - theta * Qtz;
  r.z = std::move(z);
  r.iterations = l;
  return r;
}

Vector default_v0(const ProblemData& pd) {
  Vector v = Vector::Zero(pd.N1);
  v.head(pd.N).setConstant(1.0 / static_cast<double>(pd.N));
  return v;
}

Vector default_y0(const ProblemData& pd) {
  return Vector::Constant(pd.N, 1.0 / static_cast<double>(pd.N));
}

SolveReport palm_solve(const ProblemData& pd, const SolverConfig& cfg) {
  return palm_solve(pd, cfg, default_v0(pd), default_y0(pd));
}

SolveReport palm_solve(const ProblemData& pd, const SolverConfig& cfg, const Vector& v0,
                       const Vector& y0) {
  if (v0.size() != pd.N1) throw ShapeError("palm_solve: v0 has wrong length");
  if (y0.size() != pd.N) throw ShapeError("palm_solve: y0 has wrong length");
  if (cfg.max_outer < 1 || cfg.max_inner < 1)
    throw ParameterError("iteration caps must be positive");

  const auto start = std::chrono::steady_clock::now();
  SolveReport rep;
  rep.steps = resolve_steps(pd, cfg);
  const StepSizes& s = rep.steps;

  Vector v = v0;
  Vector y = y0;
  Vector z_warm = Vector::Zero(pd.N2);
  const Vector z_zero = Vector::Zero(pd.N2);
  rep.objective_trace.push_back(eval_G(pd, v, y));
  rep.smooth_trace.push_back(eval_H(pd, v, y));

  int k = 0;
  while (true) {
    const Vector p = v - s.beta1 * grad_v_H(pd, v, y);
    FppaResult inner = fppa_prox(pd, p, cfg.warm_start_inner ? z_warm : z_zero, s.theta,
                                 cfg.tol_inner, cfg.max_inner);
    Vector v_next = std::move(inner.u);
    Vector y_next = hard_threshold_m(y - s.beta2 * grad_y_H(pd, v_next, y), pd.m);
    ++k;
    if (!v_next.allFinite() || !y_next.allFinite())
      throw NumericalError("non-finite iterate at outer iteration " + std::to_string(k), k);

    const double change = (v_next - v).norm();
    const double base = v.norm();
    v = std::move(v_next);
    y = std::move(y_next);
    z_warm = std::move(inner.z);
    rep.inner_iterations.push_back(inner.iterations);
    rep.objective_trace.push_back(eval_G(pd, v, y));
    rep.smooth_trace.push_back(eval_H(pd, v, y));

    if (relative_change_small(change, base, cfg.tol_outer)) {
      rep.converged = true;
      break;
    }
    if (k >= cfg.max_outer) break;
  }

  rep.outer_iterations = k;
  rep.v_final = std::move(v);
  rep.y_final = std::move(y);
  rep.feasibility_residual = constraint_residual(pd, rep.v_final);
  rep.residual_tol = cfg.tol_inner <= 1e-8 ? 1e-8 : 1e-4;
  rep.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

Portfolio make_portfolio(Vector weights) {
  Portfolio p;
  for (Index j = 0; j < weights.size(); ++j)
    if (weights[j] != 0.0) p.support.push_back(j);
  p.weights = std::move(weights);
  return p;
}

Portfolio uniform_portfolio(Index N) {
  return make_portfolio(Vector::Constant(N, 1.0 / static_cast<double>(N)));
}

Portfolio extract_portfolio(const SolveReport& report, const ProblemData& pd,
                            ExtractionMode mode) {
  const Vector w = report.v_final.head(pd.N);
  if (mode == ExtractionMode::raw) {
    Portfolio p = make_portfolio(w);
    const double simplex_gap =
        std::max(std::max(0.0, -w.minCoeff()), std::abs(w.sum() - 1.0));
    p.feasibility_residual = std::max(simplex_gap, report.feasibility_residual);
    return p;
  }
  Vector kept = hard_threshold_m(w, pd.m).cwiseMax(0.0);
  const double total = kept.sum();
  if (!(total > 0.0))
    throw DegenerateSolutionError("thresholded portfolio has no positive weight");
  kept /= total;
  return make_portfolio(std::move(kept));
}

double tail_constant(const ProblemData& pd, const Vector& w) {
  const Index j1 = lav_indices(w, 1).front();
  double zeta = 0.0;
  for (Index j = 0; j < pd.N; ++j)
    zeta = std::max(zeta, (pd.R.col(j) - pd.R.col(j1)).cwiseAbs().maxCoeff());
  const double excess = static_cast<double>(pd.N - pd.m);
  const double mu_norm = pd.mu_hat.norm();
  return zeta + 2.0 * pd.lambda * std::sqrt(excess * excess + excess) *
                    (mu_norm * mu_norm + pd.rho * mu_norm);
}

double tail_weight_bound(const ProblemData& pd, double L_tilde) {
  return std::sqrt(2.0 * L_tilde * pd.gamma);
}

double objective_gap_bound(const ProblemData& pd, double L_tilde) {
  return std::sqrt(2.0 * L_tilde * L_tilde * L_tilde * pd.gamma);
}

nlohmann::json to_json(const SolveReport& report) {
  nlohmann::json trace = nlohmann::json::array();
  for (double g : report.objective_trace) trace.push_back(finite_or_null(g));
  return {
      {"v_final", to_std(report.v_final)},
      {"y_final", to_std(report.y_final)},
      {"outer_iterations", report.outer_iterations},
      {"inner_iterations", report.inner_iterations},
      {"objective_trace", trace},
      {"smooth_trace", report.smooth_trace},
      {"converged", report.converged},
      {"feasibility_residual", report.feasibility_residual},
      {"residual_tol", report.residual_tol},
      {"feasible_within_tol", report.feasibility_residual <= report.residual_tol},
      {"steps",
       {{"beta1", report.steps.beta1},
        {"beta2", report.steps.beta2},
        {"theta", report.steps.theta}}},
  };
}

}  // namespace asmcvar
