#pragma once

#include "asmcvar/model.hpp"
#include "asmcvar/types.hpp"

namespace asmcvar {

// v = (w, tau, z) unpacked. Used at API boundaries and in tests; the solver
// works on the packed vector.
struct SplitVector {
  Vector w;
  double tau = 0.0;
  Vector z;

  static SplitVector split(const Vector& v, Index N, Index T);
  Vector join() const;
};

// Feasibility tolerance used when evaluating iota_q for reporting.
inline constexpr double kFeasibilityTol = 1e-9;

// max{x, q} componentwise.
Vector prox_box(const Vector& x, const Vector& q);

// Indices of the m largest |w_j|, ordered by decreasing magnitude; ties go
// to the lower index.
Support lav_indices(const Vector& w, int m);

// Keeps the components on lav_indices(w, m) and zeroes the rest.
Vector hard_threshold_m(const Vector& w, int m);

// (1/(2 gamma)) * squared mass outside the m largest components.
double tailed_indicator(const Vector& w, int m, double gamma);

// Number of entries with |y_j| > 0.
Index count_nonzeros(const Vector& y);

double eval_f(const ProblemData& pd, const Vector& v);
double eval_H(const ProblemData& pd, const Vector& v, const Vector& y);
Vector grad_v_H(const ProblemData& pd, const Vector& v, const Vector& y);
Vector grad_y_H(const ProblemData& pd, const Vector& v, const Vector& y);

// G(v, y) = H(v, y) + iota_q(Qv) + iota_m(y); +inf when infeasible.
double eval_G(const ProblemData& pd, const Vector& v, const Vector& y);

// Psi(v) = f(v) + iota_q(Qv) + tailed_indicator(w); +inf when Qv < q - tol.
double eval_Psi(const ProblemData& pd, const Vector& v);

// ||max(q - Qv, 0)||_inf.
double constraint_residual(const ProblemData& pd, const Vector& v);

}  // namespace asmcvar
