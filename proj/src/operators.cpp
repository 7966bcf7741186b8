#include "asmcvar/operators.hpp"

#include "asmcvar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace asmcvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_lengths(const ProblemData& pd, const Vector& v, const Vector& y) {
  if (v.size() != pd.N1)
    throw ShapeError("v has length " + std::to_string(v.size()) + ", expected " +
                     std::to_string(pd.N1));
  if (y.size() != pd.N)
    throw ShapeError("y has length " + std::to_string(y.size()) + ", expected " +
                     std::to_string(pd.N));
}

// Shared by H and the tailed approximation so that G(v, S_m(w)) and Psi(v)
// evaluate the same floating-point expression.
double coupling(const Vector& w, const Vector& y, double gamma) {
  return (w - y).squaredNorm() / (2.0 * gamma);
}

}  // namespace

SplitVector SplitVector::split(const Vector& v, Index N, Index T) {
  if (v.size() != N + 1 + T)
    throw ShapeError("split: length " + std::to_string(v.size()) + " != N + 1 + T");
  return {v.head(N), v[N], v.tail(T)};
}

Vector SplitVector::join() const {
  Vector v(w.size() + 1 + z.size());
  v << w, tau, z;
  return v;
}

Vector prox_box(const Vector& x, const Vector& q) {
  if (x.size() != q.size()) throw ShapeError("prox_box: length mismatch");
  return x.cwiseMax(q);
}

Support lav_indices(const Vector& w, int m) {
  const Index n = w.size();
  if (m < 0 || m > n)
    throw ParameterError("m = " + std::to_string(m) + " outside 0.." + std::to_string(n));
  Support idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&w](Index a, Index b) { return std::abs(w[a]) > std::abs(w[b]); });
  idx.resize(static_cast<std::size_t>(m));
  return idx;
}

Vector hard_threshold_m(const Vector& w, int m) {
  Vector out = Vector::Zero(w.size());
  for (Index j : lav_indices(w, m)) out[j] = w[j];
  return out;
}

double tailed_indicator(const Vector& w, int m, double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  return coupling(w, hard_threshold_m(w, m), gamma);
}

Index count_nonzeros(const Vector& y) {
  return (y.array().abs() > 0.0).count();
}

double eval_f(const ProblemData& pd, const Vector& v) {
  if (v.size() != pd.N1) throw ShapeError("eval_f: wrong length");
  const double gap = pd.h2.dot(v) - pd.rho;
  return pd.h1.dot(v) + pd.lambda * gap * gap;
}

double eval_H(const ProblemData& pd, const Vector& v, const Vector& y) {
  check_lengths(pd, v, y);
  return eval_f(pd, v) + coupling(v.head(pd.N), y, pd.gamma);
}

Vector grad_v_H(const ProblemData& pd, const Vector& v, const Vector& y) {
  check_lengths(pd, v, y);
  Vector g = pd.h1 + (2.0 * pd.lambda * (pd.h2.dot(v) - pd.rho)) * pd.h2;
  g.head(pd.N) += (v.head(pd.N) - y) / pd.gamma;
  return g;
}

Vector grad_y_H(const ProblemData& pd, const Vector& v, const Vector& y) {
  check_lengths(pd, v, y);
  return (y - v.head(pd.N)) / pd.gamma;
}

double constraint_residual(const ProblemData& pd, const Vector& v) {
  const Vector gap = pd.q - apply_Q(pd, v);
  return std::max(0.0, gap.maxCoeff());
}

double eval_G(const ProblemData& pd, const Vector& v, const Vector& y) {
  check_lengths(pd, v, y);
  if (constraint_residual(pd, v) > kFeasibilityTol) return kInf;
  if (count_nonzeros(y) > pd.m) return kInf;
  return eval_H(pd, v, y);
}

double eval_Psi(const ProblemData& pd, const Vector& v) {
  if (v.size() != pd.N1) throw ShapeError("eval_Psi: wrong length");
  if (constraint_residual(pd, v) > kFeasibilityTol) return kInf;
  return eval_f(pd, v) + tailed_indicator(v.head(pd.N), pd.m, pd.gamma);
}

}  // namespace asmcvar
