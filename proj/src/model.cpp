#include "asmcvar/model.hpp"

#include "asmcvar/errors.hpp"
#include "asmcvar/linalg.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <vector>

namespace asmcvar {

namespace {

void check_params(const Matrix& R, const ModelParams& p) {
  if (R.rows() == 0) throw ShapeError("window has no rows (T = 0)");
  if (R.cols() == 0) throw ShapeError("window has no assets");
  if (!(p.c > 0.0 && p.c < 1.0))
    throw ParameterError("confidence level c must lie in (0, 1), got " + std::to_string(p.c));
  if (!(p.gamma > 0.0))
    throw ParameterError("gamma must be positive, got " + std::to_string(p.gamma));
  if (p.m < 1 || p.m > R.cols())
    throw ParameterError("sparsity m = " + std::to_string(p.m) + " outside 1.." +
                         std::to_string(R.cols()));
  if (p.lambda && !(*p.lambda >= 0.0))
    throw ParameterError("lambda must be nonnegative");
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

double default_lambda(const Matrix& R, double c, double rho) {
  if (R.size() == 0) throw ShapeError("empty return matrix");
  const double rbar = R.mean();
  const double gap = rbar - rho;
  if (gap == 0.0)
    throw ParameterError("mean return equals rho; default lambda is undefined");
  const double T = static_cast<double>(R.rows());
  return 1.0 / ((1.0 - c) * std::sqrt(T) * gap * gap);
}

ProblemData assemble(const Matrix& R, const ModelParams& params) {
  check_params(R, params);
  ProblemData pd;
  pd.R = R;
  pd.N = R.cols();
  pd.T = R.rows();
  pd.N1 = pd.N + 1 + pd.T;
  pd.N2 = 2 * pd.T + pd.N + 2;
  pd.c = params.c;
  pd.rho = params.rho;
  pd.gamma = params.gamma;
  pd.m = params.m;
  pd.lambda = params.lambda ? *params.lambda : default_lambda(R, params.c, params.rho);

  pd.mu_hat = R.colwise().mean().transpose();

  pd.h1 = Vector::Zero(pd.N1);
  pd.h1[pd.N] = 1.0;
  pd.h1.tail(pd.T).setConstant(1.0 / ((1.0 - pd.c) * static_cast<double>(pd.T)));

  pd.h2 = Vector::Zero(pd.N1);
  pd.h2.head(pd.N) = pd.mu_hat;

  pd.q = Vector::Zero(pd.N2);
  pd.q[pd.N2 - 2] = 1.0;
  pd.q[pd.N2 - 1] = -1.0;

  pd.L1 = 2.0 * pd.lambda * pd.h2.squaredNorm() + 1.0 / pd.gamma;
  pd.L2 = 1.0 / pd.gamma;
  pd.q_norm_sq = spectral_norm_sq(pd, params.seed);
  return pd;
}

ProblemData assemble(const Window& window, const ModelParams& params) {
  return assemble(window.R, params);
}

// Row blocks of Qv for v = (w, tau, z):
//   [0, T)        R w + tau + z
//   [T, 2T)       z
//   [2T, 2T+N)    w
//   2T+N          1'w
//   2T+N+1        -1'w
void apply_Q(const ProblemData& pd, const Vector& v, Vector& out) {
  if (v.size() != pd.N1)
    throw ShapeError("apply_Q: expected length " + std::to_string(pd.N1) + ", got " +
                     std::to_string(v.size()));
  const Index N = pd.N, T = pd.T;
  const auto w = v.head(N);
  const double tau = v[N];
  const auto z = v.tail(T);
  out.resize(pd.N2);
  out.head(T).noalias() = pd.R * w;
  out.head(T).array() += tau;
  out.head(T) += z;
  out.segment(T, T) = z;
  out.segment(2 * T, N) = w;
  const double total = w.sum();
  out[2 * T + N] = total;
  out[2 * T + N + 1] = -total;
}

void apply_Qt(const ProblemData& pd, const Vector& u, Vector& out) {
  if (u.size() != pd.N2)
    throw ShapeError("apply_Qt: expected length " + std::to_string(pd.N2) + ", got " +
                     std::to_string(u.size()));
  const Index N = pd.N, T = pd.T;
  const auto a = u.head(T);
  const auto b = u.segment(T, T);
  const auto c = u.segment(2 * T, N);
  const double d = u[2 * T + N] - u[2 * T + N + 1];
  out.resize(pd.N1);
  out.head(N).noalias() = pd.R.transpose() * a;
  out.head(N) += c;
  out.head(N).array() += d;
  out[N] = a.sum();
  out.tail(T) = a + b;
}

Vector apply_Q(const ProblemData& pd, const Vector& v) {
  Vector out;
  apply_Q(pd, v, out);
  return out;
}

Vector apply_Qt(const ProblemData& pd, const Vector& u) {
  Vector out;
  apply_Qt(pd, u, out);
  return out;
}

double spectral_norm_sq(const ProblemData& pd, std::uint64_t seed, ConstraintOperator which) {
  const Index N = pd.N, T = pd.T;
  LinearMap gram;
  if (which == ConstraintOperator::full) {
    gram = [&pd, buf = Vector()](const Vector& x, Vector& y) mutable {
      apply_Q(pd, x, buf);
      apply_Qt(pd, buf, y);
    };
  } else {
    // Q~ = [R 1 I; 0 0 I]: Q~x = (Rw + tau + z, z).
    gram = [&pd, N, T](const Vector& x, Vector& y) {
      const Vector top = pd.R * x.head(N) + Vector::Constant(T, x[N]) + x.tail(T);
      y.resize(pd.N1);
      y.head(N).noalias() = pd.R.transpose() * top;
      y[N] = top.sum();
      y.tail(T) = top + x.tail(T);
    };
  }
  const auto result = power_iteration(gram, pd.N1, seed);
  return result.value * kNormInflation;
}

nlohmann::json to_json(const ProblemData& pd) {
  nlohmann::json R = nlohmann::json::array();
  for (Index i = 0; i < pd.T; ++i) R.push_back(to_std(pd.R.row(i).transpose()));
  return {
      {"R", R},
      {"mu_hat", to_std(pd.mu_hat)},
      {"h1", to_std(pd.h1)},
      {"h2", to_std(pd.h2)},
      {"q", to_std(pd.q)},
      {"c", pd.c},
      {"rho", pd.rho},
      {"lambda", pd.lambda},
      {"gamma", pd.gamma},
      {"m", pd.m},
      {"N", pd.N},
      {"T", pd.T},
      {"N1", pd.N1},
      {"N2", pd.N2},
      {"L1", pd.L1},
      {"L2", pd.L2},
      {"q_norm_sq", pd.q_norm_sq},
  };
}

}  // namespace asmcvar
