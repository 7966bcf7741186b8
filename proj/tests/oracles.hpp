#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library's numerical routines; each oracle rebuilds its answer from
// the defining formulas with dense linear algebra.

#include "asmcvar/data.hpp"
#include "asmcvar/model.hpp"
#include "asmcvar/rng.hpp"
#include "asmcvar/types.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using asmcvar::Index;
using asmcvar::Matrix;
using asmcvar::Vector;

// Dense Q with row blocks [R 1 I; 0 0 I; I 0 0; 1' 0 0; -1' 0 0].
inline Matrix dense_Q(const Matrix& R) {
  const Index T = R.rows(), N = R.cols();
  Matrix Q = Matrix::Zero(2 * T + N + 2, N + 1 + T);
  for (Index i = 0; i < T; ++i) {
    for (Index j = 0; j < N; ++j) Q(i, j) = R(i, j);
    Q(i, N) = 1.0;
    Q(i, N + 1 + i) = 1.0;
    Q(T + i, N + 1 + i) = 1.0;
  }
  for (Index j = 0; j < N; ++j) {
    Q(2 * T + j, j) = 1.0;
    Q(2 * T + N, j) = 1.0;
    Q(2 * T + N + 1, j) = -1.0;
  }
  return Q;
}

// Largest singular value by one-sided Jacobi rotations.
inline double jacobi_max_singular_value(Matrix A) {
  const Index n = A.cols();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double alpha = A.col(p).squaredNorm();
        const double beta = A.col(q).squaredNorm();
        const double gamma = A.col(p).dot(A.col(q));
        if (gamma == 0.0) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Vector ap = A.col(p);
        A.col(p) = c * ap - s * A.col(q);
        A.col(q) = s * ap + c * A.col(q);
      }
    }
    if (off < 1e-15) break;
  }
  double best = 0.0;
  for (Index j = 0; j < n; ++j) best = std::max(best, A.col(j).norm());
  return best;
}

// Euclidean projection of p onto {u : Q u >= q} by enumerating every active
// set. For each subset A the equality-constrained minimizer is
// u = p - Q_A^+ (Q_A p - q_A); the projection is the nearest feasible one.
inline Vector kkt_projection(const Matrix& Q, const Vector& q, const Vector& p) {
  const Index rows = Q.rows();
  Vector best = p;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 0; mask < (1ul << rows); ++mask) {
    std::vector<Index> active;
    for (Index i = 0; i < rows; ++i)
      if (mask & (1ul << i)) active.push_back(i);
    Vector u = p;
    if (!active.empty()) {
      Matrix QA(static_cast<Index>(active.size()), Q.cols());
      Vector qA(static_cast<Index>(active.size()));
      for (std::size_t k = 0; k < active.size(); ++k) {
        QA.row(static_cast<Index>(k)) = Q.row(active[k]);
        qA[static_cast<Index>(k)] = q[active[k]];
      }
      const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(QA);
      u = p - cod.solve(QA * p - qA);
      if ((QA * u - qA).cwiseAbs().maxCoeff() > 1e-10) continue;  // inconsistent
    }
    if ((Q * u - q).minCoeff() < -1e-11) continue;
    const double dist = (u - p).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = u;
    }
  }
  return best;
}

struct OlsReference {
  double alpha;
  double beta;
  double t_stat;
  double pvalue;
};

// Intercept regression via the normal equations on [1, x], inference from
// s^2 (X'X)^{-1} and Boost's Student t.
inline OlsReference ols_intercept(const Vector& y, const Vector& x) {
  const Index n = y.size();
  Matrix X(n, 2);
  X.col(0).setOnes();
  X.col(1) = x;
  const Matrix XtX_inv = (X.transpose() * X).inverse();
  const Vector coef = XtX_inv * X.transpose() * y;
  const Vector resid = y - X * coef;
  const double s2 = resid.squaredNorm() / static_cast<double>(n - 2);
  const double se = std::sqrt(s2 * XtX_inv(0, 0));
  const double t = coef[0] / se;
  const boost::math::students_t dist(static_cast<double>(n - 2));
  return {coef[0], coef[1], t, boost::math::cdf(boost::math::complement(dist, t))};
}

// Central differences of a scalar function.
inline Vector central_gradient(const std::function<double(const Vector&)>& fn, const Vector& x,
                               double step) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector hi = x, lo = x;
    hi[i] += step;
    lo[i] -= step;
    g[i] = (fn(hi) - fn(lo)) / (2.0 * step);
  }
  return g;
}

// Naive term-by-term objective: sum_j h1_j v_j + lambda (sum_j mu_j w_j - rho)^2.
inline double naive_f(const Matrix& R, double c, double rho, double lambda, const Vector& v) {
  const Index T = R.rows(), N = R.cols();
  double linear = v[N];
  for (Index i = 0; i < T; ++i) linear += v[N + 1 + i] / ((1.0 - c) * static_cast<double>(T));
  double mean_ret = 0.0;
  for (Index j = 0; j < N; ++j) {
    double mu = 0.0;
    for (Index i = 0; i < T; ++i) mu += R(i, j);
    mean_ret += mu / static_cast<double>(T) * v[j];
  }
  return linear + lambda * (mean_ret - rho) * (mean_ret - rho);
}

// Returns r_ij = base + drift * j + scale * N(0, 1).
inline Matrix random_returns(std::uint64_t seed, Index T, Index N, double base = 0.01,
                             double scale = 0.05, double drift = 0.004) {
  asmcvar::Rng rng(seed);
  Matrix R(T, N);
  for (Index i = 0; i < T; ++i)
    for (Index j = 0; j < N; ++j)
      R(i, j) = base + drift * static_cast<double>(j) + scale * rng.normal();
  return R;
}

inline Vector random_vector(asmcvar::Rng& rng, Index n, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

// Monthly panel starting at 200001 with the given returns.
inline asmcvar::ReturnPanel make_panel(const Matrix& R) {
  asmcvar::ReturnPanel panel;
  panel.returns = R;
  int year = 2000, month = 1;
  for (Index i = 0; i < R.rows(); ++i) {
    panel.dates.push_back(year * 100 + month);
    if (++month > 12) {
      month = 1;
      ++year;
    }
  }
  for (Index j = 0; j < R.cols(); ++j) panel.assets.push_back("A" + std::to_string(j));
  panel.provenance.source = "synthetic";
  return panel;
}

}  // namespace oracle
