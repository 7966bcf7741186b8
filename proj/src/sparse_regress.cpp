#include "asmcvar/sparse_regress.hpp"

#include "asmcvar/errors.hpp"
#include "asmcvar/linalg.hpp"
#include "asmcvar/operators.hpp"
#include "asmcvar/rng.hpp"

#include <Eigen/Cholesky>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace asmcvar {

namespace {

// Keeps the m largest |x_j| in place, lowest index first on ties. Same
// selection rule as hard_threshold_m, without per-call allocation.
void threshold_in_place(Vector& x, int m, std::vector<Index>& order) {
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&x](Index a, Index b) { return std::abs(x[a]) > std::abs(x[b]); });
  for (std::size_t k = static_cast<std::size_t>(m); k < order.size(); ++k) x[order[k]] = 0.0;
}

Support support_of(const Vector& x) {
  Support s;
  for (Index j = 0; j < x.size(); ++j)
    if (x[j] != 0.0) s.push_back(j);
  return s;
}

void check_instance(const RegressionInstance& inst) {
  if (inst.X.rows() != inst.y.size()) throw ShapeError("X and y disagree on the sample count");
  if (!(inst.gamma > 0.0)) throw ParameterError("gamma must be positive");
  if (inst.m < 0 || inst.m > inst.X.cols())
    throw ParameterError("m must lie in 0..d");
}

}  // namespace

Matrix toeplitz_covariance(Index d, double base) {
  Matrix S(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      S(i, j) = std::pow(base, static_cast<double>(std::abs(i - j)));
  return S;
}

RegressionInstance generate_instance(std::uint64_t seed, double gamma,
                                     const RegressionShape& shape) {
  if (shape.n < 1 || shape.d < 1) throw ParameterError("n and d must be positive");
  if (shape.true_support < 0 || shape.true_support > shape.d)
    throw ParameterError("true support size must lie in 0..d");

  const Eigen::LLT<Matrix> llt(toeplitz_covariance(shape.d));
  const Matrix L = llt.matrixL();

  RegressionInstance inst;
  inst.m = shape.m;
  inst.gamma = gamma;
  inst.seed = seed;
  inst.beta_true = Vector::Zero(shape.d);
  inst.beta_true.head(shape.true_support).setOnes();

  Rng rng(seed);
  Matrix Z(shape.n, shape.d);
  for (Index i = 0; i < shape.n; ++i)
    for (Index j = 0; j < shape.d; ++j) Z(i, j) = rng.normal();
  inst.X = Z * L.transpose();
  Vector eps(shape.n);
  for (Index i = 0; i < shape.n; ++i) eps[i] = rng.normal();
  inst.y = inst.X * inst.beta_true + eps;
  check_instance(inst);
  return inst;
}

double original_objective(const RegressionInstance& inst, const Vector& beta) {
  return 0.5 * (inst.X * beta - inst.y).squaredNorm();
}

double relaxed_objective(const RegressionInstance& inst, const Vector& beta,
                         const Vector& eta) {
  return original_objective(inst, beta) + (beta - eta).squaredNorm() / (2.0 * inst.gamma);
}

RegressResult palm_regress(const RegressionInstance& inst, long iteration_cap, double tol,
                           long trace_stride) {
  check_instance(inst);
  if (iteration_cap < 1) throw ParameterError("iteration cap must be positive");
  const Index d = inst.X.cols();
  const double gamma = inst.gamma;

  const Matrix G = inst.X.transpose() * inst.X;
  const Vector b = inst.X.transpose() * inst.y;
  const auto top = power_iteration(
      [&G](const Vector& in, Vector& out) { out.noalias() = G * in; }, d, inst.seed);
  // The identity shift is added exactly rather than estimated.
  const double alpha1 = 0.99 / (top.value * kNormInflation + 1.0 / gamma);
  const double mix = 0.99;  // alpha2 / gamma

  RegressResult r;
  Vector beta = Vector::Zero(d);
  Vector eta = Vector::Zero(d);
  Vector beta_next(d), eta_next(d), grad(d);
  std::vector<Index> order(static_cast<std::size_t>(d));
  if (trace_stride > 0) r.objective_trace.push_back(relaxed_objective(inst, beta, eta));

  long k = 0;
  while (k < iteration_cap) {
    grad.noalias() = G * beta;
    grad -= b;
    grad += (beta - eta) / gamma;
    beta_next = beta - alpha1 * grad;
    eta_next = (1.0 - mix) * eta + mix * beta_next;
    threshold_in_place(eta_next, inst.m, order);
    ++k;
    if (!beta_next.allFinite() || !eta_next.allFinite())
      throw NumericalError("non-finite iterate at iteration " + std::to_string(k), k);

    const double change =
        std::sqrt((beta_next - beta).squaredNorm() + (eta_next - eta).squaredNorm());
    const double base = std::sqrt(beta.squaredNorm() + eta.squaredNorm());
    beta.swap(beta_next);
    eta.swap(eta_next);
    if (trace_stride > 0 && k % trace_stride == 0)
      r.objective_trace.push_back(relaxed_objective(inst, beta, eta));
    if (base > 0.0 && change / base < tol) {
      r.converged = true;
      break;
    }
  }
  r.iterations = k;
  r.beta = std::move(beta);
  r.eta = std::move(eta);
  return r;
}

long binomial(long n, long k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long out = 1;
  for (long i = 1; i <= k; ++i) {
    if (out > std::numeric_limits<long>::max() / (n - k + i))
      return std::numeric_limits<long>::max();
    out = out * (n - k + i) / i;
  }
  return out;
}

OracleResult exhaustive_oracle(const RegressionInstance& inst, bool relaxed) {
  check_instance(inst);
  const Index d = inst.X.cols();
  const int m = inst.m;
  const long cases = binomial(d, m);
  if (cases > kMaxOracleCases)
    throw CombinatorialLimitError("C(" + std::to_string(d) + ", " + std::to_string(m) +
                                  ") = " + std::to_string(cases) + " supports exceeds the " +
                                  std::to_string(kMaxOracleCases) + "-case limit");

  const Matrix G = inst.X.transpose() * inst.X;
  const Vector b = inst.X.transpose() * inst.y;
  const double inv_gamma = 1.0 / inst.gamma;

  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();

  // Lexicographic enumeration of m-subsets of {0..d-1}.
  Support S(static_cast<std::size_t>(m));
  std::iota(S.begin(), S.end(), Index{0});
  while (true) {
    Vector beta = Vector::Zero(d);
    double objective = 0.0;
    if (relaxed) {
      const Index n = d + m;
      Matrix K = Matrix::Zero(n, n);
      K.topLeftCorner(d, d) = G;
      K.topLeftCorner(d, d).diagonal().array() += inv_gamma;
      for (int s = 0; s < m; ++s) {
        K(S[static_cast<std::size_t>(s)], d + s) = -inv_gamma;
        K(d + s, S[static_cast<std::size_t>(s)]) = -inv_gamma;
        K(d + s, d + s) = inv_gamma;
      }
      Vector rhs = Vector::Zero(n);
      rhs.head(d) = b;
      const Vector sol = K.llt().solve(rhs);
      beta = sol.head(d);
      Vector eta = Vector::Zero(d);
      for (int s = 0; s < m; ++s) eta[S[static_cast<std::size_t>(s)]] = sol[d + s];
      objective = relaxed_objective(inst, beta, eta);
    } else if (m > 0) {
      Matrix Gs(m, m);
      Vector bs(m);
      for (int i = 0; i < m; ++i) {
        bs[i] = b[S[static_cast<std::size_t>(i)]];
        for (int j = 0; j < m; ++j)
          Gs(i, j) = G(S[static_cast<std::size_t>(i)], S[static_cast<std::size_t>(j)]);
      }
      const Vector sol = Gs.ldlt().solve(bs);
      for (int i = 0; i < m; ++i) beta[S[static_cast<std::size_t>(i)]] = sol[i];
      objective = original_objective(inst, beta);
    } else {
      objective = original_objective(inst, beta);
    }
    ++best.cases;
    if (objective < best.objective) {
      best.objective = objective;
      best.support = S;
      best.solution = beta;
    }

    int i = m - 1;
    while (i >= 0 && S[static_cast<std::size_t>(i)] == d - m + i) --i;
    if (i < 0) break;
    ++S[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j)
      S[static_cast<std::size_t>(j)] = S[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

TrialRecord run_trial(std::uint64_t seed, double gamma, const RegressionShape& shape,
                      long iteration_cap, double tol) {
  const RegressionInstance inst = generate_instance(seed, gamma, shape);
  const RegressResult palm = palm_regress(inst, iteration_cap, tol);
  const OracleResult relaxed = exhaustive_oracle(inst, true);
  const OracleResult original = exhaustive_oracle(inst, false);

  TrialRecord rec;
  rec.seed = seed;
  rec.palm_support = support_of(palm.eta);
  rec.relaxed_support = relaxed.support;
  rec.original_support = original.support;
  rec.palm_objective = relaxed_objective(inst, palm.beta, palm.eta);
  rec.relaxed_objective = relaxed.objective;
  rec.original_objective = original.objective;
  rec.objective_gap = (rec.palm_objective - rec.relaxed_objective) / std::abs(rec.relaxed_objective);
  rec.palm_matches_original = rec.palm_support == rec.original_support;
  rec.relaxed_matches_original = rec.relaxed_support == rec.original_support;
  rec.palm_iterations = palm.iterations;
  return rec;
}

nlohmann::json to_json(const TrialRecord& record) {
  return {
      {"seed", record.seed},
      {"rng", std::string(Rng::kName)},
      {"palm_support", record.palm_support},
      {"relaxed_support", record.relaxed_support},
      {"original_support", record.original_support},
      {"palm_objective", record.palm_objective},
      {"relaxed_objective", record.relaxed_objective},
      {"original_objective", record.original_objective},
      {"objective_gap", record.objective_gap},
      {"palm_matches_original", record.palm_matches_original},
      {"relaxed_matches_original", record.relaxed_matches_original},
      {"palm_iterations", record.palm_iterations},
  };
}

}  // namespace asmcvar
