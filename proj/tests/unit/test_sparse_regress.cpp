#include "asmcvar/errors.hpp"
#include "asmcvar/operators.hpp"
#include "asmcvar/sparse_regress.hpp"

#include "../oracles.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>

using namespace asmcvar;

TEST_CASE("Toeplitz covariance") {
  const Matrix S = toeplitz_covariance(10);
  CHECK((S.diagonal().array() == 1.0).all());
  CHECK(S(0, 2) == 0.25);
  CHECK(S(2, 0) == 0.25);
  CHECK(S(0, 9) == doctest::Approx(std::pow(0.5, 9)));
}

TEST_CASE("generated designs have the target covariance") {
  RegressionShape shape;
  shape.n = 100000;
  const auto inst = generate_instance(42, 1e-7, shape);
  const Matrix emp = inst.X.transpose() * inst.X / static_cast<double>(shape.n);
  CHECK((emp - toeplitz_covariance(10)).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("default instance shape and reproducibility") {
  const auto a = generate_instance(3);
  const auto b = generate_instance(3);
  CHECK(a.X.rows() == 50);
  CHECK(a.X.cols() == 10);
  CHECK(a.m == 3);
  CHECK(a.beta_true.head(3).isOnes(0.0));
  CHECK(a.beta_true.tail(7).isZero(0.0));
  CHECK((a.X.array() == b.X.array()).all());
  CHECK((a.y.array() == b.y.array()).all());
  CHECK_FALSE((generate_instance(4).y.array() == a.y.array()).all());
}

TEST_CASE("orthonormal toy picks the largest response") {
  RegressionInstance inst;
  inst.X = Matrix::Identity(3, 3);
  inst.y = Vector(3);
  inst.y << 3, 2, 1;
  inst.m = 1;
  inst.gamma = 1e-3;
  const auto r = palm_regress(inst, 2000000, 1e-14);
  CHECK(r.eta[1] == 0.0);
  CHECK(r.eta[2] == 0.0);
  CHECK(r.eta[0] == doctest::Approx(3.0).epsilon(1e-2));
  CHECK(r.beta[0] == doctest::Approx(3.0).epsilon(1e-2));
}

TEST_CASE("large gamma recovers least squares") {
  auto inst = generate_instance(5);
  inst.gamma = 1e6;
  inst.m = 10;
  const auto r = palm_regress(inst, 5000000, 1e-15);
  const Vector ols = (inst.X.transpose() * inst.X).ldlt().solve(inst.X.transpose() * inst.y);
  CHECK((r.beta - ols).norm() <= 1e-6 * ols.norm());
}

TEST_CASE("objective descends and eta stays m-sparse") {
  const auto inst = generate_instance(6, 1e-3);
  const auto r = palm_regress(inst, 20000, 0.0, 1);
  REQUIRE(r.objective_trace.size() == 20001);
  for (std::size_t k = 1; k < r.objective_trace.size(); ++k)
    CHECK(r.objective_trace[k] <=
          r.objective_trace[k - 1] + 1e-10 * std::abs(r.objective_trace[k - 1]));
  for (long cap : {1L, 2L, 5L, 50L}) CHECK(count_nonzeros(palm_regress(inst, cap, 0.0).eta) <= 3);
}

TEST_CASE("exhaustive oracle") {
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(30, 10) == 30045015);
  const auto inst = generate_instance(1);
  const auto orig = exhaustive_oracle(inst, false);
  CHECK(orig.cases == 120);
  CHECK(orig.support.size() == 3);

  RegressionInstance small = inst;
  small.X = inst.X.leftCols(3);
  small.m = 3;
  const auto ls = exhaustive_oracle(small, false);
  CHECK(ls.cases == 1);
  const Vector ols = (small.X.transpose() * small.X).ldlt().solve(small.X.transpose() * small.y);
  CHECK((ls.solution - ols).norm() <= 1e-12 * ols.norm());

  RegressionShape big;
  big.d = 30;
  big.m = 10;
  CHECK_THROWS_AS(exhaustive_oracle(generate_instance(1, 1e-7, big), false), CombinatorialLimitError);
}

TEST_CASE("relaxed and original supports coincide as gamma shrinks") {
  for (double gamma : {1e-3, 1e-5, 1e-7}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto inst = generate_instance(seed, gamma);
      const auto rel = exhaustive_oracle(inst, true);
      const auto orig = exhaustive_oracle(inst, false);
      CHECK(rel.objective <= orig.objective * (1.0 + 1e-9));
      if (gamma <= 1e-5) CHECK(rel.support == orig.support);
    }
  }
}

TEST_CASE("trial record JSON") {
  const auto rec = run_trial(2, 1e-5, RegressionShape{}, 200000, 1e-12);
  const auto j = to_json(rec);
  CHECK(j.at("seed").get<int>() == 2);
  CHECK(j.at("rng").get<std::string>() == "mt19937_64/u53/box-muller");
  CHECK(j.at("palm_support").size() == 3);
}
