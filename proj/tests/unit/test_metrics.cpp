#include "asmcvar/errors.hpp"
#include "asmcvar/metrics.hpp"

#include "../oracles.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <sstream>

using namespace asmcvar;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("Sharpe ratio") {
  CHECK(sharpe_ratio(vec({0.1, -0.1})) == 0.0);
  CHECK(sharpe_ratio(vec({0.02, 0.04})) == doctest::Approx(0.03 / std::sqrt(0.0002)).epsilon(1e-13));
  CHECK(sharpe_ratio(vec({0.02, 0.04})) == doctest::Approx(2.1213203435596424).epsilon(1e-12));
  CHECK_THROWS_AS(sharpe_ratio(vec({0.01, 0.01, 0.01})), UndefinedMetricError);
  CHECK_THROWS_AS(sharpe_ratio(vec({0.01})), UndefinedMetricError);
}

TEST_CASE("incomplete beta against Boost") {
  for (double a : {0.5, 1.0, 2.5, 10.0, 30.0})
    for (double b : {0.5, 1.0, 3.0})
      for (double x : {0.001, 0.1, 0.5, 0.77, 0.999})
        CHECK(std::abs(regularized_incomplete_beta(a, b, x) - boost::math::ibeta(a, b, x)) <= 1e-10);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("t CDF symmetry and monotonicity") {
  CHECK(student_t_cdf(0.0, 7.0) == 0.5);
  double prev = 0.0;
  for (double t = -6.0; t <= 6.0; t += 0.25) {
    const double c = student_t_cdf(t, 12.0);
    CHECK(c > prev);
    CHECK(c + student_t_cdf(-t, 12.0) == doctest::Approx(1.0).epsilon(1e-12));
    prev = c;
  }
}

TEST_CASE("CAPM alpha") {
  const Vector r = vec({0.01, -0.02, 0.03, 0.005});
  const auto same = capm_alpha(r, r);
  CHECK(same.beta == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(same.alpha == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(same.pvalue == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_THROWS_AS(capm_alpha(r, Vector::Constant(4, 0.01)), UndefinedMetricError);

  Rng rng(77);
  for (int k = 0; k < 10; ++k) {
    const Vector m = oracle::random_vector(rng, 50, 0.04);
    Vector s = 0.002 + 0.9 * m.array();
    s += oracle::random_vector(rng, 50, 0.01);
    const auto got = capm_alpha(s, m);
    const auto ref = oracle::ols_intercept(s, m);
    CHECK(got.alpha == doctest::Approx(ref.alpha).epsilon(1e-8));
    CHECK(got.beta == doctest::Approx(ref.beta).epsilon(1e-8));
    CHECK(got.t_stat == doctest::Approx(ref.t_stat).epsilon(1e-8));
    CHECK(std::abs(got.pvalue - ref.pvalue) <= 1e-8);
    CHECK(got.dof == 48);

    const auto scaled = capm_alpha(s, 3.0 * m);
    CHECK(scaled.beta == doctest::Approx(got.beta / 3.0).epsilon(1e-10));
    CHECK(scaled.alpha == doctest::Approx(got.alpha).epsilon(1e-10));
  }
}

TEST_CASE("overlap series") {
  auto a = std::vector<Support>{{1, 2, 3}};
  auto b = std::vector<Support>{{2, 3, 4, 5}};
  CHECK(overlap_series(a, b).series[0] == doctest::Approx(2.0 / 3.0));

  std::vector<Support> same(5, Support{0, 4, 7});
  const auto ident = overlap_series(same, same);
  CHECK(ident.mean == 1.0);
  CHECK(ident.std == 0.0);

  std::vector<std::string> warnings;
  set_warning_sink([&](std::string_view msg) { warnings.emplace_back(msg); });
  const auto partial = overlap_series({{}, {1, 2}}, {{1}, {2}});
  set_warning_sink(nullptr);
  CHECK(partial.excluded == 1);
  CHECK(std::isnan(partial.series[0]));
  CHECK(partial.mean == 0.5);
  CHECK(warnings.size() == 1);
  CHECK_THROWS_AS(overlap_series({{1}}, {}), ShapeError);
}

TEST_CASE("metric exports") {
  MetricReport rep;
  rep.final_wealth = 2.5;
  rep.sharpe = 0.3;
  rep.overlaps.push_back({10, 15, {0.9, 0.05, {}, 0}});
  std::ostringstream csv;
  write_metrics_csv(rep, csv);
  CHECK(csv.str().find("overlap_mean_10_15") != std::string::npos);
  const auto j = to_json(rep);
  CHECK(j.at("final_wealth").get<double>() == 2.5);
  CHECK(j.at("overlaps")[0].at("mean").get<double>() == 0.9);
}
