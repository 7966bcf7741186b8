#include "asmcvar/metrics.hpp"

#include "asmcvar/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

namespace asmcvar {

namespace {

double sample_mean(const Vector& x) { return x.mean(); }

double sample_var(const Vector& x) {
  const double mean = x.mean();
  return (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

std::string shortest(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kFloor = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFloor) d = kFloor;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFloor) d = kFloor;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFloor) c = kFloor;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFloor) d = kFloor;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFloor) c = kFloor;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  warn("incomplete beta continued fraction did not converge");
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ParameterError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw ParameterError("degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(dof / 2.0, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

double sharpe_ratio(const Vector& returns, double risk_free) {
  if (returns.size() < 2) throw UndefinedMetricError("Sharpe ratio needs at least 2 returns");
  if (returns.maxCoeff() == returns.minCoeff())
    throw UndefinedMetricError("Sharpe ratio undefined for zero-variance returns");
  const double sd = std::sqrt(sample_var(returns));
  return (sample_mean(returns) - risk_free) / sd;
}

CapmResult capm_alpha(const Vector& r_s, const Vector& r_m) {
  if (r_s.size() != r_m.size()) throw ShapeError("capm_alpha: series lengths differ");
  const Index n = r_s.size();
  if (n < 3) throw UndefinedMetricError("CAPM regression needs at least 3 periods");
  if (r_m.maxCoeff() == r_m.minCoeff())
    throw UndefinedMetricError("market returns have zero variance");

  const double mean_s = r_s.mean();
  const double mean_m = r_m.mean();
  const Vector dm = r_m.array() - mean_m;
  const Vector ds = r_s.array() - mean_s;
  const double denom = static_cast<double>(n - 1);
  const double cov = ds.dot(dm) / denom;
  const double var_m = dm.squaredNorm() / denom;

  CapmResult out;
  out.dof = static_cast<std::size_t>(n - 2);
  out.beta = cov / var_m;
  out.alpha = mean_s - out.beta * mean_m;

  const Vector resid = (r_s.array() - out.alpha - out.beta * r_m.array()).matrix();
  const double s2 = resid.squaredNorm() / static_cast<double>(n - 2);
  const double sxx = dm.squaredNorm();
  const double se = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mean_m * mean_m / sxx));

  if (se > 0.0) {
    out.t_stat = out.alpha / se;
  } else if (out.alpha == 0.0) {
    out.t_stat = 0.0;
  } else {
    out.t_stat = out.alpha > 0.0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
  }
  out.pvalue = 1.0 - student_t_cdf(out.t_stat, static_cast<double>(out.dof));
  if (out.t_stat == 0.0) out.pvalue = 0.5;
  return out;
}

OverlapStats overlap_series(const std::vector<Support>& supports_a,
                            const std::vector<Support>& supports_b) {
  if (supports_a.size() != supports_b.size())
    throw ShapeError("overlap_series: support lists differ in length");
  OverlapStats out;
  std::vector<double> valid;
  for (std::size_t t = 0; t < supports_a.size(); ++t) {
    Support a = supports_a[t], b = supports_b[t];
    if (a.empty()) {
      ++out.excluded;
      out.series.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    Support common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    const double p = static_cast<double>(common.size()) / static_cast<double>(a.size());
    out.series.push_back(p);
    valid.push_back(p);
  }
  if (out.excluded > 0)
    warn("overlap_series excluded " + std::to_string(out.excluded) +
         " period(s) with an empty support");
  if (valid.empty()) {
    out.mean = out.std = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const Eigen::Map<const Vector> v(valid.data(), static_cast<Index>(valid.size()));
  out.mean = v.mean();
  out.std = valid.size() > 1 ? std::sqrt(sample_var(v)) : 0.0;
  return out;
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json overlaps = nlohmann::json::array();
  for (const auto& pair : report.overlaps)
    overlaps.push_back({{"m_from", pair.m_from},
                        {"m_to", pair.m_to},
                        {"mean", pair.stats.mean},
                        {"std", pair.stats.std},
                        {"excluded", pair.stats.excluded}});
  return {
      {"final_wealth", report.final_wealth},
      {"sharpe", report.sharpe},
      {"alpha", report.capm.alpha},
      {"beta", report.capm.beta},
      {"alpha_t", report.capm.t_stat},
      {"alpha_pvalue", report.capm.pvalue},
      {"alpha_dof", report.capm.dof},
      {"overlaps", overlaps},
      {"conventions",
       {{"variance_denominator", "n-1"},
        {"risk_free", 0.0},
        {"alpha_test", "OLS intercept t-test, right-tailed, n-2 dof"},
        {"market", "uniform buy-and-hold"}}},
  };
}

void write_metrics_csv(const MetricReport& report, std::ostream& out) {
  out << "final_wealth,sharpe,alpha,beta,alpha_t,alpha_pvalue";
  for (const auto& pair : report.overlaps)
    out << ",overlap_mean_" << pair.m_from << '_' << pair.m_to << ",overlap_std_"
        << pair.m_from << '_' << pair.m_to;
  out << '\n';
  out << shortest(report.final_wealth) << ',' << shortest(report.sharpe) << ','
      << shortest(report.capm.alpha) << ',' << shortest(report.capm.beta) << ','
      << shortest(report.capm.t_stat) << ',' << shortest(report.capm.pvalue);
  for (const auto& pair : report.overlaps)
    out << ',' << shortest(pair.stats.mean) << ',' << shortest(pair.stats.std);
  out << '\n';
}

}  // namespace asmcvar
