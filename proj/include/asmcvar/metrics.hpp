#pragma once

#include "asmcvar/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace asmcvar {

// All sample statistics below use the n-1 denominator.

// (mean - r_f) / sd. Throws UndefinedMetricError for fewer than two
// returns or zero variance.
double sharpe_ratio(const Vector& returns, double risk_free = 0.0);

struct CapmResult {
  double alpha = 0.0;
  double beta = 0.0;
  double t_stat = 0.0;
  double pvalue = 0.5;  // right-tailed, H1: alpha > 0
  std::size_t dof = 0;
};

// OLS of r_s on r_m with intercept. The alpha t-test uses the simple
// regression intercept standard error with n-2 degrees of freedom.
CapmResult capm_alpha(const Vector& r_s, const Vector& r_m);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);

struct OverlapStats {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> series;  // NaN where the period was excluded
  std::size_t excluded = 0;
};

// p^(t) = |A_t ∩ B_t| / |A_t|; periods with empty A_t are excluded.
OverlapStats overlap_series(const std::vector<Support>& supports_a,
                            const std::vector<Support>& supports_b);

struct OverlapPair {
  int m_from = 0;
  int m_to = 0;
  OverlapStats stats;
};

struct MetricReport {
  double final_wealth = 0.0;
  double sharpe = 0.0;
  CapmResult capm;
  std::vector<OverlapPair> overlaps;
};

nlohmann::json to_json(const MetricReport& report);
// Header plus a single data row.
void write_metrics_csv(const MetricReport& report, std::ostream& out);

}  // namespace asmcvar
