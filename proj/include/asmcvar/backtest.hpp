#pragma once

#include "asmcvar/data.hpp"
#include "asmcvar/model.hpp"
#include "asmcvar/solver.hpp"
#include "asmcvar/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace asmcvar {

// A strategy maps a history window to a portfolio. It never sees the cost
// rate, so one portfolio stream can be re-costed for any nu.
using Strategy = std::function<Portfolio(const Window&)>;

struct BacktestResult {
  std::vector<int> dates;             // trade dates, one per period
  std::vector<Portfolio> portfolios;  // one per period
  Vector wealth;          // S^(0..P), S^(0) = 1
  Vector gross_returns;   // x^(t)' w^(t)
  Vector period_returns;  // x^(t)' w^(t) - 1
  Vector market_returns;  // uniform buy-and-hold
  double nu = 0.0;
};

// Thread-safe memo of solved portfolios keyed by window contents and
// hyperparameters.
class PortfolioCache {
 public:
  std::optional<Portfolio> find(const std::string& key) const;
  void insert(const std::string& key, const Portfolio& portfolio);
  std::size_t size() const;

  static std::string key(const Window& window, const std::string& params);

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, Portfolio> entries_;
};

Strategy uniform_strategy();
Strategy asmcvar_strategy(ModelParams model, SolverConfig solver,
                          ExtractionMode mode, PortfolioCache* cache = nullptr);

// Portfolio for every trade index t = 1..P; the uniform portfolio while
// t <= T. Windows are solved on up to `jobs` threads; the result does not
// depend on the job count.
std::vector<Portfolio> compute_portfolios(const ReturnPanel& panel,
                                          const Strategy& strategy, std::size_t T,
                                          unsigned jobs = 1);

// Evolved weights after period returns x: w .* x / (x'w).
Vector evolve_weights(const Vector& w, const Vector& price_relatives);

// Wealth under proportional costs:
//   S^(t) = S^(t-1) (x'w) (1 - nu/2 sum_i |w_i - w~_i^(t-1)|), w~^(0) = 0.
// Throws BacktestError when a period factor is not positive.
BacktestResult apply_costs(const ReturnPanel& panel,
                           const std::vector<Portfolio>& portfolios, double nu);

BacktestResult run_backtest(const ReturnPanel& panel, const Strategy& strategy,
                            std::size_t T, double nu, unsigned jobs = 1);

// Uniform buy-and-hold returns from trade index `start` (1-based) to the end.
Vector ubah_market(const ReturnPanel& panel, std::size_t start = 1);

// Eleven rates from 0 to 0.5%.
std::vector<double> default_nu_grid();

std::vector<std::pair<double, double>> tc_sweep(const ReturnPanel& panel,
                                                const std::vector<Portfolio>& portfolios,
                                                const std::vector<double>& nu_grid);
std::vector<std::pair<double, double>> tc_sweep(const ReturnPanel& panel,
                                                const Strategy& strategy,
                                                std::size_t T,
                                                const std::vector<double>& nu_grid,
                                                unsigned jobs = 1);

// CSV: date,gross_return,wealth,market_return.
void write_backtest_csv(const BacktestResult& result, std::ostream& out);
// Per-period supports: [{"date", "trade_index", "support"}].
nlohmann::json supports_json(const BacktestResult& result);

}  // namespace asmcvar
