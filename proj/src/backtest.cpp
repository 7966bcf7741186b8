#include "asmcvar/backtest.hpp"

#include "asmcvar/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

namespace asmcvar {

namespace {

// FNV-1a over raw bytes.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 14695981039346656037ull) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

Vector price_relatives(const ReturnPanel& panel, std::size_t t) {
  return (panel.returns.row(static_cast<Index>(t - 1)).transpose().array() + 1.0).matrix();
}

}  // namespace

std::optional<Portfolio> PortfolioCache::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void PortfolioCache::insert(const std::string& key, const Portfolio& portfolio) {
  std::lock_guard lock(mutex_);
  entries_.emplace(key, portfolio);
}

std::size_t PortfolioCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string PortfolioCache::key(const Window& window, const std::string& params) {
  const Matrix& R = window.R;
  std::uint64_t h = fnv1a(R.data(), sizeof(double) * static_cast<std::size_t>(R.size()));
  const Index dims[2] = {R.rows(), R.cols()};
  h = fnv1a(dims, sizeof dims, h);
  std::ostringstream out;
  out << std::hex << h << '|' << params;
  return out.str();
}

Strategy uniform_strategy() {
  return [](const Window& window) { return uniform_portfolio(window.R.cols()); };
}

Strategy asmcvar_strategy(ModelParams model, SolverConfig solver, ExtractionMode mode,
                          PortfolioCache* cache) {
  std::ostringstream params;
  params << "c=" << shortest(model.c) << ";rho=" << shortest(model.rho)
         << ";gamma=" << shortest(model.gamma) << ";m=" << model.m
         << ";lambda=" << (model.lambda ? shortest(*model.lambda) : "auto")
         << ";seed=" << model.seed << ";max_outer=" << solver.max_outer
         << ";tol_outer=" << shortest(solver.tol_outer) << ";max_inner=" << solver.max_inner
         << ";tol_inner=" << shortest(solver.tol_inner)
         << ";qtilde=" << solver.theta_use_qtilde << ";warm=" << solver.warm_start_inner
         << ";mode=" << (mode == ExtractionMode::raw ? "raw" : "thresholded");
  return [model, solver, mode, cache, tag = params.str()](const Window& window) {
    std::string key;
    if (cache) {
      key = PortfolioCache::key(window, tag);
      if (auto hit = cache->find(key)) return *hit;
    }
    const ProblemData pd = assemble(window, model);
    const SolveReport report = palm_solve(pd, solver);
    Portfolio p = extract_portfolio(report, pd, mode);
    if (cache) cache->insert(key, p);
    return p;
  };
}

std::vector<Portfolio> compute_portfolios(const ReturnPanel& panel, const Strategy& strategy,
                                          std::size_t T, unsigned jobs) {
  if (T < 1) throw ParameterError("window length must be positive");
  const auto periods = static_cast<std::size_t>(panel.periods());
  const Index N = panel.num_assets();
  std::vector<Portfolio> out(periods);
  std::vector<std::exception_ptr> errors(periods);

  auto solve_one = [&](std::size_t t) {
    try {
      const auto window = slice_window(panel, t, T);
      Portfolio p = window ? strategy(*window) : uniform_portfolio(N);
      if (p.weights.size() != N)
        throw ShapeError("strategy returned " + std::to_string(p.weights.size()) +
                         " weights for " + std::to_string(N) + " assets");
      p.trade_index = t;
      out[t - 1] = std::move(p);
    } catch (...) {
      errors[t - 1] = std::current_exception();
    }
  };

  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    for (std::size_t t = 1; t <= periods; ++t) solve_one(t);
  } else {
    std::atomic<std::size_t> next{1};
    std::vector<std::jthread> workers;
    for (unsigned i = 0; i < jobs; ++i)
      workers.emplace_back([&] {
        for (std::size_t t = next++; t <= periods; t = next++) solve_one(t);
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

Vector evolve_weights(const Vector& w, const Vector& price_relatives) {
  const Vector grown = w.cwiseProduct(price_relatives);
  return grown / price_relatives.dot(w);
}

BacktestResult apply_costs(const ReturnPanel& panel, const std::vector<Portfolio>& portfolios,
                           double nu) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw ParameterError("cost rate nu must lie in [0, 1]");
  const std::size_t periods = portfolios.size();
  if (periods != static_cast<std::size_t>(panel.periods()))
    throw ShapeError("need one portfolio per panel period");

  BacktestResult res;
  res.nu = nu;
  res.portfolios = portfolios;
  res.dates = panel.dates;
  res.wealth.resize(static_cast<Index>(periods) + 1);
  res.gross_returns.resize(static_cast<Index>(periods));
  res.period_returns.resize(static_cast<Index>(periods));
  res.wealth[0] = 1.0;

  Vector evolved = Vector::Zero(panel.num_assets());
  for (std::size_t t = 1; t <= periods; ++t) {
    const Vector& w = portfolios[t - 1].weights;
    const Vector x = price_relatives(panel, t);
    const double gross = x.dot(w);
    const double turnover = (w - evolved).cwiseAbs().sum();
    const double factor = gross * (1.0 - nu / 2.0 * turnover);
    if (!(factor > 0.0))
      throw BacktestError("nonpositive wealth factor " + shortest(factor) + " in period " +
                              std::to_string(t) + " (" + std::to_string(panel.dates[t - 1]) +
                              ")",
                          t);
    const auto i = static_cast<Index>(t);
    res.gross_returns[i - 1] = gross;
    res.period_returns[i - 1] = gross - 1.0;
    res.wealth[i] = res.wealth[i - 1] * factor;
    evolved = evolve_weights(w, x);
  }
  res.market_returns = ubah_market(panel, 1);
  return res;
}

BacktestResult run_backtest(const ReturnPanel& panel, const Strategy& strategy, std::size_t T,
                            double nu, unsigned jobs) {
  return apply_costs(panel, compute_portfolios(panel, strategy, T, jobs), nu);
}

Vector ubah_market(const ReturnPanel& panel, std::size_t start) {
  const auto periods = static_cast<std::size_t>(panel.periods());
  if (start < 1 || start > periods) throw ParameterError("ubah_market: start out of range");
  const Index N = panel.num_assets();
  Vector held = Vector::Constant(N, 1.0 / static_cast<double>(N));
  Vector out(static_cast<Index>(periods - start + 1));
  for (std::size_t t = start; t <= periods; ++t) {
    const Vector x = price_relatives(panel, t);
    out[static_cast<Index>(t - start)] = x.dot(held) - 1.0;
    held = evolve_weights(held, x);
  }
  return out;
}

std::vector<double> default_nu_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 2000.0);
  return grid;
}

std::vector<std::pair<double, double>> tc_sweep(const ReturnPanel& panel,
                                                const std::vector<Portfolio>& portfolios,
                                                const std::vector<double>& nu_grid) {
  std::vector<std::pair<double, double>> out;
  for (double nu : nu_grid) {
    const auto res = apply_costs(panel, portfolios, nu);
    out.emplace_back(nu, res.wealth[res.wealth.size() - 1]);
  }
  return out;
}

std::vector<std::pair<double, double>> tc_sweep(const ReturnPanel& panel,
                                                const Strategy& strategy, std::size_t T,
                                                const std::vector<double>& nu_grid,
                                                unsigned jobs) {
  return tc_sweep(panel, compute_portfolios(panel, strategy, T, jobs), nu_grid);
}

void write_backtest_csv(const BacktestResult& result, std::ostream& out) {
  out << "date,gross_return,wealth,market_return\n";
  for (Index i = 0; i < result.gross_returns.size(); ++i) {
    out << result.dates[static_cast<std::size_t>(i)] << ',' << shortest(result.gross_returns[i])
        << ',' << shortest(result.wealth[i + 1]) << ',' << shortest(result.market_returns[i])
        << '\n';
  }
}

nlohmann::json supports_json(const BacktestResult& result) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < result.portfolios.size(); ++i) {
    const auto& p = result.portfolios[i];
    arr.push_back({{"date", result.dates[i]},
                   {"trade_index", p.trade_index},
                   {"support", p.support}});
  }
  return arr;
}

}  // namespace asmcvar
