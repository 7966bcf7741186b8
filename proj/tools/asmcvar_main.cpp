// asmcvar: solve a single window, run a moving-window backtest, or run the
// sparse-regression validation trials.
//
// Exit codes: 0 success, 1 numerical failure, 2 input error.

#include "asmcvar/backtest.hpp"
#include "asmcvar/data.hpp"
#include "asmcvar/errors.hpp"
#include "asmcvar/metrics.hpp"
#include "asmcvar/model.hpp"
#include "asmcvar/operators.hpp"
#include "asmcvar/rng.hpp"
#include "asmcvar/solver.hpp"
#include "asmcvar/sparse_regress.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace fs = std::filesystem;
using namespace asmcvar;
using nlohmann::json;

namespace {

constexpr int kExitNumerical = 1;
constexpr int kExitInput = 2;

struct RunConfig {
  std::string data;
  bool raw_returns = false;
  std::size_t window = 60;
  std::size_t trade_index = 0;  // solve only; 0 means window + 1
  std::vector<int> sparsities{10, 15, 20};
  double c = 0.99;
  double rho = 0.02;
  double gamma = 1e-5;
  std::optional<double> lambda;
  int max_outer = 10000;
  double tol_outer = 1e-4;
  int max_inner = 200;
  double tol_inner = 1e-3;
  std::vector<double> nu_grid = default_nu_grid();
  std::string mode = "thresholded";
  bool theta_use_qtilde = false;
  bool uniform = false;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  std::string out = "out";

  double regress_gamma = 1e-7;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  long iterations = 5'000'000;
  double regress_tol = 1e-12;
  long regress_n = 50;
  long regress_d = 10;
  int regress_m = 3;
};

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ",";
    if constexpr (std::is_floating_point_v<T>) out += shortest(x);
    else out += std::to_string(x);
  }
  return out;
}

// Every setting after defaults, config file and flags are merged; the file can
// be passed back through --config to repeat the run.
std::string resolved_config(const RunConfig& cfg, std::size_t trade_index) {
  std::ostringstream out;
  out << "data=\"" << cfg.data << "\"\n"
      << "raw-returns=" << (cfg.raw_returns ? "true" : "false") << "\n"
      << "window=" << cfg.window << "\n"
      << "t=" << trade_index << "\n"
      << "m=" << join(cfg.sparsities) << "\n"
      << "c=" << shortest(cfg.c) << "\n"
      << "rho=" << shortest(cfg.rho) << "\n"
      << "gamma=" << shortest(cfg.gamma) << "\n";
  if (cfg.lambda) out << "lambda=" << shortest(*cfg.lambda) << "\n";
  out << "max-outer=" << cfg.max_outer << "\n"
      << "tol-outer=" << shortest(cfg.tol_outer) << "\n"
      << "max-inner=" << cfg.max_inner << "\n"
      << "tol-inner=" << shortest(cfg.tol_inner) << "\n"
      << "nu-grid=" << join(cfg.nu_grid) << "\n"
      << "mode=\"" << cfg.mode << "\"\n"
      << "theta-use-qtilde=" << (cfg.theta_use_qtilde ? "true" : "false") << "\n"
      << "uniform=" << (cfg.uniform ? "true" : "false") << "\n"
      << "jobs=" << cfg.jobs << "\n"
      << "seed=" << cfg.seed << "\n"
      << "out=\"" << cfg.out << "\"\n"
      << "regress-gamma=" << shortest(cfg.regress_gamma) << "\n"
      << "seeds=" << join(cfg.seeds) << "\n"
      << "iterations=" << cfg.iterations << "\n"
      << "regress-tol=" << shortest(cfg.regress_tol) << "\n"
      << "regress-n=" << cfg.regress_n << "\n"
      << "regress-d=" << cfg.regress_d << "\n"
      << "regress-m=" << cfg.regress_m << "\n";
  return out.str();
}

ModelParams model_params(const RunConfig& cfg, int m) {
  ModelParams p;
  p.c = cfg.c;
  p.rho = cfg.rho;
  p.gamma = cfg.gamma;
  p.m = m;
  p.lambda = cfg.lambda;
  p.seed = cfg.seed;
  return p;
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig s;
  s.max_outer = cfg.max_outer;
  s.tol_outer = cfg.tol_outer;
  s.max_inner = cfg.max_inner;
  s.tol_inner = cfg.tol_inner;
  s.theta_use_qtilde = cfg.theta_use_qtilde;
  s.seed = cfg.seed;
  return s;
}

ExtractionMode extraction_mode(const RunConfig& cfg) {
  return cfg.mode == "raw" ? ExtractionMode::raw : ExtractionMode::thresholded;
}

json provenance_json(const ReturnPanel& panel) {
  return {{"source", panel.provenance.source},
          {"block_title", panel.provenance.block_title},
          {"first_line", panel.provenance.first_line},
          {"last_line", panel.provenance.last_line},
          {"first_date", panel.dates.front()},
          {"last_date", panel.dates.back()},
          {"periods", panel.periods()},
          {"assets", panel.assets}};
}

ReturnPanel load(const RunConfig& cfg) {
  if (cfg.data.empty()) throw DataError("--data is required");
  return load_panel(cfg.data, !cfg.raw_returns);
}

int cmd_solve(const RunConfig& cfg) {
  const ReturnPanel panel = load(cfg);
  const std::size_t t = cfg.trade_index ? cfg.trade_index : cfg.window + 1;
  const auto window = slice_window(panel, t, cfg.window);
  if (!window)
    throw ParameterError("trade index " + std::to_string(t) + " has fewer than " +
                         std::to_string(cfg.window) + " months of history");
  const int m = cfg.sparsities.front();
  const ProblemData pd = assemble(*window, model_params(cfg, m));
  const SolveReport report = palm_solve(pd, solver_config(cfg));
  const Portfolio portfolio = extract_portfolio(report, pd, extraction_mode(cfg));

  json doc = to_json(report);
  doc["trade_index"] = t;
  doc["trade_date"] = panel.dates[t - 1];
  doc["window"] = {{"start_index", window->start_index}, {"end_index", window->end_index}};
  doc["m"] = m;
  doc["lambda"] = pd.lambda;
  doc["gamma"] = pd.gamma;
  doc["L1"] = pd.L1;
  doc["L2"] = pd.L2;
  doc["q_norm_sq"] = pd.q_norm_sq;
  doc["f"] = eval_f(pd, report.v_final);
  const double psi = eval_Psi(pd, report.v_final);
  const double g = eval_G(pd, report.v_final, report.y_final);
  doc["Psi"] = std::isfinite(psi) ? json(psi) : json(nullptr);
  doc["G"] = std::isfinite(g) ? json(g) : json(nullptr);
  doc["mode"] = cfg.mode;
  doc["support"] = portfolio.support;
  doc["data"] = provenance_json(panel);
  write_json(fs::path(cfg.out) / "solve_report.json", doc);

  std::string csv = "asset,weight\n";
  for (Index j = 0; j < portfolio.weights.size(); ++j)
    csv += panel.assets[static_cast<std::size_t>(j)] + "," + shortest(portfolio.weights[j]) + "\n";
  write_text(fs::path(cfg.out) / "weights.csv", csv);

  std::cout << "trade date " << panel.dates[t - 1] << ": " << report.outer_iterations
            << " outer iterations, " << (report.converged ? "converged" : "iteration cap")
            << ", support size " << portfolio.support.size() << "\n";
  return 0;
}

struct MethodRun {
  std::string tag;
  BacktestResult result;
  std::vector<std::pair<double, double>> sweep;
};

std::vector<Support> solved_supports(const BacktestResult& res, std::size_t window) {
  std::vector<Support> out;
  for (std::size_t t = window; t < res.portfolios.size(); ++t) out.push_back(res.portfolios[t].support);
  return out;
}

MetricReport base_metrics(const BacktestResult& res) {
  MetricReport rep;
  rep.final_wealth = res.wealth[res.wealth.size() - 1];
  rep.sharpe = sharpe_ratio(res.period_returns);
  rep.capm = capm_alpha(res.period_returns, res.market_returns);
  return rep;
}

int cmd_backtest(const RunConfig& cfg) {
  const ReturnPanel panel = load(cfg);
  PortfolioCache cache;
  std::vector<MethodRun> runs;

  auto run = [&](const std::string& tag, const Strategy& strategy) {
    const auto portfolios = compute_portfolios(panel, strategy, cfg.window, cfg.jobs);
    MethodRun r{tag, apply_costs(panel, portfolios, 0.0), tc_sweep(panel, portfolios, cfg.nu_grid)};
    std::cout << tag << ": final wealth " << shortest(r.result.wealth[r.result.wealth.size() - 1])
              << "\n";
    runs.push_back(std::move(r));
  };
  if (cfg.uniform) {
    run("uniform", uniform_strategy());
  } else {
    for (int m : cfg.sparsities)
      run("m" + std::to_string(m), asmcvar_strategy(model_params(cfg, m), solver_config(cfg),
                                                    extraction_mode(cfg), &cache));
  }

  json overlaps = json::array();
  std::vector<MetricReport> metrics;
  for (const auto& r : runs) metrics.push_back(base_metrics(r.result));
  if (!cfg.uniform) {
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
      OverlapPair pair{cfg.sparsities[i], cfg.sparsities[i + 1],
                       overlap_series(solved_supports(runs[i].result, cfg.window),
                                      solved_supports(runs[i + 1].result, cfg.window))};
      metrics[i].overlaps.push_back(pair);
      overlaps.push_back({{"m_from", pair.m_from},
                          {"m_to", pair.m_to},
                          {"mean", pair.stats.mean},
                          {"std", pair.stats.std},
                          {"excluded", pair.stats.excluded},
                          {"series", pair.stats.series}});
    }
    write_json(fs::path(cfg.out) / "overlap.json", overlaps);
  }

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const fs::path dir(cfg.out);
    std::ostringstream wealth;
    write_backtest_csv(r.result, wealth);
    write_text(dir / ("wealth_" + r.tag + ".csv"), wealth.str());
    write_json(dir / ("supports_" + r.tag + ".json"), supports_json(r.result));
    json mj = to_json(metrics[i]);
    mj["method"] = r.tag;
    mj["window"] = cfg.window;
    mj["data"] = provenance_json(panel);
    write_json(dir / ("metrics_" + r.tag + ".json"), mj);
    std::ostringstream mcsv;
    write_metrics_csv(metrics[i], mcsv);
    write_text(dir / ("metrics_" + r.tag + ".csv"), mcsv.str());
    std::string sweep = "nu,final_wealth\n";
    for (const auto& [nu, w] : r.sweep) sweep += shortest(nu) + "," + shortest(w) + "\n";
    write_text(dir / ("tc_sweep_" + r.tag + ".csv"), sweep);
  }
  return 0;
}

int cmd_regress_demo(const RunConfig& cfg) {
  RegressionShape shape;
  shape.n = cfg.regress_n;
  shape.d = cfg.regress_d;
  shape.m = cfg.regress_m;
  shape.true_support = std::min<Index>(3, shape.d);
  const long cases = binomial(shape.d, shape.m);
  if (cases > kMaxOracleCases)
    throw CombinatorialLimitError("refusing: C(" + std::to_string(shape.d) + ", " +
                                  std::to_string(shape.m) + ") = " + std::to_string(cases) +
                                  " supports exceeds the limit of " +
                                  std::to_string(kMaxOracleCases));
  json trials = json::array();
  int palm_hits = 0, oracle_hits = 0;
  for (auto seed : cfg.seeds) {
    const auto rec = run_trial(seed, cfg.regress_gamma, shape, cfg.iterations, cfg.regress_tol);
    palm_hits += rec.palm_matches_original;
    oracle_hits += rec.relaxed_matches_original;
    trials.push_back(to_json(rec));
  }
  write_json(fs::path(cfg.out) / "regress_trials.json", trials);
  std::cout << "PALM support matched the exhaustive oracle in " << palm_hits << "/"
            << cfg.seeds.size() << " trials; relaxed and original oracles agreed in "
            << oracle_hits << "/" << cfg.seeds.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse mean-CVaR portfolios: single-window solves, backtests, and the "
               "sparse-regression validation trials"};
  app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");
  app.require_subcommand(1);

  RunConfig cfg;
  std::optional<double> lambda;
  app.add_option("--data", cfg.data, "Monthly return CSV (French library layout)");
  app.add_flag("--raw-returns", cfg.raw_returns, "Cells are decimal returns, not percent");
  app.add_option("--window", cfg.window, "Window length T")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--t", cfg.trade_index, "Trade index for solve (default: window + 1)");
  app.add_option("--m", cfg.sparsities, "Sparsity levels")->capture_default_str()->delimiter(',');
  app.add_option("--c", cfg.c, "CVaR confidence level")->capture_default_str();
  app.add_option("--rho", cfg.rho, "Expected return level")->capture_default_str();
  app.add_option("--gamma", cfg.gamma, "Tail approximation parameter")->capture_default_str();
  app.add_option("--lambda", lambda, "Override the default mixing weight");
  app.add_option("--max-outer", cfg.max_outer)->capture_default_str();
  app.add_option("--tol-outer", cfg.tol_outer)->capture_default_str();
  app.add_option("--max-inner", cfg.max_inner)->capture_default_str();
  app.add_option("--tol-inner", cfg.tol_inner)->capture_default_str();
  app.add_option("--nu-grid", cfg.nu_grid, "Transaction cost rates")->delimiter(',');
  app.add_option("--mode", cfg.mode, "Portfolio extraction")
      ->capture_default_str()
      ->check(CLI::IsMember({"raw", "thresholded"}));
  app.add_flag("--theta-use-qtilde", cfg.theta_use_qtilde,
               "Inner step from the leading 2T constraint rows only");
  app.add_flag("--uniform", cfg.uniform, "Backtest the 1/N strategy instead");
  app.add_option("--jobs", cfg.jobs, "Worker threads for window solves")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for power-iteration start vectors")->capture_default_str();
  app.add_option("--out", cfg.out, "Output directory")->capture_default_str();
  app.add_option("--regress-gamma", cfg.regress_gamma)->capture_default_str();
  app.add_option("--seeds", cfg.seeds, "Regression trial seeds")->delimiter(',');
  app.add_option("--iterations", cfg.iterations, "Regression PALM iteration cap")->capture_default_str();
  app.add_option("--regress-tol", cfg.regress_tol)->capture_default_str();
  app.add_option("--regress-n", cfg.regress_n)->capture_default_str();
  app.add_option("--regress-d", cfg.regress_d)->capture_default_str();
  app.add_option("--regress-m", cfg.regress_m)->capture_default_str();

  auto* solve = app.add_subcommand("solve", "Solve one window and write the report and weights");
  auto* backtest = app.add_subcommand("backtest", "Moving-window backtest with metrics and cost sweep");
  auto* regress = app.add_subcommand("regress-demo", "Sparse-regression trials against exhaustive oracles");
  for (auto* sub : {solve, backtest, regress}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }
  cfg.lambda = lambda;

  try {
    if (cfg.sparsities.empty()) throw ParameterError("--m needs at least one value");
    fs::create_directories(cfg.out);
    write_text(fs::path(cfg.out) / "resolved_config.ini",
               resolved_config(cfg, cfg.trade_index ? cfg.trade_index : cfg.window + 1));
    if (*solve) return cmd_solve(cfg);
    if (*backtest) return cmd_backtest(cfg);
    return cmd_regress_demo(cfg);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const BacktestError& e) {
    std::cerr << "backtest aborted: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DegenerateSolutionError& e) {
    std::cerr << "degenerate solution: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const UndefinedMetricError& e) {
    std::cerr << "metric undefined: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
}
