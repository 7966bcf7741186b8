#include "asmcvar/backtest.hpp"
#include "asmcvar/data.hpp"
#include "asmcvar/errors.hpp"
#include "asmcvar/metrics.hpp"
#include "asmcvar/model.hpp"
#include "asmcvar/operators.hpp"
#include "asmcvar/rng.hpp"
#include "asmcvar/solver.hpp"
#include "asmcvar/sparse_regress.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

namespace py = pybind11;
using namespace asmcvar;

namespace {

ReturnPanel panel_from_array(const Matrix& returns, std::vector<int> dates) {
  ReturnPanel panel;
  panel.returns = returns;
  if (dates.empty()) {
    int year = 2000, month = 1;
    for (Index i = 0; i < returns.rows(); ++i) {
      dates.push_back(year * 100 + month);
      if (++month > 12) {
        month = 1;
        ++year;
      }
    }
  }
  panel.dates = std::move(dates);
  for (Index j = 0; j < returns.cols(); ++j) panel.assets.push_back("asset_" + std::to_string(j + 1));
  panel.provenance.source = "<array>";
  panel.validate();
  return panel;
}

ExtractionMode parse_mode(const std::string& mode) {
  if (mode == "raw") return ExtractionMode::raw;
  if (mode == "thresholded") return ExtractionMode::thresholded;
  throw ParameterError("mode must be 'raw' or 'thresholded'");
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Sparse mean-CVaR portfolio selection (PALM outer loop, FPPA inner projection)";

  auto base = py::register_exception<Error>(mod, "AsmcvarError");
  py::register_exception<ParseError>(mod, "ParseError", base);
  py::register_exception<DataError>(mod, "DataError", base);
  py::register_exception<ShapeError>(mod, "ShapeError", base);
  py::register_exception<ParameterError>(mod, "ParameterError", base);
  py::register_exception<NumericalError>(mod, "NumericalError", base);
  py::register_exception<BacktestError>(mod, "BacktestError", base);
  py::register_exception<UndefinedMetricError>(mod, "UndefinedMetricError", base);
  py::register_exception<DegenerateSolutionError>(mod, "DegenerateSolutionError", base);
  py::register_exception<CombinatorialLimitError>(mod, "CombinatorialLimitError", base);

  mod.attr("RNG_NAME") = std::string(Rng::kName);

  py::class_<ReturnPanel>(mod, "ReturnPanel")
      .def_readonly("dates", &ReturnPanel::dates)
      .def_readonly("assets", &ReturnPanel::assets)
      .def_readonly("returns", &ReturnPanel::returns)
      .def_property_readonly("block_title", [](const ReturnPanel& p) { return p.provenance.block_title; })
      .def_property_readonly("source", [](const ReturnPanel& p) { return p.provenance.source; });
  mod.def("load_panel", &load_panel, py::arg("path"), py::arg("percent_scale") = true);

  py::class_<ModelParams>(mod, "ModelParams")
      .def(py::init<>())
      .def(py::init([](double c, double rho, double gamma, int m, std::optional<double> lambda,
                       std::uint64_t seed) {
             return ModelParams{c, rho, gamma, m, lambda, seed};
           }),
           py::kw_only(), py::arg("c") = 0.99, py::arg("rho") = 0.02, py::arg("gamma") = 1e-5,
           py::arg("m") = 10, py::arg("lambda_") = py::none(), py::arg("seed") = 0)
      .def_readwrite("c", &ModelParams::c)
      .def_readwrite("rho", &ModelParams::rho)
      .def_readwrite("gamma", &ModelParams::gamma)
      .def_readwrite("m", &ModelParams::m)
      .def_readwrite("lambda_", &ModelParams::lambda)
      .def_readwrite("seed", &ModelParams::seed);

  py::class_<ProblemData>(mod, "ProblemData")
      .def_readonly("R", &ProblemData::R)
      .def_readonly("mu_hat", &ProblemData::mu_hat)
      .def_readonly("h1", &ProblemData::h1)
      .def_readonly("h2", &ProblemData::h2)
      .def_readonly("q", &ProblemData::q)
      .def_readonly("c", &ProblemData::c)
      .def_readonly("rho", &ProblemData::rho)
      .def_readonly("lambda_", &ProblemData::lambda)
      .def_readonly("gamma", &ProblemData::gamma)
      .def_readonly("m", &ProblemData::m)
      .def_readonly("N", &ProblemData::N)
      .def_readonly("T", &ProblemData::T)
      .def_readonly("N1", &ProblemData::N1)
      .def_readonly("N2", &ProblemData::N2)
      .def_readonly("L1", &ProblemData::L1)
      .def_readonly("L2", &ProblemData::L2)
      .def_readonly("q_norm_sq", &ProblemData::q_norm_sq);

  mod.def("assemble", py::overload_cast<const Matrix&, const ModelParams&>(&assemble),
          py::arg("R"), py::arg("params") = ModelParams{});
  mod.def("default_lambda", &default_lambda, py::arg("R"), py::arg("c"), py::arg("rho"));
  mod.def("apply_Q", py::overload_cast<const ProblemData&, const Vector&>(&apply_Q));
  mod.def("apply_Qt", py::overload_cast<const ProblemData&, const Vector&>(&apply_Qt));

  mod.def("prox_box", &prox_box);
  mod.def("hard_threshold_m", &hard_threshold_m, py::arg("w"), py::arg("m"));
  mod.def("lav_indices", &lav_indices, py::arg("w"), py::arg("m"));
  mod.def("tailed_indicator", &tailed_indicator, py::arg("w"), py::arg("m"), py::arg("gamma"));
  mod.def("eval_f", &eval_f);
  mod.def("eval_H", &eval_H);
  mod.def("grad_v_H", &grad_v_H);
  mod.def("grad_y_H", &grad_y_H);
  mod.def("eval_G", &eval_G);
  mod.def("eval_Psi", &eval_Psi);
  mod.def("constraint_residual", &constraint_residual);

  py::class_<SolverConfig>(mod, "SolverConfig")
      .def(py::init<>())
      .def_static("tightened", &SolverConfig::tightened)
      .def_readwrite("max_outer", &SolverConfig::max_outer)
      .def_readwrite("tol_outer", &SolverConfig::tol_outer)
      .def_readwrite("max_inner", &SolverConfig::max_inner)
      .def_readwrite("tol_inner", &SolverConfig::tol_inner)
      .def_readwrite("beta1", &SolverConfig::beta1)
      .def_readwrite("beta2", &SolverConfig::beta2)
      .def_readwrite("theta", &SolverConfig::theta)
      .def_readwrite("theta_use_qtilde", &SolverConfig::theta_use_qtilde)
      .def_readwrite("warm_start_inner", &SolverConfig::warm_start_inner)
      .def_readwrite("seed", &SolverConfig::seed);

  py::class_<FppaResult>(mod, "FppaResult")
      .def_readonly("u", &FppaResult::u)
      .def_readonly("z", &FppaResult::z)
      .def_readonly("iterations", &FppaResult::iterations)
      .def_readonly("converged", &FppaResult::converged);
  mod.def("fppa_prox", &fppa_prox, py::arg("pd"), py::arg("p"), py::arg("z_init"),
          py::arg("theta"), py::arg("tol"), py::arg("max_iter"));

  py::class_<SolveReport>(mod, "SolveReport")
      .def_readonly("v_final", &SolveReport::v_final)
      .def_readonly("y_final", &SolveReport::y_final)
      .def_readonly("outer_iterations", &SolveReport::outer_iterations)
      .def_readonly("inner_iterations", &SolveReport::inner_iterations)
      .def_readonly("objective_trace", &SolveReport::objective_trace)
      .def_readonly("smooth_trace", &SolveReport::smooth_trace)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("wall_time", &SolveReport::wall_time)
      .def_readonly("feasibility_residual", &SolveReport::feasibility_residual)
      .def_readonly("residual_tol", &SolveReport::residual_tol)
      .def("to_json", [](const SolveReport& r) { return to_json(r).dump(); });

  mod.def(
      "palm_solve",
      [](const ProblemData& pd, const SolverConfig& cfg, std::optional<Vector> v0,
         std::optional<Vector> y0) {
        py::gil_scoped_release release;
        return palm_solve(pd, cfg, v0 ? *v0 : default_v0(pd), y0 ? *y0 : default_y0(pd));
      },
      py::arg("pd"), py::arg("cfg") = SolverConfig{}, py::arg("v0") = py::none(),
      py::arg("y0") = py::none());

  py::class_<Portfolio>(mod, "Portfolio")
      .def_readonly("weights", &Portfolio::weights)
      .def_readonly("support", &Portfolio::support)
      .def_readonly("trade_index", &Portfolio::trade_index)
      .def_readonly("feasibility_residual", &Portfolio::feasibility_residual);
  mod.def(
      "extract_portfolio",
      [](const SolveReport& r, const ProblemData& pd, const std::string& mode) {
        return extract_portfolio(r, pd, parse_mode(mode));
      },
      py::arg("report"), py::arg("pd"), py::arg("mode") = "thresholded");

  py::class_<BacktestResult>(mod, "BacktestResult")
      .def_readonly("dates", &BacktestResult::dates)
      .def_readonly("portfolios", &BacktestResult::portfolios)
      .def_readonly("wealth", &BacktestResult::wealth)
      .def_readonly("gross_returns", &BacktestResult::gross_returns)
      .def_readonly("period_returns", &BacktestResult::period_returns)
      .def_readonly("market_returns", &BacktestResult::market_returns)
      .def_readonly("nu", &BacktestResult::nu);

  mod.def(
      "run_backtest",
      [](const Matrix& returns, std::size_t T, double nu, const std::string& strategy,
         const ModelParams& params, const SolverConfig& cfg, const std::string& mode,
         unsigned jobs, std::vector<int> dates) {
        if (strategy != "uniform" && strategy != "asmcvar")
          throw ParameterError("strategy must be 'asmcvar' or 'uniform'");
        const ReturnPanel panel = panel_from_array(returns, std::move(dates));
        const Strategy s = strategy == "uniform"
                               ? uniform_strategy()
                               : asmcvar_strategy(params, cfg, parse_mode(mode));
        py::gil_scoped_release release;
        return run_backtest(panel, s, T, nu, jobs);
      },
      py::arg("returns"), py::arg("T") = 60, py::arg("nu") = 0.0, py::arg("strategy") = "asmcvar",
      py::arg("params") = ModelParams{}, py::arg("cfg") = SolverConfig{},
      py::arg("mode") = "thresholded", py::arg("jobs") = 1, py::arg("dates") = std::vector<int>{});
  mod.def(
      "tc_sweep",
      [](const Matrix& returns, const std::vector<Portfolio>& portfolios,
         const std::vector<double>& nu_grid) {
        return tc_sweep(panel_from_array(returns, {}), portfolios, nu_grid);
      },
      py::arg("returns"), py::arg("portfolios"), py::arg("nu_grid") = default_nu_grid());
  mod.def("default_nu_grid", &default_nu_grid);
  mod.def("evolve_weights", &evolve_weights);

  py::class_<CapmResult>(mod, "CapmResult")
      .def_readonly("alpha", &CapmResult::alpha)
      .def_readonly("beta", &CapmResult::beta)
      .def_readonly("t_stat", &CapmResult::t_stat)
      .def_readonly("pvalue", &CapmResult::pvalue)
      .def_readonly("dof", &CapmResult::dof);
  py::class_<OverlapStats>(mod, "OverlapStats")
      .def_readonly("mean", &OverlapStats::mean)
      .def_readonly("std", &OverlapStats::std)
      .def_readonly("series", &OverlapStats::series)
      .def_readonly("excluded", &OverlapStats::excluded);
  mod.def("sharpe_ratio", &sharpe_ratio, py::arg("returns"), py::arg("risk_free") = 0.0);
  mod.def("capm_alpha", &capm_alpha, py::arg("r_s"), py::arg("r_m"));
  mod.def("overlap_series", &overlap_series);
  mod.def("student_t_cdf", &student_t_cdf);

  py::class_<RegressionInstance>(mod, "RegressionInstance")
      .def(py::init<>())
      .def_readwrite("X", &RegressionInstance::X)
      .def_readwrite("y", &RegressionInstance::y)
      .def_readwrite("beta_true", &RegressionInstance::beta_true)
      .def_readwrite("m", &RegressionInstance::m)
      .def_readwrite("gamma", &RegressionInstance::gamma)
      .def_readwrite("seed", &RegressionInstance::seed);
  py::class_<RegressResult>(mod, "RegressResult")
      .def_readonly("beta", &RegressResult::beta)
      .def_readonly("eta", &RegressResult::eta)
      .def_readonly("iterations", &RegressResult::iterations)
      .def_readonly("converged", &RegressResult::converged);
  py::class_<OracleResult>(mod, "OracleResult")
      .def_readonly("objective", &OracleResult::objective)
      .def_readonly("support", &OracleResult::support)
      .def_readonly("solution", &OracleResult::solution)
      .def_readonly("cases", &OracleResult::cases);
  mod.def(
      "generate_instance",
      [](std::uint64_t seed, double gamma, Index n, Index d, int m) {
        return generate_instance(seed, gamma, RegressionShape{n, d, m, std::min<Index>(3, d)});
      },
      py::arg("seed"), py::arg("gamma") = 1e-7, py::arg("n") = 50, py::arg("d") = 10,
      py::arg("m") = 3);
  mod.def(
      "palm_regress",
      [](const RegressionInstance& inst, long cap, double tol) {
        py::gil_scoped_release release;
        return palm_regress(inst, cap, tol);
      },
      py::arg("inst"), py::arg("iteration_cap") = 5'000'000, py::arg("tol") = 1e-12);
  mod.def("exhaustive_oracle", &exhaustive_oracle, py::arg("inst"), py::arg("relaxed"));
  mod.def(
      "run_trial",
      [](std::uint64_t seed, double gamma, long cap, double tol) {
        TrialRecord rec;
        {
          py::gil_scoped_release release;
          rec = run_trial(seed, gamma, RegressionShape{}, cap, tol);
        }
        return py::module_::import("json").attr("loads")(to_json(rec).dump());
      },
      py::arg("seed"), py::arg("gamma") = 1e-7, py::arg("iteration_cap") = 5'000'000,
      py::arg("tol") = 1e-12);
}
