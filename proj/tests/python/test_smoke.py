import json
import math

import numpy as np
import pytest

import asmcvar


def panel(seed=7, periods=36, assets=6):
    rng = np.random.default_rng(seed)
    drift = 0.004 * np.arange(assets)
    return 0.01 + drift + 0.05 * rng.standard_normal((periods, assets))


def test_rng_name():
    assert asmcvar.RNG_NAME == "mt19937_64/u53/box-muller"


def test_hard_threshold_ties_keep_lowest_index():
    out = asmcvar.hard_threshold_m(np.array([1.0, -1.0, 1.0, 0.5]), 2)
    np.testing.assert_array_equal(out, [1.0, -1.0, 0.0, 0.0])


def test_tailed_indicator():
    w = np.array([0.5, 0.3, 0.2])
    assert asmcvar.tailed_indicator(w, 2, 0.1) == pytest.approx(0.2**2 / 0.2)
    assert asmcvar.tailed_indicator(w, 3, 0.1) == 0.0


def test_assemble_and_operators():
    R = panel(periods=12, assets=4)
    pd = asmcvar.assemble(R, asmcvar.ModelParams(m=2, gamma=1e-5))
    assert (pd.N, pd.T, pd.N1, pd.N2) == (4, 12, 17, 30)
    np.testing.assert_allclose(pd.mu_hat, R.mean(axis=0))
    v = np.random.default_rng(1).standard_normal(pd.N1)
    u = np.random.default_rng(2).standard_normal(pd.N2)
    lhs = asmcvar.apply_Q(pd, v) @ u
    rhs = v @ asmcvar.apply_Qt(pd, u)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_solve_produces_sparse_budget_portfolio():
    R = panel(periods=24, assets=6)
    pd = asmcvar.assemble(R, asmcvar.ModelParams(m=3))
    report = asmcvar.palm_solve(pd)
    assert report.outer_iterations >= 1
    trace = np.array(report.smooth_trace)
    assert np.all(np.isfinite(trace))
    port = asmcvar.extract_portfolio(report, pd, "thresholded")
    assert len(port.support) <= 3
    assert port.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(port.weights >= 0)
    json.loads(report.to_json())


def test_fppa_matches_feasible_point():
    R = panel(periods=3, assets=2)
    pd = asmcvar.assemble(R, asmcvar.ModelParams(m=2))
    p = np.concatenate([[0.5, 0.5], [10.0], np.full(3, 1.0)])
    res = asmcvar.fppa_prox(pd, p, np.zeros(pd.N2), 1.99 / pd.q_norm_sq, 1e-10, 1000)
    np.testing.assert_allclose(res.u, p, atol=1e-12)


def test_uniform_backtest_and_metrics():
    R = panel(periods=30, assets=5)
    res = asmcvar.run_backtest(R, T=12, strategy="uniform")
    assert res.wealth[0] == 1.0
    assert len(res.wealth) == 31
    gross = (1.0 + R) @ np.full(5, 0.2)
    assert res.wealth[1] == pytest.approx(gross[0], rel=1e-14)
    sr = asmcvar.sharpe_ratio(res.period_returns)
    assert sr == pytest.approx(res.period_returns.mean() / res.period_returns.std(ddof=1))
    capm = asmcvar.capm_alpha(res.period_returns, res.market_returns)
    assert capm.dof == 28
    assert 0.0 <= capm.pvalue <= 1.0


def test_asmcvar_backtest_costs_reduce_wealth():
    R = panel(periods=20, assets=5)
    free = asmcvar.run_backtest(R, T=8, nu=0.0, params=asmcvar.ModelParams(m=2))
    costly = asmcvar.run_backtest(R, T=8, nu=0.005, params=asmcvar.ModelParams(m=2))
    assert costly.wealth[-1] < free.wealth[-1]
    sweep = asmcvar.tc_sweep(R, free.portfolios)
    finals = [w for _, w in sweep]
    assert len(finals) == 11
    assert all(a >= b for a, b in zip(finals, finals[1:]))


def test_overlap_and_errors():
    stats = asmcvar.overlap_series([[0, 1, 2]], [[1, 2, 3]])
    assert stats.mean == pytest.approx(2 / 3)
    with pytest.raises(asmcvar.UndefinedMetricError):
        asmcvar.sharpe_ratio(np.array([0.1, 0.1, 0.1]))
    with pytest.raises(asmcvar.ParameterError):
        asmcvar.run_backtest(panel(), T=12, nu=1.5)
    assert issubclass(asmcvar.ParameterError, asmcvar.AsmcvarError)


def test_regression_trial():
    rec = asmcvar.run_trial(1)
    assert rec["rng"] == asmcvar.RNG_NAME
    assert rec["objective_gap"] <= 1e-6
    assert len(rec["palm_support"]) == 3
    inst = asmcvar.generate_instance(1)
    assert inst.X.shape == (50, 10)
    with pytest.raises(asmcvar.CombinatorialLimitError):
        asmcvar.exhaustive_oracle(asmcvar.generate_instance(1, d=30, m=10), True)
    assert math.comb(10, 3) == asmcvar.exhaustive_oracle(inst, False).cases
