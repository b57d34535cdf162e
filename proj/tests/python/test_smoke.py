import math

import pytest

import optsale


def gbm_problem(**kw):
    args = dict(
        model=optsale.GbmParams(mu=0.05, sigma=0.2),
        utility=optsale.ExponentialUtility(gamma=0.5),
        r=0.02,
        nu=1.0,
    )
    args.update(kw)
    return optsale.ProblemSpec(**args)


def xou_problem(**kw):
    args = dict(
        model=optsale.XouParams(kappa=0.6, theta=1.0, eta=0.2),
        utility=optsale.ExponentialUtility(gamma=0.5),
        r=0.02,
        nu=1.0,
    )
    args.update(kw)
    return optsale.ProblemSpec(**args)


def test_gbm_exponential_threshold():
    sol = optsale.solve(gbm_problem())
    assert sol.strategy == "threshold"
    assert sol.threshold == pytest.approx(2.5128624172523394, abs=1e-9)
    assert sol.alpha == pytest.approx(0.5, abs=1e-12)


def test_classification():
    assert optsale.classify_strategy(gbm_problem(r=0.06)) == "sell_now"
    wait = gbm_problem(utility=optsale.PowerUtility(p=1.0))
    assert optsale.classify_strategy(wait) == "wait_forever"
    assert optsale.classify_strategy(xou_problem()) == "threshold"


def test_validation_errors():
    with pytest.raises(ValueError):
        optsale.GbmParams(mu=0.05, sigma=-1.0)
    with pytest.raises(ValueError):
        gbm_problem(r=-0.01)


def test_xou_solution_and_values():
    sol = optsale.solve(xou_problem())
    assert sol.log_threshold == pytest.approx(1.1266624361139727, abs=1e-8)
    x = sol.threshold
    # value matching and dominance
    assert sol.value(x) == pytest.approx(1 - math.exp(-0.5 * x), rel=1e-10)
    assert sol.value(1.0) > 1 - math.exp(-0.5)
    ce, premium = sol.certainty_equivalent(1.0)
    assert ce == pytest.approx(2.4059097316248985, rel=1e-8)
    assert premium == pytest.approx(ce - 1.0, rel=1e-8)
    ce_stop, premium_stop = sol.certainty_equivalent(2 * x)
    assert ce_stop == pytest.approx(2 * x)
    assert premium_stop == 0.0


def test_wait_forever_is_inf():
    sol = optsale.solve(gbm_problem(utility=optsale.PowerUtility(p=1.0)))
    assert sol.strategy == "wait_forever"
    assert math.isinf(sol.value(1.0))
    ce, premium = sol.certainty_equivalent(1.0)
    assert math.isinf(ce) and math.isinf(premium)


def test_eigenfunctions():
    par = optsale.OuEigenParams(kappa=0.6, theta=1.0, eta=0.2, r=0.02)
    assert optsale.eval_F(par, 1.0) == pytest.approx(30.064834575370525, rel=1e-10)
    assert optsale.eval_F(par, 1.0) == pytest.approx(optsale.eval_G(par, 1.0))
    assert optsale.eval_F(par, 1.2, order=1) > 0
    assert optsale.eval_G(par, 1.2, order=1) < 0


def test_monte_carlo_reproducible_and_consistent():
    cfg = optsale.McConfig(n_paths=5000, seed=7)
    sol = optsale.solve(xou_problem(initial_price=2.6))
    est1 = optsale.mc_strategy_value(xou_problem(initial_price=2.6), sol.threshold, cfg)
    est2 = optsale.mc_strategy_value(xou_problem(initial_price=2.6), sol.threshold, cfg)
    assert est1.mean == est2.mean
    assert abs(est1.mean - sol.value(2.6)) <= 4 * est1.std_error


def test_verification_helpers():
    sol = optsale.solve(gbm_problem())
    audit = optsale.smooth_pasting_audit(sol)
    assert audit["pass"]
    grid = [0.5, 1.0, 2.0, 2.6, 3.5]
    vi = optsale.vi_residual_grid(sol, grid)
    assert vi["pass"]


def test_threshold_sweep_singleton():
    cfg = optsale.McConfig(n_paths=1000, seed=3)
    sol = optsale.solve(gbm_problem(initial_price=2.0))
    res = optsale.threshold_sweep(gbm_problem(initial_price=2.0), [sol.threshold], cfg)
    assert res.best_threshold == sol.threshold
