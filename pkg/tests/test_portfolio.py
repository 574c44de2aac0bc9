import warnings

import numpy as np
import pytest

from scorekit.errors import ConfigError, ConfigWarning, DomainError, NumericError
from scorekit.estimation import OptimizerSettings
from scorekit.families import trivial_family, weighted_power_family
from scorekit.portfolio import (
    best_portfolio,
    domination_check,
    history_from_counts,
    parameter_grid,
    payoff_units,
    price_assets,
    simulate,
)
from scorekit.rules import log_rule, power_rule
from scorekit.simplex import binomial_squares_model, softmax_model

BASE_CONFIG = {
    "rule": {"type": "log"},
    "family": {"type": "weighted_power", "beta": 2},
    "model": {"name": "binomial_squares"},
    "history": [5, 2, 3],
    "rounds": 3,
    "seed": 11,
}


def test_history_from_counts():
    assert history_from_counts([2, 0, 1]) == [1, 1, 3]
    with pytest.raises(DomainError):
        history_from_counts([1, -1])
    with pytest.raises(DomainError):
        history_from_counts([1.5, 1])


def test_price_assets_examples():
    market = price_assets(log_rule(), softmax_model(3), history_from_counts([3, 3, 4]))
    np.testing.assert_allclose(market.prices, [0.3, 0.3, 0.4], atol=1e-6)
    market = price_assets(log_rule(), binomial_squares_model(), history_from_counts([5, 2, 3]))
    np.testing.assert_allclose(market.prices, [0.36, 0.48, 0.16], atol=1e-6)
    assert market.theta[0] == pytest.approx(0.4, abs=1e-6)
    with pytest.raises(DomainError):
        price_assets(log_rule(), binomial_squares_model(), [])


def test_price_assets_refuses_ill_behaved_estimates():
    with pytest.raises(NumericError):
        price_assets(log_rule(), softmax_model(3), [1, 2, 3], OptimizerSettings(n_starts=1))


def test_compatible_investor_buys_the_market():
    model = binomial_squares_model()
    market = price_assets(log_rule(), model, history_from_counts([5, 2, 3]))
    out = best_portfolio(weighted_power_family(2), market, model)
    np.testing.assert_allclose(out.allocation, market.prices, atol=1e-5)
    np.testing.assert_allclose(out.units, 1, atol=1e-4)
    np.testing.assert_allclose(out.units * market.prices, out.allocation, rtol=0, atol=1e-12)
    assert out.allocation.sum() == pytest.approx(1, abs=1e-12)


def test_trivial_family_with_power_rule_buys_the_market():
    model = binomial_squares_model()
    market = price_assets(power_rule(2), model, history_from_counts([5, 2, 3]))
    out = best_portfolio(trivial_family(power_rule(2)), market, model)
    np.testing.assert_allclose(out.allocation, market.prices, atol=1e-5)


def test_mispriced_market_moves_the_allocation():
    model = binomial_squares_model()
    market = price_assets(power_rule(2), model, history_from_counts([5, 2, 3]))
    out = best_portfolio(weighted_power_family(2), market, model)
    assert np.max(np.abs(out.allocation - market.prices)) > 1e-3


def test_model_mismatch_warns():
    market = price_assets(log_rule(), softmax_model(3), history_from_counts([3, 3, 4]))
    with pytest.warns(ConfigWarning):
        best_portfolio(weighted_power_family(2), market, binomial_squares_model())
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        best_portfolio(weighted_power_family(2), market, softmax_model(3))


def test_payoff_units_examples():
    assert payoff_units([0.3, 0.7], [0.3, 0.7], 2) == pytest.approx(1)
    assert payoff_units([0.6, 0.4], [0.5, 0.5], 1) == pytest.approx(1.2)
    assert payoff_units([0.6, 0.4], [0.5, 0.5], 2) == pytest.approx(0.8)
    for y in (0, 3, 1.5, True):
        with pytest.raises(DomainError):
            payoff_units([0.6, 0.4], [0.5, 0.5], y)


def test_unit_portfolio_expected_payoff_is_one(rng):
    q = 0.8 * rng.dirichlet(np.ones(4)) + 0.05
    r = rng.dirichlet(np.ones(4))
    expected = sum(r[y - 1] * payoff_units(q, q, y) for y in range(1, 5))
    assert expected == pytest.approx(1, abs=1e-12)


def test_parameter_grid_shapes():
    grid, step = parameter_grid(binomial_squares_model(), 10_000)
    assert grid.shape == (10_000, 1)
    grid, step = parameter_grid(softmax_model(3), 10_000)
    assert grid.shape == (10_000, 2) and step.shape == (2,)
    model = softmax_model(3)
    assert all(model.contains(t) for t in grid[[0, -1]])


def test_domination_on_binomial():
    model = binomial_squares_model()
    market = price_assets(log_rule(), model, history_from_counts([5, 2, 3]))
    rep = domination_check(weighted_power_family(2), market, model)
    assert rep.unique and rep.n_points == 10_000
    assert abs(rep.grid_argmin[0] - 0.4) <= rep.grid_step[0]


def test_simulation_zero_rounds():
    rep = simulate({**BASE_CONFIG, "rounds": 0})
    assert rep["records"] == [] and rep["cumulative_payoff"] == 0.0


def test_simulation_compatible_rounds_hold_prices():
    rep = simulate(BASE_CONFIG)
    assert len(rep["records"]) == 3
    assert all(r["allocation_equals_prices"] for r in rep["records"])
    assert rep["cumulative_payoff"] == pytest.approx(3, abs=1e-6)


def test_simulation_control_and_determinism():
    cfg = {**BASE_CONFIG, "control_rule": {"type": "power", "beta": 2}}
    a, b = simulate(cfg), simulate(cfg)
    assert a == b
    assert not any(r["allocation_equals_prices"] for r in a["control"])
    assert [r["outcome"] for r in a["records"]] == [r["outcome"] for r in a["control"]]
    assert simulate(cfg, seed=99)["seed"] == 99


def test_simulation_with_truth_draws():
    cfg = {**BASE_CONFIG, "model": {"name": "softmax", "m": 3},
           "history": {"truth": [0.2, 0.3, 0.5], "n": 30, "seed": 4}, "rounds": 2}
    rep = simulate(cfg)
    assert rep["initial_history_size"] == 30
    assert all(r["allocation_equals_prices"] for r in rep["records"])


@pytest.mark.parametrize(
    "patch",
    [
        {"rounds": -1},
        {"rounds": 1.5},
        {"seed": "x"},
        {"history": [1, 2]},
        {"history": [0, 0, 0]},
        {"history": {"truth": [0.5, 0.5], "n": 3}},
        {"history": {"truth": [0.2, 0.3, 0.5], "n": 0}},
        {"history": {"truth": [0.2, 0.3, 0.5], "n": 3, "extra": 1}},
        {"history": "5,2,3"},
        {"model": {"name": "softmax"}},
        {"rule": {"type": "power", "beta": 0.5}},
        {"extra": True},
    ],
)
def test_simulation_config_errors(patch):
    with pytest.raises(ConfigError):
        simulate({**BASE_CONFIG, **patch})


def test_simulation_missing_fields():
    cfg = dict(BASE_CONFIG)
    del cfg["family"]
    with pytest.raises(ConfigError):
        simulate(cfg)
