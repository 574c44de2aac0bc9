"""Arrow-security market priced by an optimal score estimate.

A market maker prices m assets, one per outcome, at q = p(theta~) where theta~
is the estimate of a proper rule on the observed history.  An investor whose
risk is the negated score of the family member based at q spends the fraction
p_i(theta) of wealth on asset i and receives p_i/q_i units of it.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConfigWarning, DomainError, NumericError
from .estimation import EstimationResult, OptimizerSettings, optimize_score
from .families import WeightedFamily
from .rules import ScoringRule
from .simplex import ParametricModel, as_vector, empirical, ensure_interior
from .specs import family_from_spec, model_from_spec, rule_from_spec

ALLOCATION_TOL = 1e-5
GRID_POINTS = 10_000
NEAR_MIN = 1e-8


@dataclass
class Market:
    m: int
    prices: np.ndarray
    history: tuple[int, ...]
    r: np.ndarray
    theta: np.ndarray
    model: str
    estimate: EstimationResult | None = None


@dataclass
class PortfolioOutcome:
    allocation: np.ndarray
    units: np.ndarray
    theta: np.ndarray
    risk: float
    realized_payoff: float | None = None


def history_from_counts(counts) -> list[int]:
    """Expand per-outcome counts into a 1-based outcome sequence."""
    out = []
    for i, c in enumerate(counts, start=1):
        if isinstance(c, bool) or int(c) != c or c < 0:
            raise DomainError(f"count for outcome {i} must be a nonnegative integer, got {c!r}")
        out.extend([i] * int(c))
    return out


def price_assets(
    rule: ScoringRule,
    model: ParametricModel,
    history,
    opts: OptimizerSettings | None = None,
) -> Market:
    history = tuple(int(y) for y in history)
    if not history:
        raise DomainError("cannot price assets from an empty history")
    r = empirical(history, model.m).weights.copy()
    est = optimize_score(rule, model, r, opts)
    if est.well_behaved != "yes":
        raise NumericError(
            f"price estimate of {rule.name} on {model.name} is not well behaved "
            f"(verdict {est.well_behaved}, grad norm {est.grad_norm:.3g}, "
            f"restarts agree {est.restarts_agree}, at boundary {est.at_boundary})"
        )
    q = model.prob(est.theta_hat)
    return Market(model.m, q, history, r, est.theta_hat.copy(), model.name, est)


def best_portfolio(
    family: WeightedFamily,
    market: Market,
    model: ParametricModel,
    opts: OptimizerSettings | None = None,
) -> PortfolioOutcome:
    """Allocation p(theta) minimizing the risk -member(q).score(p(theta), r)."""
    if model.name != market.model:
        warnings.warn(
            f"investor model {model.name} differs from the pricing model {market.model}",
            ConfigWarning,
            stacklevel=2,
        )
    q = ensure_interior(market.prices, "market prices")
    member = family.member(q)
    est = optimize_score(member, model, market.r, opts)
    alloc = model.prob(est.theta_hat)
    return PortfolioOutcome(alloc, alloc / q, est.theta_hat.copy(), -est.score_at_opt)


def payoff_units(allocation, prices, y: int) -> float:
    """Units of the winning asset held: allocation_y / prices_y (y is 1-based)."""
    allocation, prices = as_vector(allocation), ensure_interior(as_vector(prices), "prices")
    if isinstance(y, bool) or not 1 <= int(y) <= prices.size or int(y) != y:
        raise DomainError(f"outcome {y!r} outside 1..{prices.size}")
    return float(allocation[int(y) - 1] / prices[int(y) - 1])


@dataclass
class DominationReport:
    grid_argmin: np.ndarray
    grid_step: np.ndarray
    n_points: int
    n_near_min: int
    max_offset: float
    unique: bool


def parameter_grid(model: ParametricModel, n: int = GRID_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """About ``n`` points on a regular grid strictly inside the parameter box."""
    per_axis = max(2, int(round(n ** (1.0 / model.dim))))
    axes, steps = [], []
    for lo, hi in zip(model.lower, model.upper):
        pts = np.linspace(lo, hi, per_axis + 2)[1:-1]
        axes.append(pts)
        steps.append(pts[1] - pts[0])
    grid = np.array(list(itertools.product(*axes)))
    return grid, np.array(steps)


def domination_check(
    family: WeightedFamily,
    market: Market,
    model: ParametricModel,
    n: int = GRID_POINTS,
    near: float = NEAR_MIN,
) -> DominationReport:
    """Grid scan of the investor's risk over Theta.

    The minimum is unique at the market estimate when every grid point whose
    risk is within ``near`` of the grid minimum lies within one grid step of it.
    """
    member = family.member(market.prices)
    grid, step = parameter_grid(model, n)
    # grid points are interior by construction, so skip per-call validation
    risk = np.array([-(member.score_vector(model._prob(t)) @ market.r) for t in grid])
    lowest = float(np.min(risk))
    close = grid[risk <= lowest + near]
    offsets = np.abs(close - market.theta) / step
    max_offset = float(np.max(offsets))
    return DominationReport(
        grid_argmin=grid[int(np.argmin(risk))],
        grid_step=step,
        n_points=len(grid),
        n_near_min=len(close),
        max_offset=max_offset,
        unique=max_offset <= 1.0,
    )


# --- multi-round simulation ---------------------------------------------------

_CONFIG_FIELDS = {"rule", "family", "model", "history", "rounds", "seed", "control_rule"}


def _parse_config(config) -> dict:
    if not isinstance(config, dict):
        raise ConfigError("simulation config must be an object")
    unknown = set(config) - _CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"unknown simulation fields {sorted(unknown)}")
    missing = {"rule", "family", "model", "history", "rounds"} - set(config)
    if missing:
        raise ConfigError(f"simulation config is missing {sorted(missing)}")
    rounds, seed = config["rounds"], config.get("seed", 0)
    for name, value in (("rounds", rounds), ("seed", seed)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise ConfigError(f"{name} must be a nonnegative integer, got {value!r}")
    parsed = {
        "rule": rule_from_spec(config["rule"]),
        "family": family_from_spec(config["family"]),
        "model": model_from_spec(config["model"]),
        "rounds": rounds,
        "seed": seed,
        "control_rule": None,
    }
    if config.get("control_rule") is not None:
        parsed["control_rule"] = rule_from_spec(config["control_rule"])
    m = parsed["model"].m
    hist = config["history"]
    truth = None
    try:
        if isinstance(hist, list):
            if len(hist) != m:
                raise ConfigError(f"history counts need {m} entries, got {len(hist)}")
            outcomes = history_from_counts(hist)
        elif isinstance(hist, dict):
            extra = set(hist) - {"truth", "n", "seed"}
            if extra or not {"truth", "n"} <= set(hist):
                raise ConfigError("history object needs exactly truth, n and optionally seed")
            truth = np.asarray(hist["truth"], dtype=float)
            if truth.shape != (m,) or np.any(truth < 0) or not math.isclose(truth.sum(), 1.0):
                raise ConfigError(f"truth must be a distribution over {m} outcomes")
            n = hist["n"]
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise ConfigError(f"history n must be a positive integer, got {n!r}")
            rng = np.random.default_rng(hist.get("seed", 0))
            outcomes = (rng.choice(m, size=n, p=truth) + 1).tolist()
        else:
            raise ConfigError("history must be a list of counts or a {truth, n, seed} object")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad history: {exc}") from exc
    if not outcomes:
        raise ConfigError("history is empty")
    parsed["history"] = outcomes
    parsed["truth"] = truth
    return parsed


def _round_record(family, rule, model, history, y, opts):
    market = price_assets(rule, model, history, opts)
    folio = best_portfolio(family, market, model, opts)
    payoff = payoff_units(folio.allocation, market.prices, y)
    return {
        "prices": market.prices.tolist(),
        "allocation": folio.allocation.tolist(),
        "outcome": y,
        "payoff": payoff,
        "risk": folio.risk,
        "allocation_equals_prices": bool(
            np.max(np.abs(folio.allocation - market.prices)) <= ALLOCATION_TOL
        ),
    }


def simulate(config, seed: int | None = None, opts: OptimizerSettings | None = None) -> dict:
    """Run the repeated pricing/investing loop described by ``config``.

    Each round reprices from the history so far, invests, draws one outcome
    (from ``truth`` when given, else from the current empirical distribution)
    and appends it.  With ``control_rule`` a second investor faces prices
    from that rule on the same outcomes.  ``seed`` overrides the config seed.
    """
    cfg = _parse_config(config)
    if seed is not None:
        cfg["seed"] = seed
    model, family = cfg["model"], cfg["family"]
    rng = np.random.default_rng(cfg["seed"])
    history = list(cfg["history"])
    truth = cfg["truth"]
    records, control = [], [] if cfg["control_rule"] is not None else None

    for _ in range(cfg["rounds"]):
        dist = truth if truth is not None else empirical(history, model.m).weights
        y = int(rng.choice(model.m, p=dist)) + 1

        records.append(_round_record(family, cfg["rule"], model, history, y, opts))
        if control is not None:
            control.append(
                _round_record(family, cfg["control_rule"], model, history, y, opts)
            )
        history.append(y)

    def total(rows):
        return float(sum(row["payoff"] for row in rows))

    return {
        "seed": cfg["seed"],
        "rounds": cfg["rounds"],
        "initial_history_size": len(cfg["history"]),
        "records": records,
        "cumulative_payoff": total(records),
        "control": control,
        "control_cumulative_payoff": None if control is None else total(control),
    }
