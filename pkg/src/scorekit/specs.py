"""Strict parsing of JSON-style rule, family and model specifications.

Unknown fields are rejected so that a typo never silently falls back to a default.
"""

from __future__ import annotations

from .curves import curve_from_spec
from .errors import ConfigError, DomainError
from .families import (
    WeightedFamily,
    bregman_weighted_family,
    quasi_bregman_family,
    trivial_family,
    weighted_power_family,
    weighted_pseudospherical_family,
)
from .rules import ScoringRule, bregman_rule, brier_rule, log_rule, power_rule, rebase
from .simplex import ParametricModel, model_by_name


def _fields(spec, kind: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError(f"{kind} spec must be an object, got {spec!r}")
    unknown = set(spec) - required - optional
    if unknown:
        raise ConfigError(f"unknown {kind} fields {sorted(unknown)}")
    missing = required - set(spec)
    if missing:
        raise ConfigError(f"{kind} spec is missing {sorted(missing)}")
    return spec


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{what} must be a number, got {value!r}")
    return float(value)


def _vector(value, what: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{what} must be a nonempty list of numbers")
    return [_number(x, what) for x in value]


def rule_from_spec(spec) -> ScoringRule:
    kind = _fields(spec, "rule", {"type"}, {"beta", "g", "rule", "baseline"}).get("type")
    if kind == "log":
        _fields(spec, "rule", {"type"})
        return log_rule()
    if kind == "brier":
        _fields(spec, "rule", {"type"})
        return brier_rule()
    if kind == "power":
        _fields(spec, "rule", {"type", "beta"})
        return power_rule(_number(spec["beta"], "beta"))
    if kind == "bregman":
        _fields(spec, "rule", {"type", "g"})
        return bregman_rule(curve_from_spec(spec["g"]))
    if kind == "rebase":
        _fields(spec, "rule", {"type", "rule", "baseline"})
        try:
            return rebase(rule_from_spec(spec["rule"]), _vector(spec["baseline"], "baseline"))
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown rule type {kind!r}")


def family_from_spec(spec) -> WeightedFamily:
    optional = {"beta", "f", "g", "h", "rule", "normalize"}
    kind = _fields(spec, "family", {"type"}, optional).get("type")
    if kind in ("weighted_power", "weighted_pseudospherical"):
        _fields(spec, "family", {"type", "beta"})
        beta = _number(spec["beta"], "beta")
        if kind == "weighted_power":
            return weighted_power_family(beta)
        return weighted_pseudospherical_family(beta)
    if kind in ("quasi_bregman", "bregman"):
        required = {"type", "f", "g", "h"} if kind == "quasi_bregman" else {"type", "f", "g"}
        _fields(spec, "family", required, {"normalize"})
        normalize = spec.get("normalize", True)
        if not isinstance(normalize, bool):
            raise ConfigError("normalize must be true or false")
        f, g = curve_from_spec(spec["f"]), curve_from_spec(spec["g"])
        if kind == "bregman":
            return bregman_weighted_family(f, g, normalize=normalize)
        return quasi_bregman_family(f, g, curve_from_spec(spec["h"]), normalize=normalize)
    if kind == "trivial":
        _fields(spec, "family", {"type", "rule"})
        return trivial_family(rule_from_spec(spec["rule"]))
    raise ConfigError(f"unknown family type {kind!r}")


def model_from_spec(spec) -> ParametricModel:
    """``{"name": "softmax", "m": 3}`` or ``{"name": "binomial_squares"}``."""
    _fields(spec, "model", {"name"}, {"m"})
    m = spec.get("m")
    if m is not None and (isinstance(m, bool) or not isinstance(m, int)):
        raise ConfigError(f"model m must be an integer, got {m!r}")
    try:
        return model_by_name(spec["name"], m)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
