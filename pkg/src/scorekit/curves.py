"""Closed registry of scalar functions with exact first and second derivatives.

These are the building blocks f, g, h of the weighted families and the
convex generator of unweighted Bregman rules.  The registry is closed on
purpose: compatibility factors need derivatives to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError

_Triple = tuple[Callable, Callable, Callable]


def _power(alpha):
    return (
        lambda x: x**alpha,
        lambda x: alpha * x ** (alpha - 1),
        lambda x: alpha * (alpha - 1) * x ** (alpha - 2),
    )


def _scaled_power(beta, c):
    v, d1, d2 = _power(beta)
    return (lambda x: v(x) / c, lambda x: d1(x) / c, lambda x: d2(x) / c)


def _affine_power(k, c=None):
    if c is None:
        c = k * (k - 1)
    v, d1, d2 = _power(k)
    return (lambda x: (v(x) - 1) / c, lambda x: d1(x) / c, lambda x: d2(x) / c)


def _xlogx():
    return (lambda x: x * np.log(x), lambda x: 1 + np.log(x), lambda x: 1 / x)


def _neglog():
    return (lambda x: -np.log(x), lambda x: -1 / x, lambda x: 1 / x**2)


def _identity():
    return (lambda x: x, lambda x: np.ones_like(x), lambda x: np.zeros_like(x))


# name -> (builder, allowed parameter counts)
REGISTRY: dict[str, tuple[Callable[..., _Triple], tuple[int, ...]]] = {
    "power": (_power, (1,)),
    "scaled_power": (_scaled_power, (2,)),
    "affine_power": (_affine_power, (1, 2)),
    "xlogx": (_xlogx, (0,)),
    "neglog": (_neglog, (0,)),
    "identity": (_identity, (0,)),
}

_PROBE = np.logspace(-2, 2, 401)


@dataclass(frozen=True)
class CurvedFunction:
    """A registry function evaluated together with its exact derivatives.

    ``affine_power`` takes either ``(k,)`` meaning ``(x**k - 1) / (k (k - 1))``
    or ``(k, c)`` meaning ``(x**k - 1) / c``.
    """

    name: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.name not in REGISTRY:
            raise ConfigError(f"unknown curve {self.name!r}; known: {sorted(REGISTRY)}")
        params = tuple(float(x) for x in self.params)
        builder, arities = REGISTRY[self.name]
        if len(params) not in arities:
            raise ConfigError(f"curve {self.name!r} takes {arities} parameters, got {len(params)}")
        if not all(np.isfinite(params)):
            raise ConfigError(f"curve {self.name!r} has non-finite parameters {params}")
        if self.name == "scaled_power" and params[1] == 0:
            raise ConfigError("scaled_power needs a nonzero divisor")
        if self.name == "affine_power":
            k = params[0]
            c = params[1] if len(params) == 2 else k * (k - 1)
            if c == 0:
                raise ConfigError("affine_power needs a nonzero divisor (k not in {0, 1})")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "_fns", builder(*params))

    def value(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._fns[0](np.asarray(x, dtype=float))

    def d1(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._fns[1](np.asarray(x, dtype=float))

    def d2(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._fns[2](np.asarray(x, dtype=float))

    def __call__(self, x):
        return self.value(x)

    def is_strictly_convex(self) -> bool:
        return bool(np.all(self.d2(_PROBE) > 0))

    def is_strictly_increasing(self) -> bool:
        return bool(np.all(self.d1(_PROBE) > 0))

    def is_positive_on_unit(self) -> bool:
        x = np.linspace(1e-3, 1.0, 400)
        return bool(np.all(self.value(x) > 0))

    def to_spec(self) -> dict:
        return {"name": self.name, "params": list(self.params)}

    def __repr__(self):
        args = ", ".join(f"{p:g}" for p in self.params)
        return f"{self.name}({args})"


def power(alpha: float) -> CurvedFunction:
    return CurvedFunction("power", (alpha,))


def scaled_power(beta: float, c: float) -> CurvedFunction:
    return CurvedFunction("scaled_power", (beta, c))


def affine_power(k: float, c: float | None = None) -> CurvedFunction:
    return CurvedFunction("affine_power", (k,) if c is None else (k, c))


def xlogx() -> CurvedFunction:
    return CurvedFunction("xlogx")


def neglog() -> CurvedFunction:
    return CurvedFunction("neglog")


def identity() -> CurvedFunction:
    return CurvedFunction("identity")


def curve_from_spec(spec) -> CurvedFunction:
    if not isinstance(spec, dict):
        raise ConfigError(f"curve spec must be an object, got {spec!r}")
    unknown = set(spec) - {"name", "params"}
    if unknown:
        raise ConfigError(f"unknown curve fields {sorted(unknown)}")
    if "name" not in spec:
        raise ConfigError("curve spec needs a 'name'")
    params = spec.get("params", [])
    if not isinstance(params, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in params
    ):
        raise ConfigError(f"curve params must be a list of numbers, got {params!r}")
    return CurvedFunction(spec["name"], tuple(params))
