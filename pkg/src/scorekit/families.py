"""Weighted scoring families: baseline-indexed collections of proper rules.

Every family maps an interior baseline ``q`` to a strictly proper rule whose
generalized entropy is maximized at ``q``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .curves import CurvedFunction, affine_power, identity, power
from .errors import ConfigError
from .rules import RebasedRule, SavageRule, ScoringRule, normalize_point
from .simplex import ensure_interior


class WeightedFamily:
    def __init__(self, name: str, spec: dict, build: Callable[[np.ndarray], ScoringRule]):
        self.name = name
        self.spec = spec
        self._build = build

    def member(self, q) -> ScoringRule:
        q = ensure_interior(normalize_point(q), "baseline")
        return self._build(q)

    def to_spec(self) -> dict:
        return dict(self.spec)

    def __repr__(self):
        return f"<WeightedFamily {self.name}>"


def _check_beta(beta) -> float:
    beta = float(beta)
    if not beta > 1:
        raise ConfigError(f"weighted families need beta > 1, got {beta}")
    return beta


class WeightedPowerMember(ScoringRule):
    """(1 - sum p^b q^(1-b)) / b - (1 - sum r p^(b-1) q^(1-b)) / (b - 1)."""

    boundary_p = True

    def __init__(self, beta: float, q: np.ndarray):
        self.beta = beta
        self.q = q
        self.m = q.size
        self.name = f"weighted_power({beta:g})"
        self._w = q ** (1 - beta)

    def score_vector(self, p):
        b = self.beta
        spread = np.sum(p**b * self._w)
        return (1 - spread) / b - (1 - p ** (b - 1) * self._w) / (b - 1)

    def _raw_grad(self, p, r):
        b = self.beta
        return -r.sum() * p ** (b - 1) * self._w + r * p ** (b - 2) * self._w


class PseudosphericalMember(ScoringRule):
    """((p_j/q_j)^(b-1) / (sum p^b q^(1-b))^((b-1)/b) - 1) / (b - 1) against outcome j."""

    boundary_p = True

    def __init__(self, beta: float, q: np.ndarray):
        self.beta = beta
        self.q = q
        self.m = q.size
        self.name = f"weighted_pseudospherical({beta:g})"
        self._w = q ** (1 - beta)

    def score_vector(self, p):
        b = self.beta
        norm = np.sum(p**b * self._w)
        return ((p / self.q) ** (b - 1) * norm ** (-(b - 1) / b) - 1) / (b - 1)

    def _raw_grad(self, p, r):
        b = self.beta
        k = (b - 1) / b
        norm = np.sum(p**b * self._w)
        lead = np.sum(r * (p / self.q) ** (b - 1))
        d_lead = r * (b - 1) * p ** (b - 2) * self._w
        d_norm = b * p ** (b - 1) * self._w
        return (d_lead * norm**-k - k * lead * norm ** (-k - 1) * d_norm) / (b - 1)


class QuasiBregmanMember(SavageRule):
    """Member generated by S(p|q) = h(sum f(q_i) g(p_i/q_i)) - c sum p_i f(q_i)/q_i.

    ``c = g'(1) h'(g(1) sum f(q_j))`` places the baseline at q; with
    ``normalize=False`` the linear term is dropped, which changes the rule only
    by a term linear in r.
    """

    def __init__(self, f, g, h, q, normalize=True, name="quasi_bregman"):
        self.f, self.g, self.h = f, g, h
        self.q = q
        self.m = q.size
        self.name = name
        self.normalize = normalize
        self._fq = f.value(q)
        self._ratio = self._fq / q
        if normalize:
            self._c = float(g.d1(1.0) * h.d1(g.value(1.0) * self._fq.sum()))
        else:
            self._c = 0.0
        self.boundary_p = bool(np.isfinite(g.value(0.0)) and np.isfinite(g.d1(0.0)))

    def _inner(self, p):
        return float(np.sum(self._fq * self.g.value(p / self.q)))

    def _S(self, p):
        return float(self.h.value(self._inner(p))) - self._c * float(self._ratio @ p)

    def _dS(self, p):
        x = p / self.q
        return self.h.d1(self._inner(p)) * self._ratio * self.g.d1(x) - self._c * self._ratio

    def _hess(self, p):
        x = p / self.q
        a = self._inner(p)
        u = self._ratio * self.g.d1(x)
        return self.h.d2(a) * np.outer(u, u) + self.h.d1(a) * np.diag(
            self._fq / self.q**2 * self.g.d2(x)
        )


def weighted_power_family(beta: float) -> WeightedFamily:
    beta = _check_beta(beta)
    return WeightedFamily(
        f"weighted_power({beta:g})",
        {"type": "weighted_power", "beta": beta},
        lambda q: WeightedPowerMember(beta, q),
    )


def weighted_pseudospherical_family(beta: float) -> WeightedFamily:
    beta = _check_beta(beta)
    return WeightedFamily(
        f"weighted_pseudospherical({beta:g})",
        {"type": "weighted_pseudospherical", "beta": beta},
        lambda q: PseudosphericalMember(beta, q),
    )


def _check_fgh(f: CurvedFunction, g: CurvedFunction, h: CurvedFunction | None):
    if not f.is_positive_on_unit():
        raise ConfigError(f"weight {f!r} is not positive on (0, 1)")
    if not g.is_strictly_convex():
        raise ConfigError(f"{g!r} is not strictly convex")
    if h is not None and not h.is_strictly_increasing():
        raise ConfigError(f"{h!r} is not strictly increasing")


def quasi_bregman_family(
    f: CurvedFunction, g: CurvedFunction, h: CurvedFunction, *, normalize: bool = True
) -> WeightedFamily:
    _check_fgh(f, g, h)
    name = f"quasi_bregman[f={f!r}, g={g!r}, h={h!r}]"
    spec = {"type": "quasi_bregman", "f": f.to_spec(), "g": g.to_spec(), "h": h.to_spec()}
    if not normalize:
        spec["normalize"] = False
    return WeightedFamily(name, spec, lambda q: QuasiBregmanMember(f, g, h, q, normalize, name))


def bregman_weighted_family(
    f: CurvedFunction, g: CurvedFunction, *, normalize: bool = True
) -> WeightedFamily:
    """The h = identity case: sum f(q_i) {g(p_i/q_i) + g'(p_i/q_i)(r_i - p_i)/q_i}.

    With ``normalize=True`` (default) the term ``-g'(1) sum r_i f(q_i)/q_i`` is
    added so that q is the member's baseline for every weight f.
    """
    _check_fgh(f, g, None)
    h = identity()
    name = f"bregman[f={f!r}, g={g!r}]"
    spec = {"type": "bregman", "f": f.to_spec(), "g": g.to_spec()}
    if not normalize:
        spec["normalize"] = False
    return WeightedFamily(name, spec, lambda q: QuasiBregmanMember(f, g, h, q, normalize, name))


def trivial_family(rule: ScoringRule) -> WeightedFamily:
    """Members s(p, r) - s(q, r), each equivalent to ``rule``."""
    return WeightedFamily(
        f"trivial({rule.name})",
        {"type": "trivial", "rule": rule.to_spec()},
        lambda q: RebasedRule(rule, q),
    )


def power_h(beta: float) -> CurvedFunction:
    """h(x) = (x - 1) / (beta (beta - 1)), turning g = x**beta into the weighted power family."""
    return affine_power(1.0, beta * (beta - 1))


def pseudospherical_h(beta: float) -> CurvedFunction:
    """h(x) = (x**(1/beta) - 1) / (beta (beta - 1)), the pseudospherical counterpart."""
    return affine_power(1.0 / beta, beta * (beta - 1))


def quasi_bregman_power(beta: float) -> WeightedFamily:
    return quasi_bregman_family(identity(), power(beta), power_h(beta))


def quasi_bregman_pseudospherical(beta: float) -> WeightedFamily:
    return quasi_bregman_family(identity(), power(beta), pseudospherical_h(beta))
