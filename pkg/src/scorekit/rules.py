"""Unweighted proper scoring rules over a finite outcome space.

A rule is represented by its score vector ``v(p)`` with ``v_j(p) = s(p, e_j)``,
so ``s(p, r) = <v(p), r>`` is linear in ``r`` by construction.  For a proper
rule ``v(p)`` is also the gradient of the optimal expected score ``S`` extended
1-homogeneously to the positive cone, which is what the baseline optimizer
and the Hessian utilities rely on.

Scores that are unbounded below (a zero probability assigned to an observed
outcome) are reported as :data:`NEG_INF` and never as NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import CurvedFunction, scaled_power, xlogx
from .errors import ConfigError, DomainError, NumericError
from .simplex import (
    INTERIOR_THRESHOLD,
    Distribution,
    as_vector,
    ensure_interior,
    tangent_basis,
    tangent_project,
)

NEG_INF = -math.inf


def is_rejected(value: float) -> bool:
    """True for the unbounded-below sentinel (and any other non-finite score)."""
    return not math.isfinite(value)


def normalize_point(x) -> np.ndarray:
    """Map a point of the positive cone back onto the simplex."""
    x = as_vector(x)
    if x.ndim != 1:
        raise DomainError("expected a vector")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise DomainError(f"{x.tolist()} is not in the positive cone")
    total = x.sum()
    if total <= 0:
        raise DomainError("zero vector has no direction on the simplex")
    return x / total


def _combine(vec: np.ndarray, r: np.ndarray) -> float:
    mask = r != 0
    with np.errstate(invalid="ignore", over="ignore"):
        terms = r[mask] * vec[mask]
    if not np.all(np.isfinite(terms)):
        return NEG_INF
    return float(terms.sum())


class ScoringRule:
    """A proper scoring rule s(p, r) with its optimal expected score S.

    Subclasses implement :meth:`score_vector` and :meth:`_raw_grad`; the latter
    is the ordinary gradient of ``p -> <v(p), r>`` before tangent projection.
    """

    name = "rule"
    #: outcome count, for rules tied to one (members of weighted families)
    m: int | None = None
    #: whether p may touch the simplex boundary and still score finitely
    boundary_p = False

    def score_vector(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _raw_grad(self, p: np.ndarray, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_m(self, size: int):
        if self.m is not None and size != self.m:
            raise DomainError(f"{self.name} is defined for m={self.m}, got a vector of length {size}")

    def score(self, p, r) -> float:
        p = normalize_point(p)
        r = as_vector(r)
        if r.shape != p.shape:
            raise DomainError(f"p and r have different lengths ({p.size} vs {r.size})")
        self._check_m(p.size)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vec = self.score_vector(p)
        return _combine(vec, r)

    def scores(self, p) -> np.ndarray:
        """Scores against every point mass, ``(s(p, e_1), ..., s(p, e_m))``."""
        p = normalize_point(p)
        self._check_m(p.size)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vec = np.asarray(self.score_vector(p), dtype=float)
        return np.where(np.isfinite(vec), vec, NEG_INF)

    def expected(self, x) -> float:
        """Optimal expected score on the cone, S(x) = |x| s(x/|x|, x/|x|)."""
        x = as_vector(x)
        lam = x.sum()
        p = normalize_point(x)
        return lam * self.score(p, p)

    def grad_p(self, p, r) -> np.ndarray:
        p = ensure_interior(normalize_point(p), "forecast")
        r = as_vector(r)
        self._check_m(p.size)
        if r.shape != p.shape:
            raise DomainError(f"p and r have different lengths ({p.size} vs {r.size})")
        return tangent_project(self._raw_grad(p, r))

    def grad_expected(self, p) -> np.ndarray:
        """Gradient of the homogeneous extension of S at a simplex point."""
        p = ensure_interior(normalize_point(p), "point")
        self._check_m(p.size)
        return np.asarray(self.score_vector(p), dtype=float)

    def to_spec(self) -> dict:
        raise ConfigError(f"{self.name} has no configuration form")

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class SavageRule(ScoringRule):
    """Rule generated from a convex S on the simplex: s(p,r) = S(p) + <grad S(p), r - p>."""

    def _S(self, p):
        raise NotImplementedError

    def _dS(self, p):
        raise NotImplementedError

    def _hess(self, p):
        raise NotImplementedError

    def score_vector(self, p):
        d = self._dS(p)
        return self._S(p) + d - d @ p

    def _raw_grad(self, p, r):
        return self._hess(p) @ (r - p)


class LogRule(ScoringRule):
    name = "log"
    boundary_p = False

    def score_vector(self, p):
        return np.log(p)

    def _raw_grad(self, p, r):
        return r / p

    def to_spec(self):
        return {"type": "log"}


class BrierRule(ScoringRule):
    """s(p, e_j) = -sum_i (p_i - [i = j])^2."""

    name = "brier"
    boundary_p = True

    def score_vector(self, p):
        return 2 * p - p @ p - 1

    def _raw_grad(self, p, r):
        return 2 * (r - p)

    def to_spec(self):
        return {"type": "brier"}


class BregmanRule(SavageRule):
    """s(p, r) = sum_i gt(p_i) + gt'(p_i) (r_i - p_i) for a strictly convex gt."""

    def __init__(self, gt: CurvedFunction, name: str | None = None, spec: dict | None = None):
        self.gt = gt
        self.name = name or f"bregman[{gt!r}]"
        self._spec = spec or {"type": "bregman", "g": gt.to_spec()}
        self.boundary_p = bool(np.isfinite(gt.d1(0.0)) and np.isfinite(gt.value(0.0)))

    def _S(self, p):
        return float(np.sum(self.gt.value(p)))

    def _dS(self, p):
        return self.gt.d1(p)

    def _hess(self, p):
        return np.diag(self.gt.d2(p))

    def score_vector(self, p):
        # literal form: sum_i gt(p_i) + gt'(p_i)([i=j] - p_i)
        d = self.gt.d1(p)
        return np.sum(self.gt.value(p)) - d @ p + d

    def _raw_grad(self, p, r):
        return self.gt.d2(p) * (r - p)

    def to_spec(self):
        return dict(self._spec)


class RebasedRule(ScoringRule):
    """s(p, r) - s(q, r): the equivalent rule whose baseline is q."""

    def __init__(self, base: ScoringRule, q):
        q = ensure_interior(normalize_point(q), "baseline")
        base._check_m(q.size)
        self.base = base
        self.q = q
        self.m = q.size
        self.boundary_p = base.boundary_p
        self.name = f"rebase({base.name})"
        with np.errstate(divide="ignore", invalid="ignore"):
            self._offset = np.asarray(base.score_vector(q), dtype=float)

    def score_vector(self, p):
        return self.base.score_vector(p) - self._offset

    def _raw_grad(self, p, r):
        return self.base._raw_grad(p, r)

    def to_spec(self):
        return {"type": "rebase", "rule": self.base.to_spec(), "baseline": self.q.tolist()}


def log_rule() -> LogRule:
    return LogRule()


def brier_rule() -> BrierRule:
    return BrierRule()


def bregman_rule(gt: CurvedFunction) -> BregmanRule:
    if not gt.is_strictly_convex():
        raise ConfigError(f"Bregman generator {gt!r} is not strictly convex")
    return BregmanRule(gt)


def power_rule(beta: float) -> BregmanRule:
    """Unweighted power rule, the Bregman rule of x**beta / (beta (beta - 1))."""
    beta = float(beta)
    if not beta > 1:
        raise ConfigError(f"power rule needs beta > 1, got {beta}")
    return BregmanRule(
        scaled_power(beta, beta * (beta - 1)),
        name=f"power({beta:g})",
        spec={"type": "power", "beta": beta},
    )


def entropy_rule() -> BregmanRule:
    """Bregman rule of x log x, which coincides with the log rule on the simplex."""
    return bregman_rule(xlogx())


def eval_expected(rule: ScoringRule, p) -> float:
    """S(p) = s(p, p); raises if p lies where the rule is unbounded."""
    p = as_vector(p)
    value = rule.score(p, p)
    if is_rejected(value):
        raise DomainError(f"{rule.name} has no finite expected score at {p.tolist()}")
    return value


def grad_p(rule: ScoringRule, p, r) -> np.ndarray:
    return rule.grad_p(p, r)


def entropy(rule: ScoringRule, p) -> float:
    """Generalized entropy, the negated optimal expected score."""
    return -eval_expected(rule, p)


def rebase(rule: ScoringRule, q) -> RebasedRule:
    return RebasedRule(rule, q)


# --- baseline -----------------------------------------------------------------


def _mirror_descent(rule, p, max_iter, tol):
    """Entropic mirror descent on S with backtracking.  Returns (p, tangent grad norm)."""
    S = rule.expected(p)
    g = rule.grad_expected(p)
    eta = 1.0
    for _ in range(max_iter):
        gt = tangent_project(g)
        gnorm = np.linalg.norm(gt)
        if gnorm <= tol:
            break
        noise = 64 * np.finfo(float).eps * max(1.0, abs(S))
        while True:
            z = -eta * gt
            y = p * np.exp(z - z.max())
            pn = y / y.sum()
            Sn = rule.expected(pn) if np.min(pn) >= INTERIOR_THRESHOLD else math.inf
            if math.isfinite(Sn):
                decrease = gt @ (p - pn)
                if Sn <= S - 1e-4 * decrease:
                    break
                if Sn <= S + noise:
                    gn = rule.grad_expected(pn)
                    if np.linalg.norm(tangent_project(gn)) < gnorm:
                        break
            eta *= 0.5
            if eta < 1e-16:
                return p, gnorm
        p, S = pn, Sn
        g = rule.grad_expected(p)
        eta *= 2.0
    return p, np.linalg.norm(tangent_project(g))


def _restricted_hessian_of_grad(grad, p, basis, h=1e-6):
    k = basis.shape[1]
    H = np.empty((k, k))
    for j in range(k):
        d = basis[:, j] * h
        H[:, j] = basis.T @ (grad(p + d) - grad(p - d)) / (2 * h)
    return 0.5 * (H + H.T)


def _newton_polish(rule, p, tol, max_iter=50):
    basis = tangent_basis(p.size)
    for _ in range(max_iter):
        g = basis.T @ rule.grad_expected(p)
        if np.linalg.norm(g) <= tol:
            break
        H = _restricted_hessian_of_grad(rule.grad_expected, p, basis)
        try:
            d = basis @ np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        S = rule.expected(p)
        while t > 1e-12:
            pn = p + t * d
            if np.min(pn) >= INTERIOR_THRESHOLD:
                pn = pn / pn.sum()
                Sn = rule.expected(pn)
                if math.isfinite(Sn) and Sn <= S + 64 * np.finfo(float).eps * max(1.0, abs(S)):
                    break
            t *= 0.5
        else:
            break
        p = pn
    return p, np.linalg.norm(basis.T @ rule.grad_expected(p))


def baseline(
    rule: ScoringRule,
    m: int | None = None,
    *,
    seed: int = 0,
    restarts: int = 3,
    max_iter: int = 500,
    tol: float = 1e-10,
) -> Distribution:
    """The interior minimizer of the optimal expected score (maximum entropy point)."""
    if m is None:
        m = rule.m
    if m is None:
        raise DomainError(f"{rule.name} is not tied to an outcome count; pass m")
    rule._check_m(m)
    rng = np.random.default_rng(seed)
    found = []
    for _ in range(restarts):
        p0 = 0.5 * rng.dirichlet(np.ones(m)) + 0.5 / m
        # mirror descent gets close cheaply, Newton finishes quadratically
        p, gnorm = _mirror_descent(rule, p0, min(max_iter, 50), max(tol, 1e-4))
        if gnorm > tol:
            p, gnorm = _newton_polish(rule, p, tol)
        if np.min(p) < 1e3 * INTERIOR_THRESHOLD:
            raise DomainError(f"{rule.name}: entropy maximizer is on the boundary")
        if gnorm > 1e-8:
            raise NumericError(f"{rule.name}: baseline search stalled at gradient norm {gnorm:.3g}")
        found.append((rule.expected(p), p))
    best = min(found, key=lambda item: item[0])[1]
    spread = max(np.max(np.abs(p - best)) for _, p in found)
    if spread > 1e-6:
        raise NumericError(f"{rule.name}: restarts disagree by {spread:.3g}; S not strictly convex?")
    return Distribution(best)


# --- equivalence ----------------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceWitness:
    """s1(p, r) = a (s2(p, r) + <b, r>) on the probe set."""

    a: float
    b: np.ndarray
    residual: float


def equivalence_fit(
    rule1: ScoringRule,
    rule2: ScoringRule,
    m: int | None = None,
    *,
    n_probe: int = 20,
    seed: int = 0,
    tol: float = 1e-8,
) -> EquivalenceWitness | None:
    """Fit the linear relation between two rules; None if they are not equivalent."""
    if m is None:
        m = rule1.m if rule1.m is not None else rule2.m
    if m is None:
        raise DomainError("neither rule fixes the outcome count; pass m")
    rng = np.random.default_rng(seed)
    probes = 0.8 * rng.dirichlet(np.ones(m), size=n_probe) + 0.2 / m
    X = np.array([rule2.scores(p) for p in probes])
    Y = np.array([rule1.scores(p) for p in probes])
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        return None
    Xc = X - X.mean(axis=0)
    Yc = Y - Y.mean(axis=0)
    denom = np.sum(Xc * Xc)
    if denom <= 0:
        return None
    a = float(np.sum(Xc * Yc) / denom)
    if a <= 0:
        return None
    c = Y.mean(axis=0) - a * X.mean(axis=0)
    residual = float(np.max(np.abs(Y - a * X - c)))
    if residual > tol:
        return None
    return EquivalenceWitness(a=a, b=c / a, residual=residual)
