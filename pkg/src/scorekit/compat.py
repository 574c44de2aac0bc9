"""Numerical checks of the compatibility relation between a family and a rule.

A family is compatible with a rule when, at every interior baseline q, the
member's p-gradient at p = q is a positive multiple of the rule's p-gradient
at q, with a multiplier a(q) that does not depend on the outcome distribution.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .curves import CurvedFunction, identity, power, scaled_power
from .errors import ConfigError, DomainError, NumericError
from .families import WeightedFamily
from .rules import ScoringRule, normalize_point
from .simplex import ensure_interior, tangent_basis

DEFAULT_TOL = 1e-8
FD_TOL = 1e-5
MIN_PROBE_GAP = 1e-3


@dataclass
class CompatReport:
    parallel_deviation: float
    factor_estimates: list[list[float]]
    factor_spread: float
    a_of_q: list[float]
    degenerate_dimension: bool
    verdict: str
    tol: float
    qs: list[list[float]] = field(default_factory=list)
    rs: list[list[float]] = field(default_factory=list)
    # <v,w>/<v,v> per (q, r); NaN where the probe was skipped
    ratios: list[list[float]] = field(default_factory=list)

    @property
    def compatible(self) -> bool:
        return self.verdict == "compatible"

    def to_dict(self) -> dict:
        return asdict(self)


def gradient_pair(family: WeightedFamily, rule: ScoringRule, q, r):
    """(v, w): member gradient and rule gradient, both at p = q against r."""
    q = ensure_interior(normalize_point(q), "baseline")
    r = ensure_interior(normalize_point(r), "outcome distribution")
    v = family.member(q).grad_p(q, r)
    w = rule.grad_p(q, r)
    return v, w


def parallel_deviation(v, w) -> float:
    """1 - cos^2 of the angle between v and w."""
    vv, ww = float(v @ v), float(w @ w)
    if vv == 0.0 or ww == 0.0:
        raise NumericError("zero gradient: parallelism undefined")
    return max(0.0, 1.0 - float(v @ w) ** 2 / (vv * ww))


def check_compatibility(
    family: WeightedFamily,
    rule: ScoringRule,
    qs,
    rs,
    tol: float = DEFAULT_TOL,
) -> CompatReport:
    qs = [ensure_interior(normalize_point(q), "baseline") for q in qs]
    rs = [ensure_interior(normalize_point(r), "outcome distribution") for r in rs]
    if not qs or not rs:
        raise DomainError("need at least one baseline and one outcome distribution")
    m = qs[0].size
    if m < 2 or any(x.size != m for x in qs + rs):
        raise DomainError("all probes must share one outcome count >= 2")

    deviation = 0.0
    estimates, ratios, a_of_q = [], [], []
    spread = 0.0
    all_positive = True
    for q in qs:
        member = family.member(q)
        row_est, row_ratio = [], []
        for r in rs:
            if np.max(np.abs(r - q)) < MIN_PROBE_GAP:
                # both gradients vanish at r = q
                row_est.append(float("nan"))
                row_ratio.append(float("nan"))
                continue
            v = member.grad_p(q, r)
            w = rule.grad_p(q, r)
            deviation = max(deviation, parallel_deviation(v, w))
            vw = float(v @ w)
            row_est.append(float(np.sign(vw) * np.linalg.norm(w) / np.linalg.norm(v)))
            row_ratio.append(vw / float(v @ v))
        valid = [x for x in row_ratio if np.isfinite(x)]
        if not valid:
            raise DomainError(f"every outcome probe coincides with baseline {q.tolist()}")
        a = float(np.median(valid))
        a_of_q.append(a)
        if min(valid) <= 0:
            all_positive = False
        if a > 0:
            spread = max(spread, max(abs(x - a) for x in valid) / a)
        else:
            spread = float("inf")
        estimates.append(row_est)
        ratios.append(row_ratio)

    degenerate = m == 2
    if degenerate:
        verdict = "degenerate"
    elif deviation <= tol and all_positive and spread <= tol:
        verdict = "compatible"
    else:
        verdict = "incompatible"
    return CompatReport(
        parallel_deviation=deviation,
        factor_estimates=estimates,
        factor_spread=spread,
        a_of_q=a_of_q,
        degenerate_dimension=degenerate,
        verdict=verdict,
        tol=tol,
        qs=[q.tolist() for q in qs],
        rs=[r.tolist() for r in rs],
        ratios=ratios,
    )


def first_order_factor(g: CurvedFunction, h: CurvedFunction) -> float:
    """h'(g(1)) g'(1), a first-order guess at the log-rule factor of f(x) = x quasi-Bregman families.

    It matches the realized factor only when g''(1) g'(1) h'(g(1))**2 = 1;
    ``quasi_bregman_factor`` gives the realized value.
    """
    a = float(h.d1(g.value(1.0)) * g.d1(1.0))
    if not a > 0:
        raise ConfigError(f"factor h'(g(1)) g'(1) = {a} is not positive")
    return a


def quasi_bregman_factor(g: CurvedFunction, h: CurvedFunction) -> float:
    """The multiplier a(q) actually realized by a quasi-Bregman family with f(x) = x.

    At p = q the member gradient is h'(g(1)) g''(1) times the log rule's, so
    a = 1 / (h'(g(1)) g''(1)) for every q.
    """
    scale = float(h.d1(g.value(1.0)) * g.d2(1.0))
    if not scale > 0:
        raise ConfigError(f"h'(g(1)) g''(1) = {scale} is not positive")
    return 1.0 / scale


def compatible_bregman_weight(gt: CurvedFunction) -> CurvedFunction:
    """The weight x**2 gt''(x) making weighted Bregman families compatible with gt's rule."""
    name, params = gt.name, gt.params
    if name in ("power", "scaled_power", "affine_power"):
        k = params[0]
        if name == "power":
            c = 1.0
        elif name == "scaled_power":
            c = params[1]
        else:
            c = params[1] if len(params) == 2 else k * (k - 1)
        coef = k * (k - 1) / c
        f = power(k) if coef == 1.0 else scaled_power(k, 1.0 / coef)
    elif name == "xlogx":
        f = identity()
    elif name == "neglog":
        f = power(0.0)
    else:
        raise ConfigError(f"{gt!r} has no positive second derivative")
    if not f.is_positive_on_unit():
        raise ConfigError(f"x^2 g''(x) for {gt!r} is not positive on (0, 1)")
    return f


def hessian_restricted(rule: ScoringRule, q, step: float = 1e-5) -> np.ndarray:
    """Hessian of S along an orthonormal basis of the tangent space at q.

    Central differences of the analytic gradient of S (the rule's score vector).
    """
    q = ensure_interior(normalize_point(q), "point")
    basis = tangent_basis(q.size)
    k = basis.shape[1]
    H = np.empty((k, k))
    for j in range(k):
        d = basis[:, j] * step
        H[:, j] = basis.T @ (rule.grad_expected(q + d) - rule.grad_expected(q - d)) / (2 * step)
    if not np.all(np.isfinite(H)):
        raise NumericError(f"non-finite Hessian of {rule.name} at {q.tolist()}")
    return H
