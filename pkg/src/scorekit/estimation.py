"""Optimal score estimation for parametric models on the simplex.

The estimate maximizes theta -> s(p(theta), r) by multistart gradient ascent
with a backtracking line search.  The theta-gradient is the model Jacobian
transposed against the rule's p-gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compat import gradient_pair, parallel_deviation
from .errors import DomainError, NumericError
from .families import WeightedFamily
from .rules import ScoringRule, is_rejected, log_rule, normalize_point
from .simplex import ParametricModel, as_vector, ensure_interior, linear_path_model

ARMIJO_C = 1e-4
SHRINK = 0.5
CURVATURE = 0.5
MAX_LINE_STEPS = 80
AGREE_TOL = 1e-6
TRANSFER_TOL = 1e-6


@dataclass(frozen=True)
class OptimizerSettings:
    max_iters: int = 500
    grad_tol: float = 1e-10
    n_starts: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1 or self.n_starts < 1:
            raise ValueError("max_iters and n_starts must be positive")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")


@dataclass
class StartResult:
    theta: np.ndarray
    score: float
    grad_norm: float
    iterations: int
    converged: bool
    at_boundary: bool


@dataclass
class EstimationResult:
    theta_hat: np.ndarray
    p_hat: np.ndarray
    score_at_opt: float
    grad_norm: float
    well_behaved: str
    restarts_agree: bool
    iterations: int
    converged: bool = True
    at_boundary: bool = False
    starts: list[StartResult] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat.tolist(),
            "p_hat": self.p_hat.tolist(),
            "score_at_opt": self.score_at_opt,
            "grad_norm": self.grad_norm,
            "well_behaved": self.well_behaved,
            "restarts_agree": self.restarts_agree,
            "iterations": self.iterations,
            "converged": self.converged,
            "at_boundary": self.at_boundary,
        }


def _objective(rule, model, r, theta) -> float:
    if not model.contains(theta):
        return -math.inf
    return rule.score(model.prob(theta), r)


def score_gradient_theta(rule: ScoringRule, model: ParametricModel, r, theta) -> np.ndarray:
    """J(theta)^T grad_p s(p(theta), r)."""
    theta = np.atleast_1d(as_vector(theta))
    r = as_vector(r)
    p = model.prob(theta)
    return model.jacobian(theta).T @ rule.grad_p(p, r)


def _clip_into(model, theta):
    width = model.upper - model.lower
    margin = np.where(np.isfinite(width), 1e-9 * width, 0.0)
    return np.clip(theta, model.lower + margin, model.upper - margin)


def _near_boundary(model, theta) -> bool:
    width = model.upper - model.lower
    gap = np.minimum(theta - model.lower, model.upper - theta)
    return bool(np.any(gap < 1e-7 * width))


def _ascend(rule, model, r, theta, opts: OptimizerSettings) -> StartResult:
    f = _objective(rule, model, r, theta)
    if is_rejected(f):
        return StartResult(theta, f, math.inf, 0, False, False)
    g = score_gradient_theta(rule, model, r, theta)
    gnorm = float(np.linalg.norm(g))
    step = 1.0
    it = 0
    for it in range(1, opts.max_iters + 1):
        if gnorm <= opts.grad_tol:
            return StartResult(theta, f, gnorm, it - 1, True, False)
        # function differences below this are rounding noise
        noise = 64 * np.finfo(float).eps * max(1.0, abs(f))
        t, lo, hi = step, 0.0, math.inf
        accepted = False
        for _ in range(MAX_LINE_STEPS):
            trial = theta + t * g
            clipped = not model.contains(trial)
            if clipped:
                trial = _clip_into(model, trial)
            ft = _objective(rule, model, r, trial)
            move = "shrink"
            if not is_rejected(ft):
                predicted = float(g @ (trial - theta))
                if ARMIJO_C * predicted > noise:
                    if ft >= f + ARMIJO_C * predicted:
                        move = "accept"
                elif ft >= f - noise:
                    # below the noise floor: bracket a root of the directional derivative
                    slope = float(score_gradient_theta(rule, model, r, trial) @ g)
                    if abs(slope) <= CURVATURE * gnorm**2:
                        move = "accept"
                    elif slope > 0:
                        move = "accept" if clipped else "expand"
            if move == "accept":
                accepted = True
                break
            if move == "expand":
                lo = t
                t = 2.0 * t if math.isinf(hi) else 0.5 * (lo + hi)
            else:
                hi = t
                t = SHRINK * t if lo == 0.0 else 0.5 * (lo + hi)
        if not accepted:
            break
        g_new = score_gradient_theta(rule, model, r, trial)
        s_k, y_k = trial - theta, g_new - g
        curv = abs(float(s_k @ y_k))
        # Barzilai-Borwein trial step, falling back to doubling
        step = curv / float(y_k @ y_k) if curv > 0 else 2.0 * t
        step = min(max(step, 1e-10), 1e10)
        theta, f, g = trial, ft, g_new
        gnorm = float(np.linalg.norm(g))
    converged = gnorm <= opts.grad_tol
    return StartResult(theta, f, gnorm, it, converged, not converged and _near_boundary(model, theta))


def _theta_hessian(rule, model, r, theta, h=1e-5) -> np.ndarray | None:
    k = theta.size
    H = np.empty((k, k))
    for j in range(k):
        e = np.zeros(k)
        e[j] = h
        if not (model.contains(theta + e) and model.contains(theta - e)):
            return None
        H[:, j] = (
            score_gradient_theta(rule, model, r, theta + e)
            - score_gradient_theta(rule, model, r, theta - e)
        ) / (2 * h)
    return 0.5 * (H + H.T)


def optimize_score(
    rule: ScoringRule,
    model: ParametricModel,
    r,
    opts: OptimizerSettings | None = None,
) -> EstimationResult:
    """argmax over the model's parameter box of s(p(theta), r)."""
    opts = opts or OptimizerSettings()
    r = normalize_point(r)
    if r.size != model.m:
        raise DomainError(f"r has {r.size} outcomes, model has {model.m}")
    rng = np.random.default_rng(opts.seed)
    starts = model.sample(rng, opts.n_starts)
    runs = [_ascend(rule, model, r, theta, opts) for theta in starts]

    converged = [i for i, run in enumerate(runs) if run.converged]
    pool = converged or [i for i, run in enumerate(runs) if run.at_boundary]
    if not pool:
        worst = min(run.grad_norm for run in runs)
        raise NumericError(
            f"no start converged for {rule.name} on {model.name}; best gradient norm {worst:.3g}"
        )
    # best score, ties to the lowest start index
    best_i = max(pool, key=lambda i: (runs[i].score, -i))
    best = runs[best_i]

    agree = len(converged) == len(runs) and all(
        np.max(np.abs(runs[i].theta - best.theta)) <= AGREE_TOL for i in converged
    )
    disagree = any(np.max(np.abs(runs[i].theta - best.theta)) > AGREE_TOL for i in converged)
    if not best.converged or disagree:
        verdict = "no"
    else:
        H = _theta_hessian(rule, model, r, best.theta)
        if H is None:
            verdict = "unknown"
        elif np.max(np.linalg.eigvalsh(H)) >= 0:
            verdict = "no"
        elif agree and len(runs) > 1:
            verdict = "yes"
        else:
            verdict = "unknown"

    return EstimationResult(
        theta_hat=best.theta.copy(),
        p_hat=model.prob(best.theta),
        score_at_opt=best.score,
        grad_norm=best.grad_norm,
        well_behaved=verdict,
        restarts_agree=agree,
        iterations=best.iterations,
        converged=best.converged,
        at_boundary=best.at_boundary,
        starts=runs,
    )


def mle(model: ParametricModel, r, opts: OptimizerSettings | None = None) -> EstimationResult:
    return optimize_score(log_rule(), model, r, opts)


@dataclass
class TransferReport:
    """Whether stationarity of ``rule`` at theta0 carries over to the member based at p(theta0)."""

    status: str
    theta0: np.ndarray | None
    baseline: np.ndarray | None
    grad_norm: float | None
    base: EstimationResult | None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def transfer_check(
    family: WeightedFamily,
    rule: ScoringRule,
    model: ParametricModel,
    r,
    opts: OptimizerSettings | None = None,
    tol: float = TRANSFER_TOL,
) -> TransferReport:
    r = ensure_interior(normalize_point(r), "outcome distribution")
    try:
        base = optimize_score(rule, model, r, opts)
    except NumericError:
        return TransferReport("unknown", None, None, None, None)
    if base.well_behaved != "yes":
        return TransferReport("unknown", base.theta_hat, None, None, base)
    q = model.prob(base.theta_hat)
    member = family.member(q)
    gnorm = float(np.linalg.norm(score_gradient_theta(member, model, r, base.theta_hat)))
    return TransferReport("pass" if gnorm <= tol else "fail", base.theta_hat, q, gnorm, base)


def counterexample_path(
    family: WeightedFamily, rule: ScoringRule, q, r, tol: float = 1e-8
) -> ParametricModel | None:
    """Linear model through q on which ``rule`` is stationary at 0 but the member is not.

    Built from the component of the member gradient v orthogonal to the rule
    gradient w; None when v and w are parallel within ``tol``.
    """
    q = ensure_interior(normalize_point(q), "baseline")
    if q.size < 3:
        raise DomainError("tangent space is one-dimensional for m = 2; no witness path exists")
    v, w = gradient_pair(family, rule, q, r)
    if np.linalg.norm(v) < 1e-14 or np.linalg.norm(w) < 1e-14:
        raise NumericError("a gradient vanishes at the baseline; is r equal to q?")
    if parallel_deviation(v, w) <= tol:
        return None
    b = v - (v @ w) / (w @ w) * w
    return linear_path_model(q, b)
