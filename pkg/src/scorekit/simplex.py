"""Probability simplex geometry and the parametric models used for estimation.

Points of the simplex are carried as :class:`Distribution` values.  Every
function that takes a distribution also accepts a plain array-like, so the
numerical code can stay in numpy without wrapping at every call site.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

INTERIOR_THRESHOLD = 1e-9
PATH_MARGIN = 1e-6
SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Distribution:
    """A point of the probability simplex, normalized on construction."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def interior(self) -> bool:
        return bool(np.all(self.weights >= INTERIOR_THRESHOLD))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.weights
        return self.weights.astype(dtype)

    def __len__(self):
        return self.m

    def __getitem__(self, i):
        return self.weights[i]

    def __iter__(self):
        return iter(self.weights)

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"Distribution({np.array2string(self.weights, precision=6, separator=', ')})"

    def tolist(self) -> list[float]:
        return self.weights.tolist()


def as_vector(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def make_distribution(weights) -> Distribution:
    """Normalize nonnegative weights (e.g. counts) into a distribution."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise DomainError(f"need a 1-d vector of length >= 2, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise DomainError("weights must be finite")
    if np.any(w < 0):
        raise DomainError(f"negative weight in {w.tolist()}")
    total = w.sum()
    if total <= 0:
        raise DomainError("weights sum to zero")
    return Distribution(w / total)


def uniform(m: int) -> Distribution:
    if m < 2:
        raise DomainError(f"outcome count must be >= 2, got {m}")
    return Distribution(np.full(m, 1.0 / m))


def empirical(outcomes: Sequence[int], m: int) -> Distribution:
    """Empirical distribution of 1-based outcomes in ``1..m``."""
    if m < 2:
        raise DomainError(f"outcome count must be >= 2, got {m}")
    outcomes = list(outcomes)
    if not outcomes:
        raise DomainError("empty outcome sequence")
    counts = np.zeros(m)
    for y in outcomes:
        if int(y) != y or not 1 <= y <= m:
            raise DomainError(f"outcome {y!r} outside 1..{m}")
        counts[int(y) - 1] += 1
    return Distribution(counts / len(outcomes))


def ensure_interior(p, what: str = "distribution") -> np.ndarray:
    p = as_vector(p)
    if np.any(p < INTERIOR_THRESHOLD):
        raise DomainError(f"{what} {p.tolist()} is not in the interior of the simplex")
    return p


def tangent_project(v) -> np.ndarray:
    """Orthogonal projection onto the sum-zero subspace."""
    v = as_vector(v)
    return v - v.mean()


def tangent_basis(m: int) -> np.ndarray:
    """Orthonormal basis of the sum-zero subspace as the columns of an m x (m-1) matrix."""
    # Helmert contrasts
    basis = np.zeros((m, m - 1))
    for k in range(1, m):
        col = np.zeros(m)
        col[:k] = 1.0
        col[k] = -k
        basis[:, k - 1] = col / np.sqrt(k * (k + 1))
    return basis


@dataclass(frozen=True, eq=False)
class ParametricModel:
    """A differentiable map from an open parameter box into the interior of the simplex.

    ``lower`` and ``upper`` bound the open box Theta coordinate-wise.  Optimizer
    starts are drawn from ``start_box`` when given, else from Theta itself.
    """

    name: str
    m: int
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    _prob: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    _jac: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    start_box: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def contains(self, theta) -> bool:
        theta = np.atleast_1d(as_vector(theta))
        return bool(np.all(theta > self.lower) and np.all(theta < self.upper))

    def _check(self, theta) -> np.ndarray:
        theta = np.atleast_1d(as_vector(theta))
        if theta.shape != (self.dim,):
            raise DomainError(f"{self.name}: expected {self.dim} parameters, got {theta.shape}")
        if not self.contains(theta):
            raise DomainError(f"{self.name}: theta={theta.tolist()} outside the parameter domain")
        return theta

    def prob(self, theta) -> np.ndarray:
        """Model probabilities as a raw array (no interiority bookkeeping)."""
        return self._prob(self._check(theta))

    def evaluate(self, theta) -> Distribution:
        return Distribution(self.prob(theta))

    def jacobian(self, theta) -> np.ndarray:
        """m x dim matrix of derivatives dp_i/dtheta_j."""
        return self._jac(self._check(theta))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` starting parameter vectors uniformly."""
        lo, hi = self.start_box if self.start_box is not None else (self.lower, self.upper)
        return rng.uniform(lo, hi, size=(n, self.dim))


def linear_path_model(q, b) -> ParametricModel:
    """One-parameter model theta -> q + theta*b through an interior point."""
    q = as_vector(q)
    b = as_vector(b)
    if q.shape != b.shape:
        raise DomainError("q and b must have the same length")
    if np.any(q < INTERIOR_THRESHOLD):
        raise DomainError(f"base point {q.tolist()} is not interior")
    scale = max(1.0, float(np.max(np.abs(b))))
    if np.max(np.abs(b)) == 0.0:
        raise DomainError("direction must be nonzero")
    if abs(b.sum()) > 1e-10 * scale:
        raise DomainError(f"direction {b.tolist()} is not a tangent vector (sums to {b.sum():.3g})")
    moving = b != 0
    tau = float(np.min((q[moving] - PATH_MARGIN) / np.abs(b[moving])))
    if tau <= 0:
        raise DomainError("base point too close to the boundary for a linear path")

    def prob(theta):
        return q + theta[0] * b

    def jac(theta):
        return b.reshape(-1, 1).copy()

    return ParametricModel("linear_path", q.size, 1, np.array([-tau]), np.array([tau]), prob, jac)


SOFTMAX_BOUND = 8.0
# logits beyond this start on plateaus where power-type scores are nearly flat
SOFTMAX_START = 3.0


def softmax_model(m: int) -> ParametricModel:
    """Saturated (m-1)-parameter model with the last logit pinned at zero."""
    if m < 2:
        raise DomainError(f"outcome count must be >= 2, got {m}")

    def prob(theta):
        z = np.append(theta, 0.0)
        z = np.exp(z - z.max())
        return z / z.sum()

    def jac(theta):
        p = prob(theta)
        full = np.diag(p) - np.outer(p, p)
        return full[:, : m - 1]

    bound = np.full(m - 1, SOFTMAX_BOUND)
    start = np.full(m - 1, SOFTMAX_START)
    return ParametricModel(f"softmax{m}", m, m - 1, -bound, bound, prob, jac, (-start, start))


BINOMIAL_EPS = 1e-4


def binomial_squares_model() -> ParametricModel:
    """theta -> ((1-theta)^2, 2 theta (1-theta), theta^2), a curve through the 3-simplex."""

    def prob(theta):
        t = theta[0]
        return np.array([(1 - t) ** 2, 2 * t * (1 - t), t * t])

    def jac(theta):
        t = theta[0]
        return np.array([[-2 * (1 - t)], [2 - 4 * t], [2 * t]])

    return ParametricModel(
        "binomial_squares", 3, 1, np.array([BINOMIAL_EPS]), np.array([1 - BINOMIAL_EPS]), prob, jac
    )


def model_by_name(name: str, m: int | None = None) -> ParametricModel:
    if name == "binomial_squares":
        if m not in (None, 3):
            raise DomainError("binomial_squares has exactly 3 outcomes")
        return binomial_squares_model()
    if name == "softmax":
        if m is None:
            raise DomainError("softmax model needs an outcome count")
        return softmax_model(m)
    raise DomainError(f"unknown model {name!r}")
