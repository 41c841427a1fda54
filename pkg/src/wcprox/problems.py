"""Weakly convex test functions and sampled certificates of weak convexity.

A :class:`Problem` bundles a value oracle, one subgradient selection, the
weak-convexity modulus ``rho`` and the box on which that modulus is claimed.
The zoo constructors return ``(Problem, StationaryPoint)`` pairs with the
stationary point derived by hand for each instance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, InstanceError, OutsideDomainError
from .report import CheckReport, child_rng, make_report

INFINITE = math.inf
"""Value returned by :meth:`Problem.value` outside the problem region."""

RHO_EFF = 1e-6
"""Modulus stored for convex instances so ``1/rho`` stays finite."""

# kernel kind codes understood by the compiled core
KIND_EXAMPLE1 = 0
KIND_QUADRATIC = 1
KIND_ABS_QUADRATIC = 2


def as_point(x, n: Optional[int] = None) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if n is not None and p.size != n:
        raise ConfigurationError(f"expected a point of dimension {n}, got {p.size}")
    return p


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box ``[lo, hi]``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = as_point(self.lo)
        hi = as_point(self.hi)
        if lo.shape != hi.shape:
            raise ConfigurationError("box bounds have different dimensions")
        if np.any(hi < lo) or not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
            raise ConfigurationError(f"empty box [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "Box":
        return cls(np.array([lo]), np.array([hi]))

    @property
    def dimension(self) -> int:
        return self.lo.size

    @property
    def degenerate(self) -> bool:
        return bool(np.any(self.hi - self.lo <= 0.0))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = as_point(x)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(m, self.dimension))

    def clip(self, x) -> np.ndarray:
        return np.clip(as_point(x), self.lo, self.hi)


@dataclass(frozen=True)
class AnalyticProx:
    """Closed-form prox together with the set of ``(lam, x)`` where it is valid."""

    fn: Callable[[float, np.ndarray], np.ndarray]
    valid: Callable[[float, np.ndarray], bool]
    description: str = ""


@dataclass(frozen=True)
class Problem:
    """A rho-weakly convex function on a box.

    ``value_fn`` and ``subgradient_fn`` receive a 1-D float array of length
    ``dimension``. ``value_batch`` (optional) maps an ``(m, n)`` array to
    ``m`` values and is only used to speed up sampling and grid scans.
    ``kernel`` is ``(kind, params)`` for instances the compiled core knows.
    """

    name: str
    dimension: int
    value_fn: Callable[[np.ndarray], float]
    subgradient_fn: Callable[[np.ndarray], np.ndarray]
    rho: float
    region: Box
    lower_bound: float = -INFINITE
    analytic_prox: Optional[AnalyticProx] = None
    value_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kernel: Optional[tuple] = None
    locality_radius: float = 1.0
    description: str = field(default="", compare=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigurationError("dimension must be a positive integer")
        if self.region.dimension != self.dimension:
            raise ConfigurationError("region dimension does not match problem dimension")
        if not self.rho >= 0.0:
            raise ConfigurationError("rho must be nonnegative")

    def value(self, x) -> float:
        x = as_point(x, self.dimension)
        if not self.region.contains(x):
            return INFINITE
        return float(self.value_fn(x))

    def values(self, X) -> np.ndarray:
        """Vectorised :meth:`value` over the rows of ``X``."""
        X = np.asarray(X, dtype=float).reshape(-1, self.dimension)
        inside = np.all((X >= self.region.lo) & (X <= self.region.hi), axis=1)
        if self.value_batch is not None:
            out = np.asarray(self.value_batch(X), dtype=float)
        else:
            out = np.array([self.value_fn(row) for row in X], dtype=float)
        return np.where(inside, out, INFINITE)

    def subgradient(self, x) -> np.ndarray:
        x = as_point(x, self.dimension)
        if not self.region.contains(x):
            raise OutsideDomainError(f"{self.name}: subgradient queried outside region at {x}")
        v = np.atleast_1d(np.asarray(self.subgradient_fn(x), dtype=float))
        if v.shape != (self.dimension,) or not np.all(np.isfinite(v)):
            raise InstanceError(f"{self.name}: subgradient oracle returned {v!r} at {x}")
        return v

    def with_rho(self, rho: float) -> "Problem":
        """Same function with a different declared modulus (used for negative controls)."""
        from dataclasses import replace

        return replace(self, rho=float(rho))


@dataclass(frozen=True)
class StationaryPoint:
    x_bar: np.ndarray
    certified: bool
    derivation: str = ""

    def __post_init__(self):
        object.__setattr__(self, "x_bar", as_point(self.x_bar))


# ---------------------------------------------------------------------------
# zoo


def _max_branch_subgrad(a: float, b: float, ga: float, gb: float) -> float:
    # at ties return the midpoint of the two branch gradients
    if b > a:
        return gb
    if a > b:
        return ga
    return 0.5 * (ga + gb)


def make_example1():
    """``f(x) = max{2 - x^2, x^2}`` on ``[-3, 3]`` with ``rho = 2``.

    ``f + x^2 = max{2, 2 x^2}`` is convex, so ``rho = 2`` works. At ``x = 1``
    both branches are active with gradients ``-2`` and ``2``, so
    ``0 in [-2, 2] = df(1)``. For ``|x - 1| <= 2 lam`` the scaled residual
    ``(x - 1)/lam`` lies in ``df(1)`` and the prox is the constant 1 (the same
    holds around ``-1`` by symmetry).
    """

    def value(x):
        t = x[0] * x[0]
        return max(2.0 - t, t)

    def subgrad(x):
        y = x[0]
        t = y * y
        return np.array([_max_branch_subgrad(2.0 - t, t, -2.0 * y, 2.0 * y)])

    def batch(X):
        t = X[:, 0] ** 2
        return np.maximum(2.0 - t, t)

    def prox(lam, x):
        return np.array([1.0]) if x[0] >= 0.0 else np.array([-1.0])

    def valid(lam, x):
        return lam <= 0.25 and (abs(x[0] - 1.0) <= 2.0 * lam or abs(x[0] + 1.0) <= 2.0 * lam)

    p = Problem(
        name="example1",
        dimension=1,
        value_fn=value,
        subgradient_fn=subgrad,
        rho=2.0,
        region=Box.interval(-3.0, 3.0),
        lower_bound=1.0,
        analytic_prox=AnalyticProx(prox, valid, "P_lam f(x) = 1 on B[1, 2 lam] for lam <= 1/4"),
        value_batch=batch,
        kernel=(KIND_EXAMPLE1, (0.0,)),
        locality_radius=0.2,
        description="max{2 - x^2, x^2}",
    )
    xs = StationaryPoint(np.array([1.0]), True, "both branches active at 1 with gradients -2, 2; 0 in [-2, 2]")
    return p, xs


def make_quadratic(c=0.0):
    """``f(x) = |x - c|^2 / 2`` with ``rho`` stored as :data:`RHO_EFF`."""
    c = as_point(c)
    n = c.size

    def value(x):
        d = x - c
        return 0.5 * float(d @ d)

    def subgrad(x):
        return x - c

    def batch(X):
        return 0.5 * np.sum((X - c) ** 2, axis=1)

    def prox(lam, x):
        return (x + lam * c) / (1.0 + lam)

    p = Problem(
        name="quadratic",
        dimension=n,
        value_fn=value,
        subgradient_fn=subgrad,
        rho=RHO_EFF,
        region=Box(c - 5.0, c + 5.0),
        lower_bound=0.0,
        analytic_prox=AnalyticProx(prox, lambda lam, x: True, "(x + lam c)/(1 + lam)"),
        value_batch=batch,
        kernel=(KIND_QUADRATIC, (float(c[0]),)) if n == 1 else None,
        locality_radius=2.0,
        description="0.5 |x - c|^2",
    )
    return p, StationaryPoint(c.copy(), True, "gradient x - c vanishes at c")


def make_abs_quadratic():
    """``f(x) = |x^2 - 1|`` on ``[-3, 3]``; convex ``|.|`` composed with a smooth map.

    ``f + x^2`` equals 1 on ``[-1, 1]`` and ``2x^2 - 1`` outside, which is
    convex, so ``rho = 2``. At ``x = 1``, ``df(1) = [-2, 2]`` contains 0.
    """

    def value(x):
        return abs(x[0] * x[0] - 1.0)

    def subgrad(x):
        y = x[0]
        h = y * y - 1.0
        if h > 0.0:
            return np.array([2.0 * y])
        if h < 0.0:
            return np.array([-2.0 * y])
        return np.array([0.0])

    def batch(X):
        return np.abs(X[:, 0] ** 2 - 1.0)

    p = Problem(
        name="abs-quadratic",
        dimension=1,
        value_fn=value,
        subgradient_fn=subgrad,
        rho=2.0,
        region=Box.interval(-3.0, 3.0),
        lower_bound=0.0,
        value_batch=batch,
        kernel=(KIND_ABS_QUADRATIC, (0.0,)),
        locality_radius=0.4,
        description="|x^2 - 1|",
    )
    return p, StationaryPoint(np.array([1.0]), True, "x^2 - 1 = 0 at 1, df(1) = [-2, 2] contains 0")


ZOO = {
    "example1": make_example1,
    "quadratic": make_quadratic,
    "abs-quadratic": make_abs_quadratic,
}


@dataclass(frozen=True)
class Preset:
    """Parameters under which the local theory is known to apply to a zoo instance."""

    gamma: float
    lam: float
    lambda_bar: float
    delta: float
    x0: float


# delta <= 2 gamma keeps the Moreau envelope convex around x_bar for the two
# nonconvex instances (it is quadratic on B[1, 2 gamma]).
PRESETS = {
    "example1": Preset(gamma=0.1, lam=0.25, lambda_bar=0.15, delta=0.2, x0=1.05),
    "abs-quadratic": Preset(gamma=0.2, lam=0.45, lambda_bar=0.3, delta=0.4, x0=1.15),
    "quadratic": Preset(gamma=0.5, lam=1.5, lambda_bar=0.5, delta=2.0, x0=0.5),
}


def get_instance(problem_id: str):
    try:
        return ZOO[problem_id]()
    except KeyError:
        raise ConfigurationError(f"unknown problem id {problem_id!r}; choose from {sorted(ZOO)}") from None


# ---------------------------------------------------------------------------
# checks


def _require_region(p: Problem):
    if p.region.degenerate:
        raise ConfigurationError(f"{p.name}: region is degenerate, cannot sample")


def check_weak_convexity(p: Problem, samples: int = 10_000, seed: int = 0, slack: float = 1e-10) -> CheckReport:
    """Sample the approximate secant inequality on ``p.region``."""
    if samples < 1:
        raise ConfigurationError("samples must be >= 1")
    _require_region(p)
    rng = child_rng(seed, "weak-convexity")
    X = p.region.sample(rng, samples)
    Y = p.region.sample(rng, samples)
    a = rng.uniform(0.0, 1.0, size=samples)
    M = a[:, None] * X + (1.0 - a[:, None]) * Y
    lhs = p.values(M)
    rhs = a * p.values(X) + (1.0 - a) * p.values(Y) + 0.5 * p.rho * a * (1.0 - a) * np.sum((X - Y) ** 2, axis=1)
    viol = lhs - rhs
    i = int(np.argmax(viol))
    return make_report(
        "weak-convexity",
        viol[i],
        slack,
        {"x": X[i], "y": Y[i], "alpha": a[i], "rho": p.rho},
        samples,
    )


def check_quadratic_lower_estimator(p: Problem, samples: int = 10_000, seed: int = 0, slack: float = 1e-10) -> CheckReport:
    """Sample ``f(y) >= f(x) + <v, y - x> - rho/2 |y - x|^2`` with ``v = p.subgradient(x)``."""
    if samples < 1:
        raise ConfigurationError("samples must be >= 1")
    _require_region(p)
    rng = child_rng(seed, "quadratic-lower-estimator")
    X = p.region.sample(rng, samples)
    Y = p.region.sample(rng, samples)
    V = np.array([p.subgradient(x) for x in X])
    D = Y - X
    viol = p.values(X) + np.sum(V * D, axis=1) - 0.5 * p.rho * np.sum(D * D, axis=1) - p.values(Y)
    i = int(np.argmax(viol))
    return make_report(
        "quadratic-lower-estimator",
        viol[i],
        slack,
        {"x": X[i], "y": Y[i], "v": V[i], "rho": p.rho},
        samples,
    )


def dc_decomposition(p: Problem):
    """Return ``(xi, rho)`` with ``xi(x) = f(x) + rho/2 |x|^2`` convex and ``f = xi - rho/2 |x|^2``."""
    rho = p.rho

    def xi(x):
        x = as_point(x, p.dimension)
        return p.value(x) + 0.5 * rho * float(x @ x)

    return xi, rho
