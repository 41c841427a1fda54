"""Proximal operator and Moreau envelope oracles.

``P_lam f(x)`` is the local minimiser of ``y -> f(y) + |y - x|^2 / (2 lam)``
inside the search ball ``B[x, search_radius]``; for ``lam * rho < 1`` this
subproblem is ``(1/lam - rho)``-strongly convex and the minimiser is unique.
Three routes compute it:

* ``analytic``: the instance's closed form, when valid at ``(lam, x)``;
* ``numerical``: bisection on the monotone subgradient in one dimension, a
  cutting-plane model of the convex part ``xi = f + rho/2 |.|^2`` otherwise;
* ``grid``: exhaustive scan plus golden-section polish (test oracle, n <= 2).

For the numerical route ``residual`` is a certified bound on the distance
from the returned point to the exact prox.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import (
    LocalityError,
    NonconvergenceError,
    OutsideDomainError,
    ParameterError,
    UnsupportedDimensionError,
)
from .problems import Problem, as_point
from .report import CheckReport, child_rng, make_report, sample_ball

DEFAULT_TOL = 1e-14
# sqrt(2 gap / mu) cannot certify below ~sqrt(machine eps)
CUTTING_PLANE_TOL = 1e-7
MAX_INNER_ITER = 100_000
GRID_POINT_CAP = 40_000_000
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ProxQuery:
    problem: Problem
    lam: float
    x: np.ndarray
    search_radius: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "x", as_point(self.x, self.problem.dimension))
        if self.search_radius is None:
            object.__setattr__(self, "search_radius", float(self.problem.locality_radius))
        if not self.lam > 0.0:
            raise ParameterError(f"lambda must be positive, got {self.lam}")
        if not self.search_radius > 0.0:
            raise ParameterError(f"search_radius must be positive, got {self.search_radius}")


@dataclass(frozen=True)
class ProxResult:
    y: np.ndarray
    envelope_value: float
    gradient: np.ndarray
    method: str
    residual: float
    iterations: int = 0
    x: np.ndarray = field(default=None, repr=False)
    lam: float = field(default=None, repr=False)

    def to_dict(self):
        return {
            "y": self.y.tolist(),
            "envelope_value": self.envelope_value,
            "gradient": self.gradient.tolist(),
            "method": self.method,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def _require_lambda_rho(problem: Problem, lam: float):
    if not lam * problem.rho < 1.0:
        raise ParameterError(f"λρ < 1 violated: λ={lam}, ρ={problem.rho}")


def _subproblem(problem, x, lam):
    inv2l = 0.5 / lam

    def phi(y):
        d = y - x
        return problem.value(y) + float(d @ d) * inv2l

    return phi


def _finish(q: ProxQuery, y, method, residual, iterations=0) -> ProxResult:
    p = q.problem
    d = y - q.x
    env = p.value(y) + float(d @ d) / (2.0 * q.lam)
    return ProxResult(
        y=y,
        envelope_value=env,
        gradient=(q.x - y) / q.lam,
        method=method,
        residual=float(residual),
        iterations=int(iterations),
        x=q.x,
        lam=q.lam,
    )


def _search_box(q: ProxQuery):
    p = q.problem
    lo = np.maximum(q.x - q.search_radius, p.region.lo)
    hi = np.minimum(q.x + q.search_radius, p.region.hi)
    return lo, hi


def default_tol(problem: Problem) -> float:
    return DEFAULT_TOL if problem.dimension == 1 else CUTTING_PLANE_TOL


def prox(q: ProxQuery, tol: Optional[float] = None, method: Optional[str] = None, maxit: int = MAX_INNER_ITER) -> ProxResult:
    """Evaluate ``P_lam f(x)``, ``e_lam f(x)`` and ``grad e_lam f(x)``.

    ``method`` forces ``"analytic"`` or ``"numerical"``; by default the
    closed form is used wherever it is valid. ``tol`` bounds the distance
    to the exact prox; it defaults to :data:`DEFAULT_TOL` in one dimension
    and :data:`CUTTING_PLANE_TOL` (also the smallest accepted value) above.
    """
    p = q.problem
    _require_lambda_rho(p, q.lam)
    if tol is None:
        tol = default_tol(p)
    if not tol > 0.0:
        raise ParameterError(f"tol > 0 violated: tol={tol}")
    if p.dimension > 1 and tol < CUTTING_PLANE_TOL:
        raise ParameterError(f"tol ≥ {CUTTING_PLANE_TOL:g} required for n ≥ 2: tol={tol}")
    if not p.region.contains(q.x):
        raise OutsideDomainError(f"{p.name}: prox queried at {q.x} outside the region")
    ap = p.analytic_prox
    if method == "analytic" and (ap is None or not ap.valid(q.lam, q.x)):
        raise ParameterError(f"{p.name}: no analytic prox valid at lambda={q.lam}, x={q.x}")
    if method != "numerical" and ap is not None and ap.valid(q.lam, q.x):
        return _finish(q, as_point(ap.fn(q.lam, q.x)), "analytic", 0.0)
    if p.dimension == 1:
        return _prox_bisection(q, tol, maxit)
    return _prox_cutting_plane(q, tol, maxit)


def _prox_bisection(q: ProxQuery, tol, maxit) -> ProxResult:
    x = float(q.x[0])
    lo0, hi0 = (float(v[0]) for v in _search_box(q))
    lo, hi, it, status = _kernels.bisect_prox_1d(q.problem, x, q.lam, lo0, hi0, tol, maxit)
    if status != _kernels.BRACKET_OK:
        side = "below" if status == _kernels.BRACKET_LOW else "above"
        edge = lo0 if status == _kernels.BRACKET_LOW else hi0
        raise LocalityError(
            f"{q.problem.name}: prox minimiser lies {side} the search interval [{lo0}, {hi0}]",
            point=np.array([edge]),
            radius=q.search_radius,
        )
    y = np.array([0.5 * (lo + hi)])
    res = 0.5 * (hi - lo)
    if res > tol and it >= maxit:
        raise NonconvergenceError(
            f"{q.problem.name}: prox bisection stopped at residual {res:.3e} > tol {tol:.3e}",
            best=y,
            residual=res,
            iterations=it,
        )
    phi = _subproblem(q.problem, q.x, q.lam)
    fy = phi(y)
    if fy > min(phi(np.array([lo0])), phi(np.array([hi0]))) + 1e-12 * max(1.0, abs(fy)):
        raise NonconvergenceError(
            f"{q.problem.name}: prox subproblem is not strongly convex on the search interval",
            best=y,
            residual=res,
            iterations=it,
        )
    return _finish(q, y, "numerical", res, it)


def _prox_cutting_plane(q: ProxQuery, tol, maxit) -> ProxResult:
    """Kelley model of ``xi`` plus the exact strongly convex quadratic remainder.

    ``phi = xi + q`` with ``q(y) = mu/2 |y|^2 - <x, y>/lam + |x|^2/(2 lam)`` and
    ``mu = 1/lam - rho``. The model minimum is a lower bound on ``min phi``, so
    ``sqrt(2 (best - model) / mu)`` bounds the distance to the prox.
    """
    from scipy.optimize import minimize

    p, x, lam = q.problem, q.x, q.lam
    rho = p.rho
    mu = 1.0 / lam - rho
    lo, hi = _search_box(q)
    n = p.dimension
    phi = _subproblem(p, x, lam)

    def quad(y):
        return 0.5 * mu * float(y @ y) - float(x @ y) / lam + float(x @ x) / (2.0 * lam)

    cuts_a, cuts_g = [], []

    def add_cut(y):
        g = p.subgradient(y) + rho * y
        cuts_a.append(p.value(y) + 0.5 * rho * float(y @ y) - float(g @ y))
        cuts_g.append(g)

    y = x.copy()
    best_y, best_v = y.copy(), phi(y)
    add_cut(y)
    res = math.inf
    it = 0
    bounds = [(lo[i], hi[i]) for i in range(n)] + [(None, None)]
    for it in range(1, min(maxit, 500) + 1):
        A = np.array(cuts_a)
        G = np.array(cuts_g)
        t0 = float(np.max(A + G @ y))
        sol = minimize(
            lambda w: w[-1] + quad(w[:-1]),
            np.append(y, t0),
            jac=lambda w: np.append(mu * w[:-1] - x / lam, 1.0),
            constraints=[{
                "type": "ineq",
                "fun": lambda w: w[-1] - (A + G @ w[:-1]),
                "jac": lambda w: np.hstack([-G, np.ones((len(A), 1))]),
            }],
            bounds=bounds,
            method="SLSQP",
            options={"ftol": 1e-15, "maxiter": 500},
        )
        y = np.clip(sol.x[:-1], lo, hi)
        model = float(np.max(A + G @ y)) + quad(y)
        v = phi(y)
        if v < best_v:
            best_y, best_v = y.copy(), v
        res = math.sqrt(2.0 * max(best_v - model, 0.0) / mu)
        if res <= tol:
            break
        add_cut(y)
    else:
        raise NonconvergenceError(
            f"{p.name}: cutting-plane prox stopped at residual {res:.3e} > tol {tol:.3e}",
            best=best_y,
            residual=res,
            iterations=it,
        )
    if np.any(np.isclose(best_y, lo) & (lo > p.region.lo)) or np.any(np.isclose(best_y, hi) & (hi < p.region.hi)):
        raise LocalityError(f"{p.name}: prox minimiser on the boundary of the search ball", point=best_y)
    return _finish(q, best_y, "numerical", res, it)


def envelope_value(q: ProxQuery, tol: Optional[float] = None) -> float:
    return prox(q, tol).envelope_value


def envelope_gradient(q: ProxQuery, tol: Optional[float] = None) -> np.ndarray:
    """``(x - P_lam f(x)) / lam``."""
    return prox(q, tol).gradient


# ---------------------------------------------------------------------------
# grid oracle


def _golden(phi1, a, b, iters=200):
    """Golden-section search of a unimodal scalar function on ``[a, b]``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = phi1(c), phi1(d)
    for _ in range(iters):
        if b - a <= 4.0 * np.spacing(max(abs(a), abs(b), 1.0)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = phi1(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = phi1(d)
    return (c, fc) if fc <= fd else (d, fd)


def prox_grid_oracle(q: ProxQuery, step: float = 1e-6) -> ProxResult:
    """Brute-force prox: scan a grid of pitch ``step`` on the search ball, then polish.

    Independent of :func:`prox`; used to check it. ``residual`` is ``step``.
    """
    p = q.problem
    if p.dimension > 2:
        raise UnsupportedDimensionError(f"grid oracle supports n <= 2, got n={p.dimension}")
    if not step > 0.0:
        raise ParameterError("grid step must be positive")
    _require_lambda_rho(p, q.lam)
    phi = _subproblem(p, q.x, q.lam)
    lo, hi = _search_box(q)
    if p.dimension == 1:
        x = float(q.x[0])
        npts = int(math.floor((hi[0] - lo[0]) / step)) + 1
        if npts > GRID_POINT_CAP:
            raise ParameterError(f"grid of {npts} points exceeds the cap {GRID_POINT_CAP}; use a coarser step")
        i, v = _kernels.grid_argmin_1d(p, x, q.lam, float(lo[0]), step, npts)
        yi = lo[0] + i * step
        a = max(lo[0], yi - step)
        b = min(hi[0], yi + step)
        yg, vg = _golden(lambda t: phi(np.array([t])), a, b)
        y = np.array([yg]) if vg <= phi(np.array([yi])) else np.array([yi])
        return _finish(q, y, "grid", step)
    return _grid_2d(q, step, phi, lo, hi)


def _grid_2d(q, step, phi, lo, hi):
    p = q.problem
    ax = [lo[k] + step * np.arange(int(math.floor((hi[k] - lo[k]) / step)) + 1) for k in range(2)]
    if ax[0].size * ax[1].size > GRID_POINT_CAP:
        raise ParameterError(
            f"grid of {ax[0].size * ax[1].size} points exceeds the cap {GRID_POINT_CAP}; use a coarser step"
        )
    r2 = q.search_radius ** 2
    best, best_v = None, math.inf
    for a0 in ax[0]:
        pts = np.column_stack([np.full(ax[1].size, a0), ax[1]])
        d = pts - q.x
        dd = np.sum(d * d, axis=1)
        vals = np.where(dd <= r2, p.values(pts) + dd / (2.0 * q.lam), math.inf)
        j = int(np.argmin(vals))
        if vals[j] < best_v:
            best, best_v = pts[j].copy(), float(vals[j])
    y = best.copy()
    for k in range(2):
        def phi1(t, k=k):
            w = y.copy()
            w[k] = t
            return phi(w)

        t, v = _golden(phi1, max(lo[k], y[k] - step), min(hi[k], y[k] + step))
        if v <= phi(y):
            y[k] = t
    return _finish(q, y, "grid", step)


# ---------------------------------------------------------------------------
# checks


def check_prox_lipschitz(
    p: Problem,
    gamma: float,
    center,
    radius: float,
    pairs: int = 1000,
    seed: int = 0,
    method: str = "auto",
    grid_step: float = 1e-6,
    search_radius: Optional[float] = None,
    slack: float = 1e-8,
) -> CheckReport:
    """Sample ``|P u - P v| <= |u - v| / (1 - gamma rho)`` on ``B[center, radius]``."""
    _require_lambda_rho(p, gamma)
    rng = child_rng(seed, "prox-lipschitz")
    center = as_point(center, p.dimension)
    U = sample_ball(rng, center, radius, pairs)
    V = sample_ball(rng, center, radius, pairs)

    def P(u):
        q = ProxQuery(p, gamma, u, search_radius)
        return prox_grid_oracle(q, grid_step).y if method == "grid" else prox(q).y

    const = 1.0 / (1.0 - gamma * p.rho)
    worst, witness, max_ratio = -math.inf, {}, 0.0
    for u, v in zip(U, V):
        du = float(np.linalg.norm(u - v))
        dp = float(np.linalg.norm(P(u) - P(v)))
        viol = dp - const * du
        if du > 0.0:
            max_ratio = max(max_ratio, dp / du)
        if viol > worst:
            worst, witness = viol, {"u": u, "v": v, "prox_distance": dp, "distance": du}
    witness["max_ratio"] = max_ratio
    witness["lipschitz_constant"] = const
    return make_report("prox-lipschitz", worst, slack, witness, pairs)
