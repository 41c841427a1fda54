"""Contraction solver for the implicit proximal step.

Given ``x`` near a stationary point ``x_bar``, find ``z`` with

    z = x - (lam - gam) * grad e_gam f(z)

by iterating the strict contraction ``Phi(z) = z - sigma * (S(z) - x)`` where
``S(z) = z + (lam - gam) * grad e_gam f(z)``, then recover the proximal
point ``y = z - gam / (lam - gam) * (x - z)``, which equals ``P_lam f(x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .envelope import MAX_INNER_ITER, ProxQuery, default_tol, envelope_gradient, prox, prox_grid_oracle
from .errors import LocalityError, NonconvergenceError, ParameterError, ScheduleError
from .problems import Problem, as_point
from .report import CheckReport, make_report

BETA_SAFETY = 0.9
# consecutive-step ratios below this denominator are rounding noise
RATIO_FLOOR = 1e-12


@dataclass(frozen=True)
class ContractionConstants:
    gamma: float
    lam: float
    rho: float
    delta: float
    sigma: float
    L: float
    kappa: float
    beta: float

    @property
    def sqrt_kappa(self) -> float:
        return math.sqrt(self.kappa)

    @property
    def beta_bound(self) -> float:
        """``min{delta, delta/sigma * (1 - sqrt(kappa))}``; ``beta`` must be strictly below it."""
        return min(self.delta, self.delta / self.sigma * (1.0 - self.sqrt_kappa))

    def to_dict(self):
        return {k: getattr(self, k) for k in ("gamma", "lam", "rho", "delta", "sigma", "L", "kappa", "beta")}


def lipschitz_constant(gamma: float, lam: float, rho: float) -> float:
    """``L = 1 + (lam - gam)/gam * (1 + 1/(1 - gam rho))``."""
    return 1.0 + (lam - gamma) / gamma * (1.0 + 1.0 / (1.0 - gamma * rho))


def check_step_pair(gamma: float, lam: float, rho: float):
    if not gamma > 0.0:
        raise ScheduleError(f"0 < 2γ violated: γ={gamma}")
    if not 2.0 * gamma < lam:
        raise ScheduleError(f"2γ < λ violated: 2γ={2.0 * gamma}, λ={lam}")
    if not lam * rho < 1.0:
        raise ScheduleError(f"λ < 1/ρ violated: λ={lam}, 1/ρ={1.0 / rho if rho > 0 else math.inf}")


def derive_constants(
    gamma: float,
    lam: float,
    rho: float,
    delta: float,
    sigma: Optional[float] = None,
    beta: Optional[float] = None,
) -> ContractionConstants:
    """Contraction constants for the pair ``(gamma, lam)``.

    ``sigma=None`` picks ``1/L^2``, the minimiser of ``kappa(sigma)``, which
    gives ``kappa = 1 - 1/L^2``. ``beta`` defaults to ``0.9`` times its
    upper bound; an explicit value must satisfy the bound strictly.
    """
    check_step_pair(gamma, lam, rho)
    if not delta > 0.0:
        raise ParameterError(f"δ > 0 violated: δ={delta}")
    L = lipschitz_constant(gamma, lam, rho)
    if sigma is None:
        sigma = 1.0 / (L * L)
    elif not 0.0 < sigma < 2.0 / (L * L):
        raise ParameterError(f"σ < 2/L² violated: σ={sigma}, 2/L²={2.0 / (L * L):.6g} (L={L:.6g})")
    kappa = 1.0 - 2.0 * sigma + sigma * sigma * L * L
    bound = min(delta, delta / sigma * (1.0 - math.sqrt(kappa)))
    if beta is None:
        beta = BETA_SAFETY * bound
    elif not 0.0 < beta < bound:
        raise ParameterError(f"β < min{{δ, (δ/σ)(1−√κ)}} violated: β={beta}, bound={bound:.6g}")
    return ContractionConstants(gamma, lam, rho, delta, sigma, L, kappa, beta)


def default_max_iter(cc: ContractionConstants, tol: float) -> int:
    """Iterations after which contraction alone guarantees ``tol``, plus 10."""
    n = math.log(tol / (cc.sigma * 2.0 * cc.delta)) / math.log(cc.sqrt_kappa)
    return max(0, math.ceil(n)) + 10


def prox_search_radius(cc: ContractionConstants) -> float:
    # |P z - z| <= (1 + 1/(1 - gam rho)) |z - x_bar| for z in B[x_bar, delta]
    return 1.05 * cc.delta * (1.0 + 1.0 / (1.0 - cc.gamma * cc.rho))


def S_map(z, cc: ContractionConstants, problem: Problem, tol: Optional[float] = None) -> np.ndarray:
    """``S(z) = z + (lam - gam) * grad e_gam f(z)``."""
    z = as_point(z, problem.dimension)
    g = envelope_gradient(ProxQuery(problem, cc.gamma, z, prox_search_radius(cc)), tol)
    return z + (cc.lam - cc.gamma) * g


def phi_map(z, x, cc: ContractionConstants, problem: Problem, tol: Optional[float] = None) -> np.ndarray:
    """``Phi(z) = sigma x - sigma S(z) + z``."""
    z = as_point(z, problem.dimension)
    return z - cc.sigma * (S_map(z, cc, problem, tol) - as_point(x, problem.dimension))


def recover_prox(x, z, cc: ContractionConstants) -> np.ndarray:
    """``y = z - gam (lam - gam)^{-1} (x - z)``."""
    return z - cc.gamma / (cc.lam - cc.gamma) * (x - z)


@dataclass(frozen=True)
class InnerSolveResult:
    x: np.ndarray
    z: np.ndarray
    y: np.ndarray
    inner_iterations: int
    residual: float
    contraction_ratio_observed: float
    backend: str = "python"

    def to_dict(self):
        return {
            "x": self.x.tolist(),
            "z": self.z.tolist(),
            "y": self.y.tolist(),
            "inner_iterations": self.inner_iterations,
            "residual": self.residual,
            "contraction_ratio_observed": self.contraction_ratio_observed,
            "backend": self.backend,
        }


def solve_fixed_point(
    x,
    cc: ContractionConstants,
    problem: Problem,
    x_bar,
    tol: float = 1e-10,
    max_iter: Optional[int] = None,
    z0=None,
    prox_tol: Optional[float] = None,
) -> InnerSolveResult:
    """Solve ``S(z) = x`` by the ``Phi`` iteration started at ``z0`` (default ``x``).

    Stops when ``|S(z) - x| <= tol``. Raises :class:`NonconvergenceError`
    after ``max_iter`` steps and :class:`LocalityError` if ``z`` leaves
    ``B[x_bar, delta]``, ends within ``tol`` of its boundary, or ``y`` falls
    outside ``B[x_bar, beta + tol lam/(lam - gam)]``.
    """
    n = problem.dimension
    x = as_point(x, n)
    x_bar = as_point(x_bar, n)
    z = x.copy() if z0 is None else as_point(z0, n)
    if max_iter is None:
        max_iter = default_max_iter(cc, tol)
    if prox_tol is None:
        prox_tol = default_tol(problem)

    fast = None
    if n == 1 and z0 is None:
        fast = _kernels.fixed_point_1d(
            problem,
            x=float(x[0]), z0=float(z[0]), gam=cc.gamma, lam=cc.lam, sigma=cc.sigma,
            xbar=float(x_bar[0]), delta=cc.delta,
            rlo=float(problem.region.lo[0]), rhi=float(problem.region.hi[0]),
            tol=tol, max_iter=max_iter, prox_tol=prox_tol,
            prox_radius=prox_search_radius(cc), prox_maxit=MAX_INNER_ITER, ratio_floor=RATIO_FLOOR,
        )
    if fast is not None:
        status, zf, it, r, ratio, best_z, best_r = fast
        z = np.array([zf])
        if status == _kernels.FP_NONCONVERGED:
            raise NonconvergenceError(
                f"fixed-point iteration: residual {best_r:.3e} > tol {tol:.3e} after {it} iterations",
                best=np.array([best_z]), residual=best_r, iterations=it,
            )
        if status == _kernels.FP_LEFT_BALL:
            raise _left_ball(z, x_bar, cc)
        if status == _kernels.FP_PROX_FAILED:
            raise LocalityError(f"prox of f at z={zf} not found in its search interval", point=z)
        backend = "compiled"
    else:
        z, it, r, ratio = _iterate(x, z, cc, problem, x_bar, tol, max_iter, prox_tol)
        backend = "python"

    dist = float(np.linalg.norm(z - x_bar))
    if not dist < cc.delta - tol:
        raise LocalityError(
            f"‖z − x̄‖ < δ − tol violated: ‖z − x̄‖={dist:.6g}, δ={cc.delta}",
            point=z, distance=dist, radius=cc.delta,
        )
    y = recover_prox(x, z, cc)
    ylim = cc.beta + tol * cc.lam / (cc.lam - cc.gamma)
    ydist = float(np.linalg.norm(y - x_bar))
    if ydist > ylim:
        raise LocalityError(
            f"y ∈ B[x̄, β] violated: ‖y − x̄‖={ydist:.6g} > {ylim:.6g}",
            point=y, distance=ydist, radius=cc.beta,
        )
    return InnerSolveResult(x, z, y, int(it), float(r), float(ratio), backend)


def _left_ball(z, x_bar, cc):
    d = float(np.linalg.norm(z - x_bar))
    return LocalityError(
        f"z ∈ B(x̄, δ) violated: ‖z − x̄‖={d:.6g} > δ={cc.delta}; check β and δ",
        point=z, distance=d, radius=cc.delta,
    )


def _iterate(x, z, cc, problem, x_bar, tol, max_iter, prox_tol):
    best_z, best_r = z, math.inf
    prev_step, ratio = -1.0, 0.0
    it = 0
    while True:
        s = S_map(z, cc, problem, prox_tol)
        r = float(np.linalg.norm(s - x))
        if r < best_r:
            best_z, best_r = z, r
        if r <= tol:
            return z, it, r, ratio
        if it >= max_iter:
            raise NonconvergenceError(
                f"fixed-point iteration: residual {best_r:.3e} > tol {tol:.3e} after {it} iterations",
                best=best_z, residual=best_r, iterations=it,
            )
        z_new = z - cc.sigma * (s - x)
        step = float(np.linalg.norm(z_new - z))
        if prev_step > RATIO_FLOOR and step / prev_step > ratio:
            ratio = step / prev_step
        prev_step = step
        z = z_new
        it += 1
        if float(np.linalg.norm(z - x_bar)) > cc.delta:
            raise _left_ball(z, x_bar, cc)


def verify_prox_identity(
    result: InnerSolveResult,
    problem: Problem,
    cc: ContractionConstants,
    tol: float = 1e-10,
    grid_step: float = 1e-6,
    search_radius: Optional[float] = None,
) -> CheckReport:
    """Compare the recovered ``y`` with an independent evaluation of ``P_lam f(x)``.

    One-dimensional problems use the grid oracle; others the numerical prox.
    Passes when ``|y - P| <= 10 tol / (1 - lam rho) + resolution``.
    """
    radius = search_radius if search_radius is not None else max(problem.locality_radius, 2.0 * cc.delta)
    q = ProxQuery(problem, cc.lam, result.x, radius)
    if problem.dimension == 1:
        ref = prox_grid_oracle(q, grid_step)
    else:
        ref = prox(q, method="numerical")
    resolution = ref.residual
    bound = 10.0 * tol / (1.0 - cc.lam * cc.rho) + resolution
    err = float(np.linalg.norm(result.y - ref.y))
    return make_report(
        "prox-identity",
        err - bound,
        0.0,
        {"y": result.y, "reference": ref.y, "reference_method": ref.method, "error": err, "bound": bound},
        1,
    )
