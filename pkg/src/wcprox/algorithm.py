"""Inexact proximal point method for weakly convex functions.

Each outer step solves the implicit equation
``z^k = x^k - (lam_k - gam_k) grad e_{gam_k} f(z^k)`` with the contraction
solver of :mod:`wcprox.fixedpoint` and sets
``x^{k+1} = z^k - gam_k (lam_k - gam_k)^{-1} (x^k - z^k)``. Every step is
instrumented with the descent and Fejer inequalities; the run stops once
``|x^{k+1} - x^k| <= eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import LocalityError, NonconvergenceError, ParameterError, PreconditionError, ScheduleError
from .fixedpoint import derive_constants, solve_fixed_point
from .problems import Problem, as_point
from .report import CheckReport, child_rng, make_report, sample_ball

DESCENT_SLACK = 1e-8
FEJER_SLACK = 1e-8
CONFINEMENT_SLACK = 1e-6


class Termination(str, Enum):
    STEP_BELOW_EPS = "step_below_eps"
    MAX_ITER = "max_iter"
    LOCALITY_VIOLATION = "locality_violation"
    INNER_FAILURE = "inner_failure"


@dataclass(frozen=True)
class Schedule:
    """Step-size sequences; indices past the end reuse the last entry."""

    gamma_seq: tuple
    lambda_seq: tuple
    lambda_bar: float
    rho: float

    def __post_init__(self):
        g = tuple(float(v) for v in np.atleast_1d(self.gamma_seq))
        lam = tuple(float(v) for v in np.atleast_1d(self.lambda_seq))
        if not g or not lam:
            raise ParameterError("schedule sequences must be non-empty")
        object.__setattr__(self, "gamma_seq", g)
        object.__setattr__(self, "lambda_seq", lam)

    @classmethod
    def constant(cls, gamma: float, lam: float, lambda_bar: float, rho: float) -> "Schedule":
        return cls((gamma,), (lam,), lambda_bar, rho)

    @property
    def length(self) -> int:
        return max(len(self.gamma_seq), len(self.lambda_seq))

    def gamma(self, k: int) -> float:
        return self.gamma_seq[min(k, len(self.gamma_seq) - 1)]

    def lam(self, k: int) -> float:
        return self.lambda_seq[min(k, len(self.lambda_seq) - 1)]


def validate_schedule(s: Schedule, horizon: Optional[int] = None) -> CheckReport:
    """Check ``0 < lambda_bar < 2 gamma_k < lambda_k < 1/rho`` for ``k <= horizon``.

    Reports the largest ``lhs - rhs`` over the four strict inequalities and
    the first ``k`` (and inequality) that fails.
    """
    horizon = s.length - 1 if horizon is None else int(horizon)
    inv_rho = 1.0 / s.rho if s.rho > 0 else math.inf
    worst, first = -math.inf, None
    for k in range(min(horizon, s.length - 1) + 1):
        g, lam = s.gamma(k), s.lam(k)
        gaps = (
            ("0 < λ̄", -s.lambda_bar),
            ("λ̄ < 2γ", s.lambda_bar - 2.0 * g),
            ("2γ < λ", 2.0 * g - lam),
            ("λ < 1/ρ", lam - inv_rho),
        )
        for name, gap in gaps:
            worst = max(worst, gap)
            if gap >= 0.0 and first is None:
                first = {"k": k, "inequality": name, "gamma": g, "lambda": lam, "lambda_bar": s.lambda_bar, "rho": s.rho}
    return make_report("schedule", worst, 0.0, first or {}, min(horizon, s.length - 1) + 1, strict=True)


@dataclass(frozen=True)
class LocalityConfig:
    x_bar: np.ndarray
    delta: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "x_bar", as_point(self.x_bar))
        if not 0.0 < self.beta < self.delta:
            raise ParameterError(f"β < δ violated: β={self.beta}, δ={self.delta}")


def make_locality(x_bar, delta: float, schedule: Schedule, sigma: Optional[float] = None) -> LocalityConfig:
    """Locality with the largest default ``beta`` admissible for every step pair of ``schedule``."""
    beta = min(
        derive_constants(schedule.gamma(k), schedule.lam(k), schedule.rho, delta, sigma).beta
        for k in range(schedule.length)
    )
    return LocalityConfig(x_bar, delta, beta)


@dataclass(frozen=True)
class IterationRecord:
    k: int
    x_k: np.ndarray
    z_k: np.ndarray
    x_next: np.ndarray
    f_x_k: float
    f_x_next: float
    step_norm: float
    inner_iterations: int
    inner_residual: float
    descent_gap: float
    fejer_ok: bool
    gamma_k: float
    lambda_k: float


@dataclass
class RunReport:
    records: list
    termination: Termination
    T: int
    x0: np.ndarray
    f0: float
    x_final: np.ndarray
    f_star_estimate: float
    sum_sq_steps: float
    complexity_bound: float
    eps: float
    f_star_certified: Optional[float] = None
    f_star_observed: float = math.nan
    f_star_disagreement: bool = False
    message: str = ""
    method: str = "proximal-point"
    extra: dict = field(default_factory=dict)

    @property
    def step_norms(self) -> np.ndarray:
        return np.array([r.step_norm for r in self.records])

    @property
    def f_final(self) -> float:
        return self.records[-1].f_x_next if self.records else self.f0

    def summary(self) -> dict:
        return {
            "termination": self.termination.value,
            "T": self.T,
            "sum_sq_steps": self.sum_sq_steps,
            "complexity_bound": self.complexity_bound,
            "x_final": self.x_final.tolist(),
        }


def complexity_bound(rho: float, f0: float, f_star: float, eps: float) -> float:
    """``2 + (2/rho) (f0 - f_star) / eps^2``."""
    if not rho > 0.0:
        raise ParameterError(f"ρ > 0 violated: ρ={rho}")
    if not eps > 0.0:
        raise ParameterError(f"ε > 0 violated: ε={eps}")
    if f0 < f_star:
        raise ParameterError(f"f(x⁰) ≥ f* violated: f(x⁰)={f0}, f*={f_star}")
    return 2.0 + (2.0 / rho) * (f0 - f_star) / (eps * eps)


def _fejer_gap(x_k, x_next, f_next, lam, x, fx):
    """``|x_next - x|^2 - |x_k - x|^2 - 2 lam (f(x) - f(x_next))``, scaled by ``1 + |x|^2``."""
    a = x_next - x
    b = x_k - x
    return (float(a @ a) - float(b @ b) - 2.0 * lam * (fx - f_next)) / (1.0 + float(x @ x))


def run(
    problem: Problem,
    x0,
    schedule: Schedule,
    locality: LocalityConfig,
    eps: float,
    max_iter: int = 1000,
    inner_tol: float = 1e-10,
    sigma: Optional[float] = None,
    f_star: Optional[float] = None,
) -> RunReport:
    """Run the method from ``x0`` until a step of length ``<= eps``.

    ``f_star`` is the certified local minimum value used in the complexity
    bound; without it the smallest recorded value is used. Inner failures
    and locality violations end the run with the matching termination and
    keep the trace.
    """
    n = problem.dimension
    x = as_point(x0, n)
    x_bar = as_point(locality.x_bar, n)
    if not eps > 0.0:
        raise ParameterError(f"ε > 0 violated: ε={eps}")
    sched = validate_schedule(schedule, max_iter)
    if not sched.passed:
        w = sched.witness
        raise ScheduleError(f"{w['inequality']} violated at k={w['k']}: γ={w['gamma']}, λ={w['lambda']}, λ̄={w['lambda_bar']}, ρ={w['rho']}")
    if float(np.linalg.norm(x - x_bar)) > locality.beta:
        raise PreconditionError(
            f"x0 ∈ B[x̄, β] violated: ‖x0 − x̄‖={float(np.linalg.norm(x - x_bar)):.6g} > β={locality.beta:.6g}"
        )

    x_start, f0 = x.copy(), problem.value(x)
    f_bar = problem.value(x_bar)
    records = []
    termination, message = Termination.MAX_ITER, ""
    fx = f0
    for k in range(max_iter):
        g, lam = schedule.gamma(k), schedule.lam(k)
        cc = derive_constants(g, lam, problem.rho, locality.delta, sigma, beta=locality.beta)
        try:
            res = solve_fixed_point(x, cc, problem, x_bar, inner_tol)
        except NonconvergenceError as e:
            termination, message = Termination.INNER_FAILURE, str(e)
            break
        except LocalityError as e:
            termination, message = Termination.LOCALITY_VIOLATION, str(e)
            break
        x_next = res.y
        f_next = problem.value(x_next)
        step = float(np.linalg.norm(x_next - x))
        fejer_ok = all(
            _fejer_gap(x, x_next, f_next, lam, c, fc) <= FEJER_SLACK for c, fc in ((x_bar, f_bar), (x, fx))
        )
        records.append(
            IterationRecord(
                k=k, x_k=x, z_k=res.z, x_next=x_next, f_x_k=fx, f_x_next=f_next, step_norm=step,
                inner_iterations=res.inner_iterations, inner_residual=res.residual,
                descent_gap=fx - f_next - step * step / (2.0 * lam),
                fejer_ok=fejer_ok, gamma_k=g, lambda_k=lam,
            )
        )
        x, fx = x_next, f_next
        dist = float(np.linalg.norm(x - x_bar))
        if dist > locality.beta + CONFINEMENT_SLACK:
            termination = Termination.LOCALITY_VIOLATION
            message = f"x^{k + 1} ∈ B[x̄, β] violated: ‖x − x̄‖={dist:.6g} > β={locality.beta:.6g}"
            break
        if step <= eps:
            termination = Termination.STEP_BELOW_EPS
            break

    observed = min([f0] + [r.f_x_next for r in records])
    f_used = f_star if f_star is not None else observed
    return RunReport(
        records=records,
        termination=termination,
        T=len(records),
        x0=x_start,
        f0=f0,
        x_final=x,
        f_star_estimate=f_used,
        sum_sq_steps=float(sum(r.step_norm ** 2 for r in records)),
        complexity_bound=complexity_bound(problem.rho, f0, min(f_used, f0), eps),
        eps=eps,
        f_star_certified=f_star,
        f_star_observed=observed,
        f_star_disagreement=f_star is not None and observed < f_star - 1e-12,
        message=message,
    )


# ---------------------------------------------------------------------------
# instrumentation


def check_fejer(
    report: RunReport,
    problem: Problem,
    locality: LocalityConfig,
    schedule: Optional[Schedule] = None,
    samples: int = 20,
    seed: int = 0,
    slack: float = FEJER_SLACK,
) -> CheckReport:
    """``|x^{k+1} - x|^2 <= |x^k - x|^2 + 2 lam_k (f(x) - f(x^{k+1}))`` over the trace.

    ``x`` ranges over ``samples`` seeded points of ``B[x_bar, beta]`` plus
    every recorded ``x^k``. Gaps are scaled by ``1 + |x|^2``. The step sizes
    come from the records, so ``schedule`` is only cross-checked.
    """
    if not report.records:
        raise ParameterError("check_fejer needs at least one iteration record")
    if schedule is not None:
        for r in report.records:
            if r.lambda_k != schedule.lam(r.k):
                raise ParameterError(f"record {r.k} was not produced by this schedule")
    rng = child_rng(seed, "fejer")
    pts = list(sample_ball(rng, locality.x_bar, locality.beta, samples))
    pts += [r.x_k for r in report.records]
    fvals = [problem.value(p) for p in pts]
    worst, witness = -math.inf, {}
    for r in report.records:
        for p, fp in zip(pts, fvals):
            gap = _fejer_gap(r.x_k, r.x_next, r.f_x_next, r.lambda_k, p, fp)
            if gap > worst:
                worst, witness = gap, {"k": r.k, "x": p}
    return make_report("fejer", worst, slack, witness, len(pts))


def check_descent(report: RunReport, slack: float = DESCENT_SLACK) -> CheckReport:
    """``|x^k - x^{k+1}|^2 / (2 lam_k) <= f(x^k) - f(x^{k+1})`` at every step."""
    if not report.records:
        return make_report("descent", -math.inf, slack, {}, 0)
    # recomputed from the stored points, not the recorded gap
    gaps = np.array([
        float((r.x_next - r.x_k) @ (r.x_next - r.x_k)) / (2.0 * r.lambda_k) - (r.f_x_k - r.f_x_next)
        for r in report.records
    ])
    i = int(np.argmax(gaps))
    return make_report("descent", gaps[i], slack, {"k": report.records[i].k}, len(gaps))


def check_summability(report: RunReport, problem: Problem, slack: float = 1e-8) -> CheckReport:
    """Partial sums of ``|x^k - x^{k+1}|^2`` stay below ``(2/rho)(f(x^0) - f(x^{k+1}))``."""
    rho = problem.rho
    total, worst, witness = 0.0, -math.inf, {}
    for r in report.records:
        total += r.step_norm ** 2
        gap = total - (2.0 / rho) * (report.f0 - r.f_x_next)
        if gap > worst:
            worst, witness = gap, {"k": r.k, "partial_sum": total}
    if not report.records:
        worst = 0.0
    witness["sum_sq_steps"] = total
    witness["bound"] = (2.0 / rho) * (report.f0 - report.f_final)
    return make_report("summability", worst, slack, witness, len(report.records))


def check_complexity(report: RunReport) -> CheckReport:
    """``T < 2 + (2/rho)(f(x^0) - f*) eps^-2`` for runs that met the step criterion."""
    if report.termination != Termination.STEP_BELOW_EPS:
        return make_report("complexity", math.inf, 0.0, {"termination": report.termination.value}, 0, strict=True)
    return make_report(
        "complexity",
        report.T - report.complexity_bound,
        0.0,
        {"T": report.T, "bound": report.complexity_bound},
        1,
        strict=True,
    )


def pair_argmin(z: Sequence[float], tau: float) -> int:
    """1-based ``m(k) = argmin_{j < k} z_j^tau + z_{j+1}^tau``; first index on ties."""
    zt = np.asarray(z, dtype=float) ** tau
    if zt.size < 2:
        raise ParameterError("need k >= 2 terms")
    return int(np.argmin(zt[:-1] + zt[1:])) + 1


def lemma45_pair_bound(step_norms: Sequence[float], bound_lambda: float, tau: float) -> CheckReport:
    """Check ``max{z_m, z_{m+1}} <= (2 lambda / (k - 1))^(1/tau)`` at ``m = pair_argmin(z)``.

    If the premise ``sum z_j^tau <= lambda`` fails the report passes with
    ``premise_met = False``: nothing is claimed then.
    """
    z = np.asarray(step_norms, dtype=float)
    k = z.size
    if k < 2:
        raise ParameterError(f"k ≥ 2 violated: k={k}")
    if np.any(z < 0):
        raise ParameterError("terms must be nonnegative")
    if not tau > 0 or not bound_lambda > 0:
        raise ParameterError("τ > 0 and λ > 0 required")
    total = float(np.sum(z ** tau))
    m = pair_argmin(z, tau)
    bound = (2.0 * bound_lambda / (k - 1)) ** (1.0 / tau)
    pair_max = float(max(z[m - 1], z[m]))
    witness = {"premise_met": total <= bound_lambda, "sum": total, "m": m, "pair_max": pair_max, "bound": bound}
    if total > bound_lambda:
        return make_report("pair-bound", 0.0, 0.0, witness, k)
    return make_report("pair-bound", pair_max - bound, 1e-12 * max(1.0, bound), witness, k)


def check_assumption1(
    problem: Problem,
    gamma: float,
    x_bar,
    delta: float,
    samples: int = 200,
    seed: int = 0,
    slack: float = 1e-8,
    search_radius: Optional[float] = None,
) -> CheckReport:
    """Sampled convexity of ``e_gamma f`` on ``B[x_bar, delta]``.

    Tests the secant inequality on triples ``(u, v, alpha)`` and monotonicity
    of the envelope gradient on the pairs ``(u, v)``. A pass is evidence, not
    a certificate.
    """
    from .envelope import ProxQuery, prox

    if not gamma * problem.rho < 1.0:
        raise ParameterError(f"γρ < 1 violated: γ={gamma}, ρ={problem.rho}")
    radius = search_radius if search_radius is not None else max(problem.locality_radius, delta)
    rng = child_rng(seed, "assumption1")
    x_bar = as_point(x_bar, problem.dimension)
    U = sample_ball(rng, x_bar, delta, samples)
    V = sample_ball(rng, x_bar, delta, samples)
    A = rng.uniform(0.0, 1.0, size=samples)

    def env(u):
        r = prox(ProxQuery(problem, gamma, u, radius))
        return r.envelope_value, r.gradient

    worst, witness = -math.inf, {}
    for u, v, a in zip(U, V, A):
        eu, gu = env(u)
        ev, gv = env(v)
        em, _ = env(a * u + (1.0 - a) * v)
        secant = em - (a * eu + (1.0 - a) * ev)
        monotone = -float((gu - gv) @ (u - v))
        for kind, viol in (("secant", secant), ("monotone", monotone)):
            if viol > worst:
                worst, witness = viol, {"kind": kind, "u": u, "v": v, "alpha": a}
    return make_report("assumption1", worst, slack, witness, samples)


# ---------------------------------------------------------------------------
# baseline


@dataclass(frozen=True)
class StepRule:
    kind: str
    c: float

    def __post_init__(self):
        if self.kind not in ("constant", "diminishing"):
            raise ParameterError(f"unknown step rule {self.kind!r}")
        if not self.c > 0:
            raise ParameterError("step constant must be positive")

    @classmethod
    def parse(cls, text: str) -> "StepRule":
        kind, _, c = text.partition(":")
        return cls(kind.strip(), float(c) if c else 0.1)

    def __call__(self, k: int) -> float:
        return self.c if self.kind == "constant" else self.c / math.sqrt(k + 1)


def subgradient_baseline(
    problem: Problem,
    x0,
    steps: int,
    step_rule,
    eps: Optional[float] = None,
) -> RunReport:
    """Plain subgradient method ``x <- x - t_k v`` for comparison.

    Records reuse :class:`IterationRecord` with ``z_k = x_k`` and the step
    size in ``lambda_k``; the descent and Fejer fields are reported, not
    guaranteed.
    """
    if isinstance(step_rule, str):
        step_rule = StepRule.parse(step_rule)
    x = as_point(x0, problem.dimension)
    x_start = x.copy()
    fx = f0 = problem.value(x)
    records = []
    termination = Termination.MAX_ITER
    for k in range(steps):
        t = step_rule(k)
        x_next = x - t * problem.subgradient(x)
        f_next = problem.value(x_next)
        step = float(np.linalg.norm(x_next - x))
        records.append(
            IterationRecord(
                k=k, x_k=x, z_k=x, x_next=x_next, f_x_k=fx, f_x_next=f_next, step_norm=step,
                inner_iterations=0, inner_residual=0.0,
                descent_gap=fx - f_next - step * step / (2.0 * t),
                fejer_ok=f_next <= fx + FEJER_SLACK * (1.0 + float(x @ x)),
                gamma_k=math.nan, lambda_k=t,
            )
        )
        x, fx = x_next, f_next
        if eps is not None and step <= eps:
            termination = Termination.STEP_BELOW_EPS
            break
    observed = min([f0] + [r.f_x_next for r in records])
    return RunReport(
        records=records,
        termination=termination,
        T=len(records),
        x0=x_start,
        f0=f0,
        x_final=x,
        f_star_estimate=observed,
        sum_sq_steps=float(sum(r.step_norm ** 2 for r in records)),
        complexity_bound=math.nan,
        eps=eps if eps is not None else math.nan,
        f_star_observed=observed,
        method="subgradient",
    )
