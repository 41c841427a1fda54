"""Acceptance suite: fixture, property and negative-control criteria.

Each criterion returns ``(passed, details)``; details hold only seeded,
deterministic quantities so two runs with one seed write identical reports.
Wall-clock times are returned alongside the report, never inside it.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..algorithm import (
    Schedule,
    check_assumption1,
    check_descent,
    check_fejer,
    check_summability,
    lemma45_pair_bound,
    make_locality,
    pair_argmin,
    run,
    validate_schedule,
)
from ..envelope import ProxQuery, envelope_gradient, envelope_value, prox, prox_grid_oracle
from ..errors import ParameterError, WCProxError
from ..fixedpoint import derive_constants, phi_map, solve_fixed_point, verify_prox_identity
from ..problems import PRESETS, ZOO, check_quadratic_lower_estimator, check_weak_convexity, get_instance
from ..report import child_rng, sample_ball
from .bench import bench
from .output import write_json


@dataclass(frozen=True)
class Criterion:
    id: str
    name: str
    budget: float
    fn: Callable


class _Zoo:
    """Zoo lookup with optional misdeclared moduli (negative-control hook)."""

    def __init__(self, corrupt_rho: Optional[dict] = None):
        self.corrupt = dict(corrupt_rho or {})
        for pid in self.corrupt:
            if pid not in ZOO:
                raise ValueError(f"unknown instance {pid!r} in corrupt_rho")

    def get(self, pid):
        p, s = get_instance(pid)
        if pid in self.corrupt:
            p = p.with_rho(self.corrupt[pid])
        return p, s


# ---------------------------------------------------------------------------
# criteria


def c_zoo(zoo, seed):
    out, ok = {}, True
    for pid in ZOO:
        p, _ = zoo.get(pid)
        wc = check_weak_convexity(p, 10_000, seed)
        le = check_quadratic_lower_estimator(p, 10_000, seed)
        ok &= wc.passed and le.passed
        out[pid] = {"rho": p.rho, "weak_convexity": wc.to_dict(), "lower_estimator": le.to_dict()}
    return ok, out


def c1(zoo, seed):
    p, _ = zoo.get("example1")
    lam, worst_y, worst_e, rows = 0.1, 0.0, 0.0, []
    for x in (0.95, 1.05, 1.19):
        for method in ("analytic", "numerical"):
            r = prox(ProxQuery(p, lam, x), method=method)
            dy = abs(float(r.y[0]) - 1.0)
            de = abs(r.envelope_value - (1.0 + (x - 1.0) ** 2 / (2.0 * lam)))
            worst_y, worst_e = max(worst_y, dy), max(worst_e, de)
            rows.append({"x": x, "method": method, "y": float(r.y[0]), "envelope": r.envelope_value})
    return worst_y <= 1e-8 and worst_e <= 1e-8, {"max_y_error": worst_y, "max_envelope_error": worst_e, "cases": rows}


def c2(zoo, seed, h=1e-6, rtol=1e-5):
    out, ok = {}, True
    for pid in ZOO:
        p, s = zoo.get(pid)
        pre = PRESETS[pid]
        rng = child_rng(seed, f"acceptance-gradient-{pid}")
        pts = sample_ball(rng, s.x_bar, pre.delta, 20)
        radius = 2.0 * pre.delta
        worst, at = 0.0, None
        for x in pts:
            g = envelope_gradient(ProxQuery(p, pre.gamma, x, radius))
            fd = np.empty_like(x)
            for i in range(x.size):
                e = np.zeros_like(x)
                e[i] = h
                fd[i] = (envelope_value(ProxQuery(p, pre.gamma, x + e, radius))
                         - envelope_value(ProxQuery(p, pre.gamma, x - e, radius))) / (2.0 * h)
            rel = float(np.linalg.norm(fd - g) / max(float(np.linalg.norm(g)), 1.0))
            if rel >= worst:
                worst, at = rel, x
        ok &= worst <= rtol
        out[pid] = {"gamma": pre.gamma, "max_relative_error": worst, "worst_point": at}
    return ok, out


def c3(zoo, seed, pairs=1000):
    p, s = zoo.get("example1")
    cc = derive_constants(0.1, 0.25, p.rho, 0.2)
    rng = child_rng(seed, "acceptance-contraction")
    Z = sample_ball(rng, s.x_bar, cc.delta, pairs)
    W = sample_ball(rng, s.x_bar, cc.delta, pairs)
    worst, witness = 0.0, None
    for z, w in zip(Z, W):
        d = float(np.linalg.norm(z - w))
        if d == 0.0:
            continue
        ratio = float(np.linalg.norm(phi_map(z, s.x_bar, cc, p) - phi_map(w, s.x_bar, cc, p))) / d
        if ratio > worst:
            worst, witness = ratio, (z, w)
    limit = cc.sqrt_kappa + 1e-9
    return worst <= limit, {"max_ratio": worst, "sqrt_kappa": cc.sqrt_kappa, "sigma": cc.sigma, "witness": witness}


def c4(zoo, seed):
    p, s = zoo.get("example1")
    cc = derive_constants(0.1, 0.25, p.rho, 0.2)
    res = solve_fixed_point(1.05, cc, p, s.x_bar, tol=1e-10)
    ver = verify_prox_identity(res, p, cc, tol=1e-10, grid_step=1e-6)
    dz = abs(float(res.z[0]) - 1.02)
    dy = abs(float(res.y[0]) - 1.0)
    ok = dz <= 1e-8 and dy <= 1e-8 and ver.passed
    return ok, {"z": float(res.z[0]), "y": float(res.y[0]), "z_error": dz, "y_error": dy,
                "inner_iterations": res.inner_iterations, "identity": ver.to_dict()}


def _preset_run(zoo, pid, eps=1e-8):
    p, s = zoo.get(pid)
    pre = PRESETS[pid]
    sched = Schedule.constant(pre.gamma, pre.lam, pre.lambda_bar, p.rho)
    loc = make_locality(s.x_bar, pre.delta, sched)
    rep = run(p, pre.x0, sched, loc, eps, f_star=p.value(s.x_bar))
    return p, sched, loc, rep


def c5(zoo, seed):
    out, ok = {}, True
    for pid in ZOO:
        p, sched, loc, rep = _preset_run(zoo, pid)
        d = check_descent(rep)
        f = check_fejer(rep, p, loc, sched, samples=20, seed=seed)
        sm = check_summability(rep, p)
        ok &= d.passed and f.passed and sm.passed
        out[pid] = {"T": rep.T, "descent": d.to_dict(), "fejer": f.to_dict(), "summability": sm.to_dict()}
    return ok, out


def c6(zoo, seed):
    out, ok = {}, True
    for pid in ("example1", "abs-quadratic"):
        p, _ = zoo.get(pid)
        overrides = {} if p.rho == get_instance(pid)[0].rho else {"rho": p.rho}
        rows = bench(pid, [1e-1, 1e-2, 1e-3], overrides=overrides)
        ok &= all(r["T_prox"] < r["bound_T"] for r in rows)
        out[pid] = rows
    return ok, out


def c7(zoo, seed):
    out, ok = {}, True
    for pid in ("example1", "abs-quadratic"):
        _, _, _, rep = _preset_run(zoo, pid)
        err = float(np.linalg.norm(rep.x_final - 1.0))
        good = err <= 1e-6 and rep.termination.value == "step_below_eps"
        ok &= good
        out[pid] = {"x0": PRESETS[pid].x0, "x_final": rep.x_final, "error": err,
                    "termination": rep.termination.value, "T": rep.T}
    return ok, out


def c8(zoo, seed, draws=50):
    p, _ = zoo.get("abs-quadratic")
    rng = child_rng(seed, "acceptance-oracle")
    worst, witness = 0.0, None
    for _ in range(draws):
        gam = float(rng.uniform(0.0, 0.45))
        x = float(rng.uniform(0.6, 1.4))
        q = ProxQuery(p, gam, x, 0.5)
        a = prox(q, method="numerical")
        b = prox_grid_oracle(q, 1e-6)
        d = abs(float(a.y[0] - b.y[0]))
        if d >= worst:
            worst, witness = d, {"gamma": gam, "x": x, "numerical": float(a.y[0]), "grid": float(b.y[0])}
    return worst <= 1e-5, {"draws": draws, "max_difference": worst, "witness": witness}


def c9(zoo, seed, trials=1000):
    rng = child_rng(seed, "acceptance-pair-bound")
    argmin_ok, bound_ok, premise_count = True, True, 0
    first_failure = None
    for t in range(trials):
        k = int(rng.integers(2, 21))
        tau = int(rng.choice([1, 2]))
        z = rng.exponential(1.0, size=k) * (rng.uniform(size=k) > 0.2)
        total = float(np.sum(z ** tau))
        lam = max(total, 1e-300) * float(rng.uniform(0.5, 2.0))
        # brute force over consecutive pairs, first index on ties
        best, m_true = math.inf, None
        for j in range(k - 1):
            v = z[j] ** tau + z[j + 1] ** tau
            if v < best:
                best, m_true = v, j + 1
        m = pair_argmin(z, tau)
        rep = lemma45_pair_bound(z, lam, tau)
        if rep.witness["premise_met"]:
            premise_count += 1
        if m != m_true:
            argmin_ok = False
            first_failure = first_failure or {"trial": t, "z": z, "tau": tau, "m": m, "m_true": m_true}
        if not rep.passed:
            bound_ok = False
            first_failure = first_failure or {"trial": t, "z": z, "tau": tau, "witness": rep.witness}
    return argmin_ok and bound_ok, {"trials": trials, "premise_met": premise_count,
                                    "argmin_ok": argmin_ok, "bound_ok": bound_ok, "first_failure": first_failure}


def c10(zoo, seed):
    res = {}
    res["schedule_2gamma"] = not validate_schedule(Schedule.constant(0.25, 0.45, 0.3, 2.0)).passed
    res["schedule_inv_rho"] = not validate_schedule(Schedule.constant(0.1, 0.6, 0.15, 2.0)).passed
    try:
        derive_constants(0.25, 0.6, 1.0, 1.0, sigma=0.2)
        res["sigma_bound"] = False
    except ParameterError as exc:
        res["sigma_bound"] = "σ < 2/L²" in str(exc)
    p, s = get_instance("example1")
    a1 = check_assumption1(p, 0.1, s.x_bar, 2.0, seed=seed)
    res["assumption1_delta2"] = not a1.passed
    a1_ok = check_assumption1(p, 0.1, s.x_bar, 0.2, seed=seed)
    res["assumption1_delta02_passes"] = a1_ok.passed
    return all(res.values()), {"rejected": res, "assumption1_witness": a1.to_dict()}


CRITERIA = (
    Criterion("C0", "zoo weak-convexity certificates", 5.0, c_zoo),
    Criterion("C1", "example1 prox fixture", 0.1, c1),
    Criterion("C2", "envelope gradient vs finite differences", 1.0, c2),
    Criterion("C3", "contraction of Phi", 2.0, c3),
    Criterion("C4", "inner solver exactness", 1.0, c4),
    Criterion("C5", "per-iteration inequalities", 5.0, c5),
    Criterion("C6", "complexity bound", 10.0, c6),
    Criterion("C7", "convergence to the stationary point", 5.0, c7),
    Criterion("C8", "numerical prox vs grid oracle", 30.0, c8),
    Criterion("C9", "pair-argmin helper", 2.0, c9),
    Criterion("C10", "negative controls", 1.0, c10),
)
SUITE_BUDGET = 60.0


def run_criterion(c: Criterion, zoo: _Zoo, seed: int):
    """``(entry, seconds)``; errors inside a criterion count as failures."""
    t0 = time.perf_counter()
    try:
        passed, details = c.fn(zoo, seed)
        error = None
    except WCProxError as exc:
        passed, details, error = False, {}, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t0
    entry = {"id": c.id, "name": c.name, "passed": bool(passed), "budget_seconds": c.budget, "details": details}
    if error:
        entry["error"] = error
    return entry, elapsed


def run_acceptance_suite(seed: int = 0, out=None, corrupt_rho: Optional[dict] = None, only=None):
    """Run every criterion.

    Returns ``(exit_status, report, timings)``; ``exit_status`` is 0 when all
    criteria pass. ``corrupt_rho`` maps instance ids to a misdeclared modulus
    and exists only to exercise the failure path. ``report`` is written to
    ``out`` as JSON when given.
    """
    zoo = _Zoo(corrupt_rho)
    entries, timings = [], {}
    for c in CRITERIA:
        if only is not None and c.id not in only:
            continue
        entry, dt = run_criterion(c, zoo, seed)
        entries.append(entry)
        timings[c.id] = dt
    report = {
        "seed": int(seed),
        "corrupt_rho": zoo.corrupt,
        "passed": all(e["passed"] for e in entries),
        "criteria": entries,
    }
    if out is not None:
        write_json(report, out)
    return (0 if report["passed"] else 1), report, timings
