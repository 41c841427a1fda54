"""Iteration counts of the proximal point method against the subgradient baseline."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from ..algorithm import complexity_bound, run, subgradient_baseline
from .config import ExperimentConfig, config_from_mapping
from .output import csv_text

BENCH_COLUMNS = ("eps", "T_prox", "bound_T", "T_subgrad", "f_final_prox", "f_final_subgrad")
BASELINE_RULE = "diminishing:0.1"
BASELINE_STEPS = 100_000


def bench_row(cfg: ExperimentConfig, eps: float, baseline_rule=BASELINE_RULE, baseline_steps=BASELINE_STEPS) -> dict:
    """One table row; ``bound_T`` uses ``f(x_bar)`` as the certified local minimum."""
    p = cfg.problem
    f_star = p.value(cfg.x_bar)
    rep = run(
        p, cfg.x0, cfg.schedule, cfg.locality, eps,
        max_iter=cfg.max_iter, inner_tol=cfg.inner_tol, sigma=cfg.sigma, f_star=f_star,
    )
    base = subgradient_baseline(p, cfg.x0, baseline_steps, baseline_rule, eps)
    return {
        "eps": float(eps),
        "T_prox": rep.T,
        "bound_T": complexity_bound(p.rho, rep.f0, f_star, eps),
        "T_subgrad": base.T,
        "f_final_prox": rep.f_final,
        "f_final_subgrad": base.f_final,
        "termination_prox": rep.termination.value,
        "termination_subgrad": base.termination.value,
    }


def bench(
    problem_id: str,
    eps_list: Sequence[float],
    out=None,
    overrides: Optional[dict] = None,
    workers: int = 1,
    baseline_rule: str = BASELINE_RULE,
    baseline_steps: int = BASELINE_STEPS,
) -> list:
    """Run both methods for every ``eps``; rows keep the order of ``eps_list``.

    ``overrides`` are config keys (``x0``, ``gamma``, ...) on top of the
    instance preset. When ``out`` is given the table is written there as CSV.
    """
    cfg = config_from_mapping({"problem": problem_id, **(overrides or {})})
    eps_list = [float(e) for e in eps_list]

    def one(eps):
        return bench_row(cfg, eps, baseline_rule, baseline_steps)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, eps_list))
    else:
        rows = [one(e) for e in eps_list]
    if out is not None:
        from pathlib import Path

        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(bench_csv(rows))
    return rows


def bench_csv(rows) -> str:
    return csv_text(BENCH_COLUMNS, ([r[c] for c in BENCH_COLUMNS] for r in rows))
