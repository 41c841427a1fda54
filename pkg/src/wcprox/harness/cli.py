"""Command-line interface: ``wcprox {run,prox,inner,bench,check,accept}``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .. import __version__
from ..algorithm import (
    check_assumption1,
    check_complexity,
    check_descent,
    check_fejer,
    check_summability,
    run,
    validate_schedule,
)
from ..envelope import ProxQuery, check_prox_lipschitz, prox, prox_grid_oracle
from ..errors import ConfigurationError, WCProxError
from ..fixedpoint import derive_constants, solve_fixed_point
from ..problems import PRESETS, ZOO, check_quadratic_lower_estimator, check_weak_convexity, get_instance
from .acceptance import SUITE_BUDGET, run_acceptance_suite
from .bench import BASELINE_RULE, BASELINE_STEPS, bench, bench_csv
from .config import config_from_mapping, default_output_dir, read_config_mapping
from .output import json_text, write_trace

CHECKS = (
    "weak-convexity",
    "lower-estimator",
    "prox-lipschitz",
    "assumption1",
    "schedule",
    "run-inequalities",
)


def _point(text: str):
    """``"1.05"`` or ``"1,2"`` (also ``;``-separated) to a list of floats."""
    try:
        return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a point: {text!r}")


def _number_or_path(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def _emit(obj):
    sys.stdout.write(json_text(obj))


def _out_path(arg, name: str) -> Path:
    return Path(arg) if arg else default_output_dir() / name


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(a):
    data, base_dir = {}, Path(".")
    if a.config:
        data, base_dir = read_config_mapping(a.config), Path(a.config).parent
    elif not a.problem:
        raise ConfigurationError("run needs --config or --problem")
    flags = {
        "problem": a.problem, "x0": a.x0, "gamma": a.gamma, "lambda": a.lam, "lambda_bar": a.lambda_bar,
        "x_bar": a.x_bar, "delta": a.delta, "sigma": a.sigma, "eps": a.eps,
        "max_iter": a.max_iter, "inner_tol": a.inner_tol,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    data["seed"] = a.seed if a.seed is not None else data.get("seed", 0)
    cfg = config_from_mapping(data, base_dir)
    p = cfg.problem
    rep = run(
        p, cfg.x0, cfg.schedule, cfg.locality, cfg.eps,
        max_iter=cfg.max_iter, inner_tol=cfg.inner_tol, sigma=cfg.sigma, f_star=p.value(cfg.x_bar),
    )
    trace = _out_path(a.out or cfg.output, f"trace_{cfg.problem_id}.csv")
    write_trace(rep, trace)
    summary = rep.summary()
    summary["trace"] = str(trace)
    _emit(summary)
    return 0


def cmd_prox(a):
    p, _ = get_instance(a.problem)
    q = ProxQuery(p, a.lam, np.asarray(a.x), a.search_radius)
    r = prox_grid_oracle(q, a.grid_step) if a.grid_step else prox(q, a.tol, method=a.method)
    d = r.to_dict()
    _emit({k: d[k] for k in ("y", "envelope_value", "gradient", "method", "residual")})
    return 0


def cmd_inner(a):
    p, s = get_instance(a.problem)
    delta = a.delta if a.delta is not None else PRESETS[a.problem].delta
    x_bar = a.x_bar if a.x_bar is not None else s.x_bar
    cc = derive_constants(a.gamma, a.lam, p.rho, delta, a.sigma)
    res = solve_fixed_point(np.asarray(a.x), cc, p, x_bar, tol=a.tol)
    out = res.to_dict()
    out["constants"] = cc.to_dict()
    _emit(out)
    return 0


def cmd_bench(a):
    overrides = {}
    if a.x0 is not None:
        overrides["x0"] = a.x0
    rows = bench(
        a.problem, a.eps, out=None, overrides=overrides, workers=a.workers,
        baseline_rule=a.baseline, baseline_steps=a.baseline_steps,
    )
    path = _out_path(a.out, f"bench_{a.problem}.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    text = bench_csv(rows)
    path.write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_check(a):
    p, s = get_instance(a.problem)
    pre = PRESETS[a.problem]
    gamma = a.gamma if a.gamma is not None else pre.gamma
    delta = a.delta if a.delta is not None else pre.delta
    name = a.name
    if name == "weak-convexity":
        reports = [check_weak_convexity(p, a.samples, a.seed)]
    elif name == "lower-estimator":
        reports = [check_quadratic_lower_estimator(p, a.samples, a.seed)]
    elif name == "prox-lipschitz":
        reports = [check_prox_lipschitz(p, gamma, s.x_bar, delta, pairs=a.samples, seed=a.seed)]
    elif name == "assumption1":
        reports = [check_assumption1(p, gamma, s.x_bar, delta, samples=a.samples, seed=a.seed)]
    elif name == "schedule":
        cfg = config_from_mapping({"problem": a.problem, "gamma": gamma, "delta": delta})
        reports = [validate_schedule(cfg.schedule)]
    else:
        cfg = config_from_mapping({"problem": a.problem, "gamma": gamma, "delta": delta})
        rep = run(p, cfg.x0, cfg.schedule, cfg.locality, cfg.eps, f_star=p.value(cfg.x_bar))
        reports = [
            check_descent(rep),
            check_fejer(rep, p, cfg.locality, cfg.schedule, samples=a.samples, seed=a.seed),
            check_summability(rep, p),
            check_complexity(rep),
        ]
    out = [r.to_dict() for r in reports]
    _emit(out[0] if len(out) == 1 else out)
    return 0 if all(r.passed for r in reports) else 1


def cmd_accept(a):
    corrupt = {}
    for item in a.corrupt_rho or ():
        pid, _, val = item.partition("=")
        try:
            corrupt[pid] = float(val)
        except ValueError:
            raise ConfigurationError(f"--corrupt-rho expects ID=VALUE, got {item!r}")
    out = _out_path(a.out, "acceptance.json")
    code, report, timings = run_acceptance_suite(a.seed, out=out, corrupt_rho=corrupt or None)
    total = 0.0
    for e in report["criteria"]:
        dt = timings[e["id"]]
        total += dt
        status = "PASS" if e["passed"] else "FAIL"
        note = f"  ({e['error']})" if "error" in e else ""
        print(f"{status} {e['id']:<4} {e['name']:<40} {dt:7.3f}s / {e['budget_seconds']:g}s{note}")
    print(f"{'PASS' if code == 0 else 'FAIL'} suite {total:.3f}s / {SUITE_BUDGET:g}s; report: {out}")
    return code


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wcprox", description="Inexact proximal point method for weakly convex functions.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    ids = sorted(ZOO)

    def common(sp, default=0):
        sp.add_argument("--seed", type=int, default=default, help="seed for every sampled quantity (default 0)")

    sp = sub.add_parser("run", help="run the method and write a CSV trace")
    common(sp, None)
    sp.add_argument("--config", help="JSON config file")
    sp.add_argument("--problem", choices=ids)
    sp.add_argument("--x0", type=_point)
    sp.add_argument("--gamma", type=_number_or_path, help="number or path to a sequence file")
    sp.add_argument("--lambda", dest="lam", type=_number_or_path, help="number or path to a sequence file")
    sp.add_argument("--lambda-bar", type=float)
    sp.add_argument("--x-bar", type=_point)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--max-iter", type=int)
    sp.add_argument("--inner-tol", type=float)
    sp.add_argument("--out", help="trace CSV path (default $WCPROX_OUTPUT_DIR/trace_<problem>.csv)")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("prox", help="evaluate the prox, envelope and envelope gradient")
    common(sp)
    sp.add_argument("--problem", choices=ids, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--x", type=_point, required=True)
    sp.add_argument("--grid-step", type=float, help="use the grid oracle with this pitch")
    sp.add_argument("--search-radius", type=float)
    sp.add_argument("--method", choices=("analytic", "numerical"))
    sp.add_argument("--tol", type=float, default=1e-14)
    sp.set_defaults(func=cmd_prox)

    sp = sub.add_parser("inner", help="solve the implicit step by the contraction iteration")
    common(sp)
    sp.add_argument("--problem", choices=ids, required=True)
    sp.add_argument("--x", type=_point, required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--x-bar", type=_point)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_inner)

    sp = sub.add_parser("bench", help="iteration counts against the subgradient baseline")
    common(sp)
    sp.add_argument("--problem", choices=ids, required=True)
    sp.add_argument("--eps", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3])
    sp.add_argument("--x0", type=_point)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--baseline", default=BASELINE_RULE, help="step rule, e.g. diminishing:0.1 or constant:0.01")
    sp.add_argument("--baseline-steps", type=int, default=BASELINE_STEPS)
    sp.add_argument("--out", help="CSV path (default $WCPROX_OUTPUT_DIR/bench_<problem>.csv)")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("check", help="run one named checker; exit 1 if it fails")
    common(sp)
    sp.add_argument("name", choices=CHECKS)
    sp.add_argument("--problem", choices=ids, required=True)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--delta", type=float)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("accept", help="run the acceptance suite")
    common(sp)
    sp.add_argument("--out", help="JSON report path (default $WCPROX_OUTPUT_DIR/acceptance.json)")
    sp.add_argument("--corrupt-rho", action="append", metavar="ID=VALUE", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_accept)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WCProxError as exc:
        print(f"wcprox {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
