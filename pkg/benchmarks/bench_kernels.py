"""Time the compiled core against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each workload is run on both backends; results are checked for equality
before timings are reported.
"""
import argparse
import time

import numpy as np

from wcprox import _kernels
from wcprox.envelope import ProxQuery, prox, prox_grid_oracle
from wcprox.fixedpoint import derive_constants, solve_fixed_point
from wcprox.problems import get_instance


def workloads():
    p, s = get_instance("abs-quadratic")
    cc = derive_constants(0.1, 0.25, p.rho, 0.2)
    xs = np.linspace(0.6, 1.4, 50)

    def grid():
        return [prox_grid_oracle(ProxQuery(p, 0.1, 1.2, 0.5), 1e-6).y[0] for _ in range(5)]

    def bisection():
        return [prox(ProxQuery(p, 0.2, x, 0.5), method="numerical").y[0] for x in xs]

    def inner():
        return [solve_fixed_point(x, cc, p, s.x_bar).y[0] for x in (0.95, 1.0, 1.05, 1.08)]

    return {"grid oracle (5 x 1e6 pts)": grid, "bisection prox (50 pts)": bisection, "inner solve (4 pts)": inner}


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.COMPILED_AVAILABLE:
        raise SystemExit("compiled core not built; run `pip install --no-build-isolation -e .` first")
    print(f"{'workload':<28}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}")
    for name, fn in workloads().items():
        prev = _kernels.set_backend("python")
        t_py, ref = best_of(fn, args.repeat)
        _kernels.set_backend("auto")
        t_c, got = best_of(fn, args.repeat)
        _kernels.set_backend(prev)
        if ref != got:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<28}{t_py:>12.4f}{t_c:>14.4f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
