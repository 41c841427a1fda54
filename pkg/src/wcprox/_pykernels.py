"""Pure-Python versions of the hot loops.

They take oracles as callables so they work for any :class:`Problem`; the
compiled core in ``_ckernels`` specialises the same loops to the zoo.
"""
import numpy as np

BRACKET_OK = 0
BRACKET_LOW = 1  # minimiser lies below the bracket
BRACKET_HIGH = 2  # minimiser lies above the bracket

_CHUNK = 1 << 20


def grid_argmin_1d(values, x, lam, lo, step, npts):
    """First index of the minimum of ``f(y) + (y - x)^2 / (2 lam)`` on ``y_i = lo + i*step``."""
    best_i, best_v = -1, np.inf
    inv2l = 0.5 / lam
    for start in range(0, npts, _CHUNK):
        idx = np.arange(start, min(npts, start + _CHUNK), dtype=float)
        y = lo + idx * step
        phi = values(y[:, None]) + (y - x) ** 2 * inv2l
        j = int(np.argmin(phi))
        if phi[j] < best_v:
            best_i, best_v = start + j, float(phi[j])
    return best_i, best_v


def bisect_prox_1d(sub, x, lam, lo, hi, tol, maxit):
    """Bisection on the (monotone) subgradient of ``f(y) + (y - x)^2 / (2 lam)``.

    Returns ``(lo, hi, iterations, status)``; on success the prox lies in
    ``[lo, hi]``.
    """
    g = sub(lo) + (lo - x) / lam
    if g > 0.0:
        return lo, hi, 0, BRACKET_LOW
    if g == 0.0:
        return lo, lo, 0, BRACKET_OK
    g = sub(hi) + (hi - x) / lam
    if g < 0.0:
        return lo, hi, 0, BRACKET_HIGH
    if g == 0.0:
        return hi, hi, 0, BRACKET_OK
    it = 0
    while hi - lo > 2.0 * tol and it < maxit:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = sub(mid) + (mid - x) / lam
        it += 1
        if g > 0.0:
            hi = mid
        elif g < 0.0:
            lo = mid
        else:
            lo = hi = mid
            break
    return lo, hi, it, BRACKET_OK
