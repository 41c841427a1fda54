"""Backend selection for the hot loops.

The compiled core is used when it imported successfully, the problem carries
a ``kernel`` spec and the backend has not been forced to ``"python"`` (via
:func:`set_backend` or ``WCPROX_BACKEND=python``).
"""
import os

from . import _pykernels
from ._pykernels import BRACKET_HIGH, BRACKET_LOW, BRACKET_OK  # noqa: F401

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

COMPILED_AVAILABLE = _ckernels is not None

FP_OK, FP_NONCONVERGED, FP_LEFT_BALL, FP_PROX_FAILED = 0, 1, 2, 3

_backend = "python" if os.environ.get("WCPROX_BACKEND", "").lower() == "python" else "auto"


def set_backend(name: str) -> str:
    """Select ``"auto"`` or ``"python"``; returns the previous setting."""
    global _backend
    if name not in ("auto", "python"):
        raise ValueError(f"unknown backend {name!r}")
    prev, _backend = _backend, name
    return prev


def get_backend() -> str:
    return _backend


def active_backend(problem=None) -> str:
    """``"compiled"`` or ``"python"``: the backend ``problem`` would run on."""
    if _backend == "auto" and COMPILED_AVAILABLE and (problem is None or problem.kernel is not None):
        return "compiled"
    return "python"


def _use_compiled(problem) -> bool:
    return active_backend(problem) == "compiled"


def grid_argmin_1d(problem, x, lam, lo, step, npts):
    if _use_compiled(problem):
        kind, params = problem.kernel
        return _ckernels.grid_argmin_1d(kind, params[0], x, lam, lo, step, npts)
    return _pykernels.grid_argmin_1d(problem.values, x, lam, lo, step, npts)


def bisect_prox_1d(problem, x, lam, lo, hi, tol, maxit):
    if _use_compiled(problem):
        kind, params = problem.kernel
        return _ckernels.bisect_prox_1d(kind, params[0], x, lam, lo, hi, tol, maxit)

    def sub(y):
        return problem.subgradient([y])[0]

    return _pykernels.bisect_prox_1d(sub, x, lam, lo, hi, tol, maxit)


def fixed_point_1d(problem, **kw):
    """Compiled Phi iteration, or ``None`` when the Python loop must be used."""
    if not _use_compiled(problem):
        return None
    kind, params = problem.kernel
    return _ckernels.fixed_point_1d(kind, params[0], **kw)
