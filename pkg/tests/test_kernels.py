import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wcprox import _kernels, _pykernels
from wcprox.envelope import ProxQuery, prox, prox_grid_oracle
from wcprox.problems import get_instance

pytestmark = pytest.mark.skipif(not _kernels.COMPILED_AVAILABLE, reason="compiled core not built")


def _both(fn):
    prev = _kernels.set_backend("python")
    try:
        slow = fn()
    finally:
        _kernels.set_backend(prev)
    _kernels.set_backend("auto")
    try:
        fast = fn()
    finally:
        _kernels.set_backend(prev)
    return slow, fast


def test_set_backend_validates():
    with pytest.raises(ValueError):
        _kernels.set_backend("gpu")


def test_active_backend_reports():
    p, _ = get_instance("example1")
    prev = _kernels.set_backend("python")
    assert _kernels.active_backend(p) == "python"
    _kernels.set_backend("auto")
    assert _kernels.active_backend(p) == "compiled"
    _kernels.set_backend(prev)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["example1", "abs-quadratic", "quadratic"]), st.floats(0.02, 0.45), st.floats(-2.0, 2.0))
def test_bisection_identical(pid, lam, x):
    p, _ = get_instance(pid)
    slow, fast = _both(lambda: prox(ProxQuery(p, lam, x, 1.0), method="numerical" if pid != "quadratic" else None))
    assert slow.y[0] == fast.y[0]
    assert slow.residual == fast.residual


@pytest.mark.parametrize("pid,lam,x", [("abs-quadratic", 0.1, 1.2), ("example1", 0.3, 0.4), ("abs-quadratic", 0.4, -1.7)])
def test_grid_identical(pid, lam, x):
    p, _ = get_instance(pid)
    slow, fast = _both(lambda: prox_grid_oracle(ProxQuery(p, lam, x, 0.5), 1e-5))
    assert slow.y[0] == fast.y[0]


def test_python_grid_argmin_first_index():
    vals = lambda X: np.zeros(len(X))
    # phi = (y - x)^2/(2 lam) is minimised on the grid point nearest x; ties go to the first
    i, v = _pykernels.grid_argmin_1d(vals, 0.5, 1.0, 0.0, 0.25, 5)
    assert i == 2 and v == 0.0
    i, _ = _pykernels.grid_argmin_1d(vals, 0.125, 1.0, 0.0, 0.25, 5)
    assert i == 0
