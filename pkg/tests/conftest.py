import numpy as np
import pytest

from wcprox import _kernels

ACCEPTANCE_LINES = []


def closed_form_prox(lam, x):
    """Prox of max{2 - y^2, y^2} and of |y^2 - 1| for lam < 1/2, derived by hand.

    Both functions equal 1 - y^2 + const on |y| < 1 and y^2 + const outside,
    with a kink at +-1, so they share the prox:
    x/(1 - 2 lam) for |x| < 1 - 2 lam, sign(x) on 1 - 2 lam <= |x| <= 1 + 2 lam,
    x/(1 + 2 lam) beyond.
    """
    a = abs(x)
    if a < 1.0 - 2.0 * lam:
        return x / (1.0 - 2.0 * lam)
    if a <= 1.0 + 2.0 * lam:
        return float(np.sign(x))
    return x / (1.0 + 2.0 * lam)


@pytest.fixture
def python_backend():
    prev = _kernels.set_backend("python")
    yield
    _kernels.set_backend(prev)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
