import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wcprox.errors import ConfigurationError, InstanceError, OutsideDomainError
from wcprox.problems import (
    INFINITE,
    RHO_EFF,
    Box,
    Problem,
    check_quadratic_lower_estimator,
    check_weak_convexity,
    dc_decomposition,
    get_instance,
    make_abs_quadratic,
    make_example1,
    make_quadratic,
)


def _plain(name, f, g, rho, lo=-3.0, hi=3.0, n=1):
    return Problem(name, n, f, g, rho, Box(np.full(n, lo), np.full(n, hi)))


def test_example1_values():
    p, s = make_example1()
    assert p.value([1.0]) == 1.0
    assert p.value([0.0]) == 2.0
    assert p.value([2.0]) == 4.0
    assert p.subgradient([1.0])[0] == 0.0
    assert s.certified and s.x_bar[0] == 1.0


def test_example1_subgradient_branches():
    p, _ = make_example1()
    assert p.subgradient([2.0])[0] == 4.0
    assert p.subgradient([0.5])[0] == -1.0


def test_quadratic_instance():
    p, s = make_quadratic(0.7)
    assert p.rho == RHO_EFF
    assert p.value([0.7]) == 0.0
    assert p.subgradient([0.7])[0] == 0.0
    assert p.analytic_prox.fn(1.0, np.array([1.4]))[0] == pytest.approx(1.05, abs=1e-15)
    assert s.x_bar[0] == 0.7


def test_abs_quadratic_instance():
    p, s = make_abs_quadratic()
    assert p.value([1.0]) == 0.0
    assert p.value([0.0]) == 1.0
    assert p.rho == 2.0
    assert s.x_bar[0] == 1.0


def test_value_outside_region_is_infinite():
    p, _ = make_example1()
    assert p.value([3.5]) == INFINITE
    assert p.values(np.array([[0.0], [3.5]]))[1] == INFINITE


def test_subgradient_outside_region_raises():
    p, _ = make_example1()
    with pytest.raises(OutsideDomainError):
        p.subgradient([4.0])


def test_nonfinite_subgradient_raises():
    p = _plain("bad", lambda x: 0.0, lambda x: np.array([np.nan]), 0.0)
    with pytest.raises(InstanceError):
        p.subgradient([0.0])
    with pytest.raises(InstanceError):
        check_quadratic_lower_estimator(p, samples=10)


def test_degenerate_region_rejected():
    p = _plain("flat", lambda x: 0.0, lambda x: np.zeros(1), 0.0, lo=1.0, hi=1.0)
    with pytest.raises(ConfigurationError):
        check_weak_convexity(p, samples=10)


def test_empty_box_rejected():
    with pytest.raises(ConfigurationError):
        Box.interval(1.0, 0.0)


def test_get_instance_unknown():
    with pytest.raises(ConfigurationError):
        get_instance("rosenbrock")


@pytest.mark.parametrize("pid", ["example1", "quadratic", "abs-quadratic"])
def test_zoo_certified(pid):
    p, _ = get_instance(pid)
    assert check_weak_convexity(p, 10_000, seed=0).passed
    assert check_quadratic_lower_estimator(p, 10_000, seed=0).passed


def test_example1_with_rho_one_fails_with_witness():
    p, _ = make_example1()
    rep = check_weak_convexity(p.with_rho(1.0), 10_000, seed=0)
    assert not rep.passed
    w = rep.witness
    x, y, a = w["x"][0], w["y"][0], w["alpha"]
    f = lambda t: max(2.0 - t * t, t * t)
    # re-evaluate the reported triple independently
    gap = f(a * x + (1 - a) * y) - a * f(x) - (1 - a) * f(y) - 0.5 * a * (1 - a) * (x - y) ** 2
    assert gap > 1e-10
    assert gap == pytest.approx(rep.worst_violation, rel=1e-9, abs=1e-12)


def test_example1_hand_triple_violates_rho_one():
    # secant through -1 and 1 at alpha = 1/2: f(0)=2 > 1 + 1/8 * 4
    f = lambda t: max(2.0 - t * t, t * t)
    assert f(0.0) > 0.5 * f(-1.0) + 0.5 * f(1.0) + 1.0 * 0.25 / 2.0 * 4.0


def test_convex_rho_zero_passes():
    p = _plain("half-norm", lambda x: 0.5 * float(x @ x), lambda x: x.copy(), 0.0, n=2)
    assert check_weak_convexity(p, 2000).passed
    assert check_quadratic_lower_estimator(p, 2000).passed


def test_affine_zero_slack():
    a, b = np.array([0.3, -1.2]), 0.7
    p = _plain("affine", lambda x: float(a @ x) + b, lambda x: a.copy(), 0.0, n=2)
    rep = check_quadratic_lower_estimator(p, 2000)
    assert rep.passed
    assert abs(rep.worst_violation) <= 1e-14


def test_negative_norm_rho_one_fails():
    p = _plain("neg", lambda x: -float(x @ x), lambda x: -2.0 * x, 1.0, n=2)
    assert not check_quadratic_lower_estimator(p, 2000).passed
    # x = 0, |y| = 2: f(y) = -4 but the estimator gives 0 + 0 - 1/2 * 4 = -2
    y = np.array([2.0, 0.0])
    assert p.value(y) < p.value([0.0, 0.0]) + p.subgradient([0.0, 0.0]) @ y - 0.5 * p.rho * (y @ y)


def test_checks_are_seed_deterministic():
    p, _ = make_abs_quadratic()
    a = check_weak_convexity(p, 500, seed=7)
    b = check_weak_convexity(p, 500, seed=7)
    assert a.to_dict() == b.to_dict()
    assert a.samples_used == 500


def test_dc_decomposition_example1():
    p, _ = make_example1()
    xi, rho = dc_decomposition(p)
    assert rho == 2.0
    assert xi(np.array([0.0])) == 2.0
    assert xi(np.array([1.0])) == 2.0
    assert xi(np.array([2.0])) == 8.0


def test_dc_decomposition_convex_is_identity():
    p = _plain("half-norm", lambda x: 0.5 * float(x @ x), lambda x: x.copy(), 0.0)
    xi, rho = dc_decomposition(p)
    for t in (-2.0, 0.3, 1.7):
        assert xi(np.array([t])) == p.value([t])


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(["example1", "abs-quadratic", "quadratic"]),
    st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 1),
)
def test_secant_inequality_property(pid, x, y, a):
    p, _ = get_instance(pid)
    lhs = p.value([a * x + (1 - a) * y])
    rhs = a * p.value([x]) + (1 - a) * p.value([y]) + 0.5 * p.rho * a * (1 - a) * (x - y) ** 2
    assert lhs <= rhs + 1e-10 * (1 + abs(rhs))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["example1", "abs-quadratic"]), st.floats(-3, 3))
def test_dc_part_convex_property(pid, t):
    # xi = f + rho/2 |x|^2 has nondecreasing subgradients
    p, _ = get_instance(pid)
    xi, rho = dc_decomposition(p)
    h = 1e-3
    lo, hi = max(-3.0, t - h), min(3.0, t + h)
    mid = 0.5 * (lo + hi)
    assert xi(np.array([mid])) <= 0.5 * (xi(np.array([lo])) + xi(np.array([hi]))) + 1e-12
