import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import closed_form_prox
from wcprox import _kernels
from wcprox.errors import LocalityError, NonconvergenceError, ParameterError, ScheduleError
from wcprox.fixedpoint import (
    S_map,
    default_max_iter,
    derive_constants,
    lipschitz_constant,
    phi_map,
    recover_prox,
    solve_fixed_point,
    verify_prox_identity,
)
from wcprox.problems import Box, Problem, get_instance, make_abs_quadratic, make_example1, make_quadratic


def test_constants_explicit_sigma():
    cc = derive_constants(0.25, 0.6, 1.0, 1.0, sigma=0.05)
    # 1 + 1.4 (1 + 4/3) = 64/15
    assert cc.L == pytest.approx(64 / 15, rel=1e-15)
    assert cc.kappa == pytest.approx(1 - 0.1 + 0.0025 * (64 / 15) ** 2, rel=1e-15)
    assert cc.kappa == pytest.approx(0.945511, abs=1e-6)


def test_constants_default_sigma():
    cc = derive_constants(0.25, 0.6, 1.0, 1.0)
    assert cc.sigma == pytest.approx(225 / 4096, rel=1e-14)
    assert cc.kappa == pytest.approx(1 - 225 / 4096, rel=1e-14)
    bound = min(1.0, 1.0 / cc.sigma * (1 - math.sqrt(cc.kappa)))
    assert cc.beta == pytest.approx(0.9 * bound, rel=1e-14)
    assert 0 < cc.beta < cc.beta_bound


def test_constants_limit_lambda_to_gamma():
    # outside the admissible range 2 gam < lam, so only the formulas are checked
    assert lipschitz_constant(0.2, 0.2, 1.0) == 1.0
    for h in (1e-3, 1e-6, 1e-9):
        L = lipschitz_constant(0.2, 0.2 + h, 1.0)
        assert 1.0 < L < 1.0 + 10 * h / 0.2
        kappa = 1 - 2 * 0.5 + 0.25 * L * L
        assert kappa == pytest.approx(0.25, abs=10 * h / 0.2)


def test_sigma_above_bound_rejected():
    with pytest.raises(ParameterError, match="σ < 2/L²"):
        derive_constants(0.25, 0.6, 1.0, 1.0, sigma=0.2)
    # 2/L^2 = 2 * 225 / 4096
    with pytest.raises(ParameterError, match="0.109863"):
        derive_constants(0.25, 0.6, 1.0, 1.0, sigma=0.2)


@pytest.mark.parametrize(
    "gamma,lam,rho,needle",
    [(0.25, 0.45, 2.0, "2γ < λ"), (0.1, 0.6, 2.0, "λ < 1/ρ"), (0.0, 0.3, 1.0, "0 < 2γ")],
)
def test_schedule_errors(gamma, lam, rho, needle):
    with pytest.raises(ScheduleError, match=needle):
        derive_constants(gamma, lam, rho, 0.2)


def test_beta_bound_enforced():
    cc = derive_constants(0.1, 0.25, 2.0, 0.2)
    with pytest.raises(ParameterError, match="β <"):
        derive_constants(0.1, 0.25, 2.0, 0.2, beta=cc.beta_bound)
    with pytest.raises(ParameterError, match="δ > 0"):
        derive_constants(0.1, 0.25, 2.0, 0.0)


def test_S_map_examples():
    p, s = make_example1()
    cc = derive_constants(0.1, 0.25, 2.0, 0.2)
    assert S_map(1.02, cc, p)[0] == pytest.approx(1.05, abs=1e-14)
    assert S_map(s.x_bar, cc, p)[0] == 1.0
    q, _ = make_quadratic()
    cq = derive_constants(0.5, 1.5, q.rho, 2.0)
    assert S_map(1.0, cq, q)[0] == pytest.approx(5 / 3, abs=1e-14)


def test_solve_example1():
    p, s = make_example1()
    cc = derive_constants(0.1, 0.25, 2.0, 0.2)
    r = solve_fixed_point(1.05, cc, p, s.x_bar, tol=1e-10)
    # on B[1, 2 gam]: z (1 + (lam - gam)/gam) = x + (lam - gam)/gam, so z = (gam x + lam - gam)/lam
    assert abs(r.z[0] - (0.1 * 1.05 + 0.15) / 0.25) <= 1e-8
    assert abs(r.y[0] - 1.0) <= 1e-8
    assert r.residual <= 1e-10
    assert r.contraction_ratio_observed <= cc.sqrt_kappa + 1e-9
    assert verify_prox_identity(r, p, cc, tol=1e-10).passed


def test_solve_at_stationary_point():
    p, s = make_example1()
    cc = derive_constants(0.1, 0.25, 2.0, 0.2)
    r = solve_fixed_point(s.x_bar, cc, p, s.x_bar)
    assert r.inner_iterations <= 1
    assert r.z[0] == 1.0 and r.y[0] == 1.0


def test_solve_quadratic_closed_form():
    q, s = make_quadratic()
    cc = derive_constants(0.5, 1.5, q.rho, 2.0)
    r = solve_fixed_point(0.5, cc, q, s.x_bar, tol=1e-12)
    assert r.y[0] == pytest.approx(0.5 / 2.5, abs=1e-10)
    r3 = solve_fixed_point(3.0, derive_constants(0.5, 1.5, q.rho, 4.0), q.with_rho(q.rho), s.x_bar, tol=1e-12)
    assert r3.y[0] == pytest.approx(1.2, abs=1e-10)


def test_solve_abs_quadratic_matches_grid():
    p, s = make_abs_quadratic()
    cc = derive_constants(0.1, 0.25, 2.0, 0.2)
    r = solve_fixed_point(1.15, cc, p, s.x_bar, tol=1e-10)
    rep = verify_prox_identity(r, p, cc, tol=1e-10)
    assert rep.passed
    assert rep.witness["error"] <= 1e-5


def test_nonconvergence_carries_best():
    p, s = make_example1()
    cc = derive_constants(0.1, 0.25, 2.0, 0.2)
    with pytest.raises(NonconvergenceError) as ei:
        solve_fixed_point(1.05, cc, p, s.x_bar, tol=1e-10, max_iter=3)
    assert ei.value.best is not None and ei.value.residual > 1e-10


def test_locality_violation_outside_ball():
    p, s = make_example1()
    cc = derive_constants(0.1, 0.25, 2.0, 0.05)
    with pytest.raises(LocalityError):
        solve_fixed_point(1.18, cc, p, s.x_bar, tol=1e-10)


def test_default_max_iter_formula():
    cc = derive_constants(0.1, 0.25, 2.0, 0.2)
    n = math.log(1e-10 / (cc.sigma * 0.4)) / math.log(cc.sqrt_kappa)
    assert default_max_iter(cc, 1e-10) == math.ceil(n) + 10


@pytest.mark.parametrize("x", [1.05, 1.08, 0.93, 1.0])
def test_backends_identical(x, python_backend):
    p, s = make_abs_quadratic()
    cc = derive_constants(0.1, 0.25, 2.0, 0.2)
    slow = solve_fixed_point(x, cc, p, s.x_bar)
    _kernels.set_backend("auto")
    fast = solve_fixed_point(x, cc, p, s.x_bar)
    assert slow.backend == "python"
    assert fast.backend == ("compiled" if _kernels.COMPILED_AVAILABLE else "python")
    assert slow.z[0] == fast.z[0] and slow.y[0] == fast.y[0]
    assert slow.inner_iterations == fast.inner_iterations


def test_two_dimensional_solve():
    c = np.array([0.3, -0.2])
    p = Problem("quad2", 2, lambda x: 0.5 * float((x - c) @ (x - c)), lambda x: x - c, 1e-6,
                Box(np.full(2, -5.0), np.full(2, 5.0)), locality_radius=2.0)
    cc = derive_constants(0.5, 1.5, p.rho, 2.0)
    x = c + np.array([0.2, 0.1])
    r = solve_fixed_point(x, cc, p, c, tol=1e-6)
    assert np.allclose(r.y, (x + 1.5 * c) / 2.5, atol=1e-5)
    assert verify_prox_identity(r, p, cc, tol=1e-6).passed


# properties on example1 and abs-quadratic, gamma = 0.1, lambda = 0.25, delta = 0.2

CC = derive_constants(0.1, 0.25, 2.0, 0.2)
ball = st.floats(0.8, 1.2)
instance = st.sampled_from(["example1", "abs-quadratic"])


@settings(max_examples=150, deadline=None)
@given(instance, ball, ball)
def test_S_strongly_monotone(pid, z, w):
    p, _ = get_instance(pid)
    d = S_map(z, CC, p)[0] - S_map(w, CC, p)[0]
    assert d * (z - w) >= (z - w) ** 2 - 1e-8


@settings(max_examples=150, deadline=None)
@given(instance, ball, ball)
def test_S_lipschitz(pid, z, w):
    p, _ = get_instance(pid)
    d = abs(S_map(z, CC, p)[0] - S_map(w, CC, p)[0])
    assert d <= CC.L * abs(z - w) + 1e-8


@settings(max_examples=150, deadline=None)
@given(instance, ball, ball, ball)
def test_phi_contraction(pid, z, w, x):
    p, _ = get_instance(pid)
    d = abs(phi_map(z, x, CC, p)[0] - phi_map(w, x, CC, p)[0])
    assert d <= CC.sqrt_kappa * abs(z - w) + 1e-9


@settings(max_examples=60, deadline=None)
@given(instance, st.floats(1.0 - CC.beta, 1.0 + CC.beta))
def test_chain_identity_and_prox(pid, x):
    p, s = get_instance(pid)
    tol = 1e-10
    r = solve_fixed_point(x, CC, p, s.x_bar, tol=tol)
    lhs = (x - r.z[0]) / (CC.lam - CC.gamma)
    assert abs(lhs - (x - r.y[0]) / CC.lam) <= tol / (CC.lam - CC.gamma)
    assert abs(lhs - (r.z[0] - r.y[0]) / CC.gamma) <= 1e-12 * max(1.0, abs(lhs)) + tol / (CC.lam - CC.gamma)
    bound = 10 * tol / (1 - CC.lam * CC.rho)
    assert abs(r.y[0] - closed_form_prox(CC.lam, x)) <= bound


@settings(max_examples=40, deadline=None)
@given(instance, st.floats(1.0 - CC.beta, 1.0 + CC.beta), st.floats(0.85, 1.15))
def test_uniqueness_from_other_start(pid, x, z0):
    p, s = get_instance(pid)
    tol = 1e-10
    a = solve_fixed_point(x, CC, p, s.x_bar, tol=tol)
    b = solve_fixed_point(x, CC, p, s.x_bar, tol=tol, z0=z0)
    assert abs(a.z[0] - b.z[0]) <= 2 * tol / (1 - CC.sqrt_kappa)


def test_recover_prox_formula():
    cc = derive_constants(0.1, 0.25, 2.0, 0.2)
    assert recover_prox(1.05, 1.02, cc) == pytest.approx(1.0, abs=1e-15)
