import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import closed_form_prox
from wcprox.algorithm import (
    LocalityConfig,
    Schedule,
    StepRule,
    Termination,
    check_assumption1,
    check_complexity,
    check_descent,
    check_fejer,
    check_summability,
    complexity_bound,
    lemma45_pair_bound,
    make_locality,
    pair_argmin,
    run,
    subgradient_baseline,
    validate_schedule,
)
from wcprox.envelope import ProxQuery, prox_grid_oracle
from wcprox.errors import ParameterError, PreconditionError, ScheduleError
from wcprox.fixedpoint import derive_constants
from wcprox.problems import PRESETS, get_instance, make_example1, make_quadratic


def _preset(pid, eps=1e-8, x0=None, **kw):
    p, s = get_instance(pid)
    pre = PRESETS[pid]
    sched = Schedule.constant(pre.gamma, pre.lam, pre.lambda_bar, p.rho)
    loc = make_locality(s.x_bar, pre.delta, sched)
    rep = run(p, pre.x0 if x0 is None else x0, sched, loc, eps, f_star=p.value(s.x_bar), **kw)
    return p, s, sched, loc, rep


def test_schedule_examples():
    assert validate_schedule(Schedule.constant(0.2, 0.45, 0.3, 2.0)).passed
    bad = validate_schedule(Schedule.constant(0.25, 0.45, 0.3, 2.0))
    assert not bad.passed and bad.witness["inequality"] == "2γ < λ"
    bad = validate_schedule(Schedule.constant(0.1, 0.6, 0.15, 2.0))
    assert not bad.passed and bad.witness["inequality"] == "λ < 1/ρ"


def test_schedule_boundary_is_strict():
    # 2 gam == lam must fail
    rep = validate_schedule(Schedule.constant(0.2, 0.4, 0.3, 2.0))
    assert not rep.passed and rep.worst_violation == 0.0


def test_schedule_sequence_first_failure():
    s = Schedule((0.1, 0.1, 0.14), (0.25, 0.25, 0.25), 0.15, 2.0)
    rep = validate_schedule(s)
    assert not rep.passed and rep.witness["k"] == 2
    assert validate_schedule(s, horizon=1).passed
    assert s.gamma(10) == 0.14


def test_locality_config_requires_beta_below_delta():
    with pytest.raises(ParameterError):
        LocalityConfig(1.0, 0.2, 0.3)


def test_run_example1():
    p, s, sched, loc, rep = _preset("example1")
    assert rep.records[0].x_next[0] == pytest.approx(1.0, abs=1e-8)
    assert rep.termination == Termination.STEP_BELOW_EPS
    assert rep.records[-1].step_norm <= 1e-8
    assert rep.T == len(rep.records)
    assert abs(rep.x_final[0] - 1.0) <= 1e-6


def test_run_stationary_start():
    p, s, sched, loc, rep = _preset("example1", x0=1.0)
    assert rep.T == 1 and rep.records[0].step_norm == 0.0
    assert rep.sum_sq_steps == 0.0
    assert check_summability(rep, p).passed


def test_run_quadratic_geometric():
    p, s, sched, loc, rep = _preset("quadratic", eps=1e-6)
    lam, x0 = PRESETS["quadratic"].lam, PRESETS["quadratic"].x0
    cc = derive_constants(PRESETS["quadratic"].gamma, lam, p.rho, loc.delta, beta=loc.beta)
    C = lam / ((lam - cc.gamma) * (1 - cc.sqrt_kappa))
    xs = [r.x_k[0] for r in rep.records]
    for k, x in enumerate(xs):
        # each inexact step adds at most C * inner_tol; the prox map does not amplify it
        assert abs(x - x0 / (1 + lam) ** k) <= k * C * 1e-10
    # steps x_k lam/(1 + lam) fall below eps at the first such k
    k = 0
    while x0 / (1 + lam) ** k * lam / (1 + lam) > 1e-6:
        k += 1
    assert rep.T == k + 1


def test_run_precondition():
    p, s = make_example1()
    sched = Schedule.constant(0.1, 0.25, 0.15, 2.0)
    loc = make_locality(1.0, 0.2, sched)
    with pytest.raises(PreconditionError, match="x0 ∈ B"):
        run(p, 1.15, sched, loc, 1e-8)
    with pytest.raises(ScheduleError, match="λ < 1/ρ"):
        run(p, 1.05, Schedule.constant(0.1, 0.6, 0.15, 2.0), loc, 1e-8)


def test_run_inner_failure_keeps_trace():
    p, s = make_example1()
    sched = Schedule.constant(0.1, 0.25, 0.15, 2.0)
    loc = make_locality(1.0, 0.2, sched)
    rep = run(p, 1.05, sched, loc, 1e-8, inner_tol=1e-300)
    assert rep.termination == Termination.INNER_FAILURE
    assert rep.message


@pytest.mark.parametrize("pid", ["example1", "abs-quadratic", "quadratic"])
def test_run_checks(pid):
    p, s, sched, loc, rep = _preset(pid)
    assert check_descent(rep).passed
    assert check_fejer(rep, p, loc, sched, samples=20).passed
    assert check_summability(rep, p).passed
    assert check_complexity(rep).passed
    assert all(r.fejer_ok for r in rep.records)
    assert all(np.linalg.norm(r.x_next - s.x_bar) <= loc.beta + 1e-6 for r in rep.records)
    assert all(r.f_x_next <= r.f_x_k + 1e-8 for r in rep.records)
    assert rep.sum_sq_steps == pytest.approx(sum(r.step_norm ** 2 for r in rep.records), rel=1e-15)


def test_summability_example1_numbers():
    p, s, sched, loc, rep = _preset("example1")
    assert rep.sum_sq_steps == pytest.approx(0.0025, abs=1e-10)
    assert (2 / p.rho) * (p.value([1.05]) - 1.0) == pytest.approx(0.1025, abs=1e-14)


@pytest.mark.parametrize("pid", ["example1", "abs-quadratic"])
def test_prox_consistency(pid):
    p, s, sched, loc, rep = _preset(pid, inner_tol=1e-10)
    for r in rep.records:
        cc = derive_constants(r.gamma_k, r.lambda_k, p.rho, loc.delta, beta=loc.beta)
        C = r.lambda_k / ((r.lambda_k - r.gamma_k) * (1 - cc.sqrt_kappa))
        exact = closed_form_prox(r.lambda_k, r.x_k[0])
        assert abs(r.x_next[0] - exact) <= C * 1e-10
        grid = prox_grid_oracle(ProxQuery(p, r.lambda_k, r.x_k, 0.5), 1e-6).y[0]
        assert abs(r.x_next[0] - grid) <= C * 1e-10 + 1e-6


def test_fejer_detects_forged_trace():
    from dataclasses import replace

    p, s, sched, loc, rep = _preset("example1")
    forged = replace(rep, records=[replace(rep.records[0], x_next=np.array([1.2]), f_x_next=p.value([1.2]))])
    assert not check_fejer(forged, p, loc, sched, samples=20).passed
    assert not check_descent(forged).passed


def test_complexity_bound_values():
    assert complexity_bound(2.0, 2.0, 1.0, 0.1) == pytest.approx(102.0)
    assert complexity_bound(2.0, 1.0, 1.0, 0.1) == 2.0
    assert complexity_bound(2.0, 1.1025, 1.0, 1e-2) == pytest.approx(1027.0)
    with pytest.raises(ParameterError):
        complexity_bound(0.0, 1.0, 1.0, 0.1)
    with pytest.raises(ParameterError):
        complexity_bound(2.0, 1.0, 1.0, 0.0)


def test_pair_bound_example():
    rep = lemma45_pair_bound([1.0, 0.0, 0.0, 0.0], 1.0, 2)
    assert rep.passed and rep.witness["m"] == 2
    assert rep.witness["pair_max"] == 0.0
    assert rep.witness["bound"] == pytest.approx(math.sqrt(2 / 3))


def test_pair_bound_equal_terms():
    k, lam = 9, 3.0
    z = np.full(k, lam / k)
    rep = lemma45_pair_bound(z, lam, 1)
    assert rep.passed and rep.witness["premise_met"]
    assert rep.witness["pair_max"] <= rep.witness["bound"]
    assert rep.witness["bound"] / rep.witness["pair_max"] == pytest.approx(2 * k / (k - 1))


def test_pair_bound_premise_not_met():
    rep = lemma45_pair_bound([5.0, 5.0, 5.0], 1.0, 1)
    assert rep.passed and not rep.witness["premise_met"]


def test_pair_bound_on_run_steps():
    p, s, sched, loc, rep = _preset("quadratic", eps=1e-8)
    lam = (2 / p.rho) * (rep.f0 - rep.f_final)
    assert lemma45_pair_bound(rep.step_norms, lam, 2).witness["premise_met"]
    assert lemma45_pair_bound(rep.step_norms, lam, 2).passed


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.floats(0, 10, allow_nan=False), min_size=2, max_size=20),
    st.sampled_from([1, 2]),
    st.floats(0.5, 2.0),
)
def test_pair_bound_property(z, tau, scale):
    z = np.array(z)
    total = float(np.sum(z ** tau))
    lam = max(total * scale, 1e-300)
    vals = [z[j] ** tau + z[j + 1] ** tau for j in range(len(z) - 1)]
    m_true = min(range(len(vals)), key=lambda j: (vals[j], j)) + 1
    assert pair_argmin(z, tau) == m_true
    assert lemma45_pair_bound(z, lam, tau).passed


def test_assumption1_examples():
    p, s = make_example1()
    assert check_assumption1(p, 0.1, 1.0, 0.2, samples=100).passed
    bad = check_assumption1(p, 0.1, 1.0, 2.0, samples=100)
    assert not bad.passed and bad.worst_violation > 1e-3
    q, _ = make_quadratic()
    assert check_assumption1(q, 1.0, 0.0, 3.0, samples=100).passed


def test_subgradient_baseline_quadratic():
    q, _ = make_quadratic()
    rep = subgradient_baseline(q, 1.0, 30, StepRule("constant", 0.1))
    for k, r in enumerate(rep.records):
        assert r.x_k[0] == pytest.approx(0.9 ** k, rel=1e-12)
    assert rep.method == "subgradient" and rep.T == 30


def test_subgradient_baseline_stationary():
    p, _ = make_example1()
    rep = subgradient_baseline(p, 1.0, 10, "diminishing:0.1", eps=1e-12)
    assert rep.T == 1 and rep.x_final[0] == 1.0


def test_baseline_slower_than_prox():
    p, s = make_example1()
    base = subgradient_baseline(p, 1.05, 10_000, "diminishing:0.1", eps=1e-2)
    *_, rep = _preset("example1", eps=1e-2)
    assert base.T > rep.T


def test_step_rule_parse():
    r = StepRule.parse("diminishing:0.5")
    assert r(0) == pytest.approx(0.5) and r(3) == pytest.approx(0.25)
    assert StepRule.parse("constant:0.2")(7) == 0.2
    with pytest.raises(ParameterError):
        StepRule.parse("armijo:1")
