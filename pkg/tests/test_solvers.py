import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgzlb.model import IDX, SHOCK_IDX, build_two_country_model
from fgzlb.params import StructuralParams, derive_composites
from fgzlb.solvers import (
    ExplosiveError,
    HorizonError,
    IndeterminacyError,
    NoConvergenceError,
    RegimeSequence,
    SingularMatrixError,
    check_horizon,
    simulate_with_regimes,
    solve_occbin,
    solve_reference,
    solve_stacked_newton,
)


def shock(home=0.0, foreign=0.0):
    eps = np.zeros(6)
    eps[SHOCK_IDX["e_rn"]] = home
    eps[SHOCK_IDX["e_rn_star"]] = foreign
    return eps


def forward_roots_outside(p):
    """Count roots outside the unit circle of the forward block (pi, pi*, x, x*)
    after substituting the Taylor rules; determinacy needs all four."""
    cc = derive_composites(p)
    # A z' = B z with z = (pi, pi*, x, x*)
    A = np.array([
        [p.beta, 0, 0, 0],
        [0, p.beta, 0, 0],
        [1 / cc.sigma0, 0, 1, cc.vartheta],
        [0, 1 / cc.sigma0_star, cc.vartheta_star, 1],
    ])
    B = np.array([
        [1, 0, -cc.kappa1, -cc.kappa2],
        [0, 1, -cc.kappa2_star, -cc.kappa1_star],
        [p.psi_pi / cc.sigma0, 0, 1 + p.psi_x / cc.sigma0, cc.vartheta],
        [0, p.psi_pi_star / cc.sigma0_star, cc.vartheta_star, 1 + p.psi_x_star / cc.sigma0_star],
    ])
    roots = np.linalg.eigvals(np.linalg.solve(A, B))
    return int(np.sum(np.abs(roots) > 1))


# --- reference rule -----------------------------------------------------------


def test_reference_rule_residual_and_stability(model, rule):
    A, B, C, D, _ = model.matrices(model.slack_regime)
    assert np.max(np.abs(A @ rule.P @ rule.P + B @ rule.P + C)) <= 1e-10
    assert rule.spectral_radius < 1
    eps = shock(-0.05, 0.02)
    y0 = np.random.default_rng(1).normal(size=8) * 0.01
    y1 = rule.P @ y0 + rule.Q @ eps
    y2 = rule.P @ y1
    assert np.max(np.abs(A @ y2 + B @ y1 + C @ y0 + D @ eps)) <= 1e-10


def test_reference_rule_keeps_ar1_rows(rule):
    assert rule.P[IDX["rn"], IDX["rn"]] == pytest.approx(0.8, abs=1e-12)
    assert rule.P[IDX["rn_star"], IDX["rn_star"]] == pytest.approx(0.8, abs=1e-12)
    assert rule.Q[IDX["rn"], SHOCK_IDX["e_rn"]] == pytest.approx(1.0, abs=1e-12)


def test_zero_shock_stays_at_steady_state(rule):
    assert not rule.irf(np.zeros(6), 40).any()


def test_taylor_principle_violation_is_indeterminate():
    p = StructuralParams(psi_pi=0.5, psi_pi_star=0.5)
    assert forward_roots_outside(p) < 4
    with pytest.raises(IndeterminacyError):
        solve_reference(build_two_country_model(p))


@pytest.mark.parametrize("psi_pi", [0.99, 1.25, 2.0])
def test_determinacy_agrees_with_root_count(psi_pi):
    p = StructuralParams(psi_pi=psi_pi, psi_pi_star=psi_pi)
    assert forward_roots_outside(p) == 4
    solve_reference(build_two_country_model(p))


def test_explosive_predetermined_state_has_no_stable_solution(model):
    C = model.C.copy()
    C[6, IDX["rn"]] = -1.5
    broken = dataclasses.replace(model, C=C, _cache={})
    with pytest.raises(ExplosiveError):
        solve_reference(broken)


# --- fixed-regime simulation ------------------------------------------------------


def test_all_slack_regimes_reproduce_rule_irf(model, rule):
    eps = shock(-0.05)
    path = simulate_with_regimes(model, RegimeSequence.slack(60, 2), innovations=eps, rule=rule)
    np.testing.assert_allclose(path.values, rule.irf(eps, 60), atol=1e-10, rtol=0)


def test_zero_innovations_with_consistent_binding_give_zero_path():
    m = build_two_country_model(StructuralParams(bound=0.0, bound_star=0.0))
    regimes = RegimeSequence.from_windows(30, (4, 7))
    path = simulate_with_regimes(m, regimes, innovations=np.zeros(6))
    assert np.max(np.abs(path.values)) == 0.0


def test_forced_window_matches_stacked_oracle(model, rule):
    eps = shock(-0.05)
    regimes = RegimeSequence.from_windows(60, (3, 0))
    piecewise = simulate_with_regimes(model, regimes, innovations=eps, rule=rule)
    # the stacked solve with the same forced windows and no endogenous binding
    # beyond them: drop the foreign bound and check the home one is inactive after t=3
    oracle = solve_stacked_newton(model, (3, 0), eps, 60)
    if np.array_equal(oracle.regimes.flags, regimes.flags):
        np.testing.assert_allclose(piecewise.values, oracle.values, atol=1e-8, rtol=0)
    else:
        fixed = simulate_with_regimes(model, oracle.regimes, innovations=eps, rule=rule)
        np.testing.assert_allclose(fixed.values, oracle.values, atol=1e-8, rtol=0)


def test_fixed_regime_path_satisfies_equations(model, rule):
    regimes = RegimeSequence.from_windows(60, (6, 2))
    path = simulate_with_regimes(model, regimes, innovations=shock(-0.04, -0.04), rule=rule)
    assert path.diagnostics["max_residual"] <= 1e-10


def test_singular_recursion_reports_period(model):
    # a DIS row that only involves r duplicates the binding rate row
    A, B = model.A.copy(), model.B.copy()
    A[2] = 0.0
    B[2] = 0.0
    B[2, IDX["r"]] = 1.0
    broken = dataclasses.replace(model, A=A, B=B, _cache={})
    rule = solve_reference(model)
    regimes = RegimeSequence.from_windows(10, (3, 3))
    with pytest.raises(SingularMatrixError) as info:
        simulate_with_regimes(broken, regimes, innovations=shock(-0.05), rule=rule)
    assert info.value.period == 3


# --- occbin ----------------------------------------------------------------------


def _check_fixed_point(model, path, tol=1e-9):
    bounds = np.array([c.bound for c in model.constraints])
    for j, c in enumerate(model.constraints):
        binding = path.regimes.flags[:, j]
        r = path.values[:, c.var]
        assert np.all(np.abs(r[binding] - bounds[j]) <= tol)
        assert np.all(path.shadow[~binding, j] >= bounds[j] - tol)
        forced = np.zeros_like(binding)
        forced[: path.regimes.forced[j]] = True
        assert np.all(path.shadow[binding & ~forced, j] < bounds[j])


def test_small_shock_never_binds(model, rule):
    eps = shock(-1e-6, -1e-6)
    path = solve_occbin(model, None, eps, 60, rule=rule)
    assert not path.regimes.flags.any()
    np.testing.assert_allclose(path.values, rule.irf(eps, 60), atol=1e-12, rtol=0)


def test_global_trap_is_symmetric(model, rule):
    path = solve_occbin(model, None, shock(-0.04, -0.04), 60, rule=rule)
    np.testing.assert_allclose(path["pi"], path["pi_star"], atol=1e-12)
    np.testing.assert_allclose(path["x"], path["x_star"], atol=1e-12)
    np.testing.assert_allclose(path["r"], path["r_star"], atol=1e-12)
    _check_fixed_point(model, path)


def test_home_only_spell_length(model):
    home_only = model.without_constraints({"foreign"})
    eps = shock(-0.05)
    oracle = solve_stacked_newton(home_only, None, eps, 60)
    t0_oracle = oracle.regimes.spell_end(0)
    assert t0_oracle == 5  # frozen from the stacked oracle
    path = solve_occbin(home_only, None, eps, 60)
    assert path.regimes.spell_end(0) == t0_oracle
    _check_fixed_point(home_only, path)


@pytest.mark.parametrize("windows", [(0, 0), (9, 4), (4, 9), (13, 13), (10, 0)])
def test_occbin_matches_stacked_oracle(model, rule, windows):
    eps = shock(-0.04, -0.04)
    a = solve_occbin(model, windows, eps, 60, rule=rule)
    b = solve_stacked_newton(model, windows, eps, 60)
    assert np.array_equal(a.regimes.flags, b.regimes.flags)
    assert np.max(np.abs(a.values - b.values)) <= 1e-6
    _check_fixed_point(model, a)
    _check_fixed_point(model, b)
    assert a.diagnostics["max_residual"] <= 1e-10


def test_terminal_values_near_steady_state(model, rule):
    path = solve_occbin(model, (9, 9), shock(-0.04, -0.04), 60, rule=rule)
    assert np.max(np.abs(path.values[-1])) <= 1e-6


def test_extending_window_delays_exit(model, rule):
    eps = shock(-0.04, -0.04)
    exits = []
    for w in range(0, 12):
        path = solve_occbin(model, (w, 0), eps, 60, rule=rule)
        above = np.flatnonzero(path["r"] > model.constraints[0].bound + 1e-9)
        exits.append(int(above[0]))
    assert exits == sorted(exits)


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(-5.0, 5.0))
def test_linearity_while_slack(scale):
    m = build_two_country_model(StructuralParams())
    rule = solve_reference(m)
    eps = shock(1e-4, -2e-4)
    base = solve_occbin(m, None, eps, 40, rule=rule)
    scaled = solve_occbin(m, None, scale * eps, 40, rule=rule)
    assert not scaled.regimes.flags.any()
    np.testing.assert_allclose(scaled.values, scale * base.values, atol=1e-15, rtol=1e-10)


def test_no_convergence_reports_guesses(model, rule):
    with pytest.raises(NoConvergenceError) as info:
        solve_occbin(model, None, shock(-0.05, -0.05), 60, max_iter=1, rule=rule)
    assert len(info.value.guesses) == 2


def test_literal_zero_bound_never_exits():
    # with the bound at 0 in deviations the slack-regime shadow rate is a
    # multiple of the natural-rate state, so the bound binds forever
    m = build_two_country_model(StructuralParams(bound=0.0, bound_star=0.0))
    with pytest.raises(HorizonError):
        solve_occbin(m, None, shock(-0.05), 60)


def test_horizon_doubling_is_harmless(model):
    assert check_horizon(model, (9, 9), shock(-0.04, -0.04), 60) <= 1e-8


# --- stacked oracle --------------------------------------------------------------


def test_stacked_all_slack_equals_rule_irf(model, rule):
    eps = shock(1e-6, 0.0)
    path = solve_stacked_newton(model, None, eps, 60)
    assert not path.regimes.flags.any()
    np.testing.assert_allclose(path.values, rule.irf(eps, 60), atol=1e-10, rtol=0)


def test_stacked_horizon_insensitivity(model):
    eps = shock(-0.04, -0.04)
    short = solve_stacked_newton(model, None, eps, 60)
    long = solve_stacked_newton(model, None, eps, 120)
    assert np.max(np.abs(short.values - long.values[:60])) <= 1e-8


def test_stacked_residual_is_tiny(model):
    path = solve_stacked_newton(model, (9, 4), shock(-0.04, -0.04), 60)
    assert path.diagnostics["max_residual"] <= 1e-10
