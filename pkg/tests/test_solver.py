"""Improvement dynamics: single steps, full solves, sweeps, thresholds."""

import math

import numpy as np
import pytest

from periwave import (
    Bond,
    DegenerateProfileError,
    DiscreteCoupling,
    Grid,
    GridMismatchError,
    Profile,
    SolveOptions,
    improvement_step,
    initial_profile,
    kinetic_K,
    l2_norm,
    localization_ratio,
    potential_P,
    potential_library,
    silling_medium,
    solve,
    support_width,
    sweep_K,
    theta2,
    threshold_detect,
)


def chain(*specs):
    return DiscreteCoupling(tuple(Bond(xi, potential_library(name, **kw)) for xi, name, kw in specs))


POLY26 = chain((1.0, "poly26", {}), (2.0, "poly26", {}))
PWLIN = chain((1.0, "pwlin", {}))
HARMONIC = chain((1.0, "harmonic", {"c": 0.5}))
GRID5 = Grid(5.0, 512)
GRID4 = Grid(4.0, 512)


# ------------------------------------------------------------ start profiles

def test_initial_profiles_are_cone_members_at_exact_K():
    for kind in ("gaussian", "indicator"):
        W = initial_profile(kind, 0.7, GRID5)
        assert kinetic_K(W) == pytest.approx(0.7, rel=1e-14)
        assert np.all(W.values >= 0.0)
    with pytest.raises(ValueError):
        initial_profile("gaussian", -1.0, GRID5)
    with pytest.raises(ValueError):
        initial_profile("mystery", 1.0, GRID5)
    with pytest.raises(ValueError):
        initial_profile("gaussian", 1.0, GRID5, width=-2.0)


def test_indicator_plateau_value():
    # a box of half-width Lambda at kinetic value K has height sqrt(K / Lambda)
    K, lam = 2.0, GRID5.L / 2.0
    W = initial_profile("indicator", K, GRID5, width=lam)
    plateau = float(W.values[np.abs(GRID5.nodes) < lam / 2.0].max())
    assert plateau == pytest.approx(math.sqrt(K / lam), rel=1e-2)


# ------------------------------------------------------------- single steps

def test_step_preserves_norm_and_increases_P():
    W = initial_profile("gaussian", 0.5, GRID5)
    T, mu = improvement_step(W, POLY26)
    assert mu > 0.0
    assert l2_norm(T) == pytest.approx(l2_norm(W), rel=1e-14)
    assert potential_P(T, POLY26) >= potential_P(W, POLY26)


def test_constant_is_a_fixed_point_of_the_harmonic_chain():
    g = Grid(5.0, 256)
    W = initial_profile("indicator", 1.0, g, width=2.0 * g.L)  # constant box
    T, mu = improvement_step(W, HARMONIC)
    assert mu == pytest.approx(1.0, rel=1e-13)
    np.testing.assert_allclose(T.values, W.values, rtol=1e-13)


def test_step_rejects_zero_energy_start():
    # a profile the monomial contact potential cannot see: nonpositive
    # strain everywhere gives P = 0 and a vanishing gradient
    hertz = chain((1.0, "hertz", {"p": 2.5}))
    W = Profile(GRID4, -np.exp(-GRID4.nodes ** 2))
    with pytest.raises(DegenerateProfileError):
        improvement_step(W, hertz)


# -------------------------------------------------------------- full solves

def test_solve_harmonic_reaches_the_constant():
    sol = solve(1.0, HARMONIC, Grid(5.0, 256))
    assert sol.converged
    assert sol.sigma2 == pytest.approx(theta2(0.0, HARMONIC), abs=1e-8)
    assert localization_ratio(sol.profile) == pytest.approx(1.0, abs=1e-6)
    # P(K) = Theta^2(0) K with no nonlinear excess
    assert sol.P == pytest.approx(theta2(0.0, HARMONIC) * 1.0, rel=1e-10)


def test_solve_localizes_at_high_K():
    sol = solve(0.5, POLY26, GRID5)
    assert sol.converged
    assert sol.residual <= 1e-10
    assert localization_ratio(sol.profile) > 3.0
    assert sol.cone.in_cone
    assert sol.sigma2 > theta2(0.0, POLY26)  # supersonic


def test_solve_stays_flat_at_low_K():
    sol = solve(0.05, POLY26, GRID5)
    assert sol.converged
    assert localization_ratio(sol.profile) < 1.05


def test_solve_conserves_K_and_increases_P():
    sol = solve(0.5, POLY26, GRID5, SolveOptions(record_history=True))
    h = sol.history
    np.testing.assert_allclose(h.K, 0.5, rtol=1e-12)
    gains = np.diff(h.P)
    scale = np.maximum(np.abs(h.P[:-1]), 1.0)
    assert np.all(gains >= -1e-10 * scale)
    # the certified per-step improvement (1 / 2 mu) |W_next - W|^2
    bound = 0.5 * h.step_norm ** 2 / h.mu
    assert np.all(gains - bound >= -1e-10 * scale)
    assert sol.min_gain >= -1e-10
    # history lengths: P and K include the start, mu and step do not
    assert len(h.P) == sol.iterations + 1
    assert len(h.mu) == sol.iterations
    assert len(h.residual) == sol.iterations + 1


def test_solve_eigen_residual_matches_reported():
    from periwave import grad_P

    sol = solve(0.5, POLY26, GRID5)
    res_vec = grad_P(sol.profile, POLY26) - sol.sigma2 * sol.profile
    recomputed = l2_norm(res_vec) / (sol.sigma2 * l2_norm(sol.profile))
    assert recomputed == pytest.approx(sol.residual, rel=1e-6, abs=1e-12)
    assert sol.sigma2 >= sol.P / sol.K - 1e-8


def test_solve_negative_sign_mirrors_positive():
    med = silling_medium(H=1.0, xi_step=0.02)
    g = Grid(10.0, 512)
    sol = solve(1.0, med, g, SolveOptions(sign="negative"))
    assert sol.converged
    assert sol.sign == "negative"
    assert np.all(sol.profile.values <= 1e-15)
    # the certificate cone report refers to the mirrored iterate
    assert sol.cone.in_cone


def test_solve_supplied_start_on_wrong_grid_is_rejected():
    W0 = initial_profile("gaussian", 0.5, Grid(5.0, 256))
    with pytest.raises(GridMismatchError):
        solve(0.5, POLY26, GRID5, SolveOptions(initial="supplied", initial_profile=W0))
    with pytest.raises(ValueError, match="initial_profile"):
        solve(0.5, POLY26, GRID5, SolveOptions(initial="supplied"))


def test_solve_scaling_symmetry_of_monomials():
    # W_{lambda^2 K}(x) = lambda W_K(x) for a pure power law: solving at
    # 4 K must reproduce the rescaled K solution exactly
    hertz = chain((1.0, "hertz", {"p": 2.5}))
    a = solve(1.0, hertz, GRID4)
    b = solve(4.0, hertz, GRID4)
    assert a.converged and b.converged
    gap = l2_norm(Profile(GRID4, 2.0 * a.profile.values - b.profile.values))
    assert gap / l2_norm(b.profile) < 1e-6


def test_solve_runs_out_of_iterations_gracefully():
    sol = solve(0.5, POLY26, GRID5, SolveOptions(max_iterations=3))
    assert not sol.converged
    assert sol.status == "max_iterations"
    assert sol.iterations == 3
    assert math.isfinite(sol.residual)


def test_solve_rejects_bad_arguments():
    with pytest.raises(ValueError):
        solve(0.0, POLY26, GRID5)
    with pytest.raises(ValueError):
        SolveOptions(max_iterations=0)
    with pytest.raises(ValueError):
        SolveOptions(sign="sideways")
    with pytest.raises(ValueError):
        SolveOptions(initial="bogus")


# ------------------------------------------------------------ widths, ratios

def test_localization_diagnostics():
    g = Grid(5.0, 512)
    flat = Profile(g, np.ones(g.N))
    assert localization_ratio(flat) == 1.0
    assert support_width(flat) == pytest.approx(2.0 * g.L)
    spike = np.zeros(g.N)
    spike[g.N // 2] = 5.0
    assert support_width(Profile(g, spike)) == pytest.approx(g.spacing)
    assert support_width(Profile(g, np.zeros(g.N))) == 0.0
    with pytest.raises(ValueError):
        support_width(flat, level=0.0)
    with pytest.raises(ValueError):
        support_width(flat, level=1.0)


# ------------------------------------------------------------------- sweeps

def test_sweep_monotone_P_and_harmonic_identity():
    Ks = [0.2, 0.4, 0.8, 1.6]
    rows = sweep_K(Ks, HARMONIC, Grid(5.0, 256))
    c0 = theta2(0.0, HARMONIC)
    for row in rows:
        assert row.converged
        assert row.P == pytest.approx(c0 * row.K, abs=1e-8 * max(1.0, row.K))
    rows = sweep_K([0.1, 0.25, 0.5], POLY26, GRID5, SolveOptions(initial="indicator"), warm_start=False)
    P_vals = [r.P for r in rows]
    assert P_vals == sorted(P_vals)


def test_sweep_requires_increasing_positive_K():
    with pytest.raises(ValueError, match="increasing"):
        sweep_K([0.5, 0.5], POLY26, GRID5)
    with pytest.raises(ValueError, match="positive"):
        sweep_K([-1.0, 0.5], POLY26, GRID5)
    assert sweep_K([], POLY26, GRID5) == []


def test_sweep_records_failed_rows_and_continues():
    cosh1 = chain((1.0, "cosh", {"beta": 1.0}))
    rows = sweep_K([0.5, 1e9], cosh1, Grid(5.0, 256), SolveOptions(initial="indicator", max_iterations=50))
    assert len(rows) == 2
    assert rows[1].status.startswith("error:")
    assert math.isnan(rows[1].sigma)


def test_warm_start_tracks_the_constant_branch_past_the_cold_threshold():
    # continuation from a subcritical constant stays on the constant
    # branch (a genuine fixed point) where a cold indicator start localizes
    Ks = [0.05, 0.25]
    opts = SolveOptions(initial="indicator")
    warm = sweep_K(Ks, POLY26, GRID5, opts, warm_start=True)
    cold = sweep_K(Ks, POLY26, GRID5, opts, warm_start=False)
    assert warm[1].ratio < 1.05
    assert cold[1].ratio > 1.5


# --------------------------------------------------------------- thresholds

def test_threshold_bracket_for_the_stiffening_chain():
    Ks = [0.05, 0.1, 0.15, 0.25, 0.35, 0.5]
    rows = sweep_K(Ks, POLY26, GRID5, SolveOptions(initial="indicator"), warm_start=False)
    rep = threshold_detect(rows, trigger=1.5)
    assert rep.found
    assert rep.reason == "crossing"
    assert (rep.K_low, rep.K_high) == (0.15, 0.25)
    assert rep.K_low < rep.K_estimate < rep.K_high


def test_threshold_bracket_for_the_two_slope_chain():
    Ks = [0.8, 0.9, 1.0, 1.1, 1.2, 1.3]
    rows = sweep_K(Ks, PWLIN, GRID4, SolveOptions(initial="indicator"), warm_start=False)
    rep = threshold_detect(rows, trigger=1.5)
    assert rep.found
    assert 0.9 <= rep.K_low and rep.K_high <= 1.2


def test_threshold_absent_for_scale_invariant_chains():
    hertz = chain((1.0, "hertz", {"p": 3.0}))
    Ks = list(np.geomspace(0.01, 10.0, 7))
    rows = sweep_K(Ks, hertz, GRID4, SolveOptions(initial="indicator"), warm_start=False)
    rep = threshold_detect(rows, trigger=2.0)
    assert not rep.found
    assert rep.reason == "all_above"


def test_threshold_empty_table():
    rep = threshold_detect([], trigger=2.0)
    assert not rep.found
    assert rep.reason == "empty"
