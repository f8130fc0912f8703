"""Dispersion, exponential tails, and the long-wave comparison."""

import math

import numpy as np
import pytest

from periwave import (
    Bond,
    DecayOverflowError,
    DiscreteCoupling,
    Grid,
    Profile,
    SolveOptions,
    SubsonicError,
    cone_check,
    decay_rate,
    dispersion_curve,
    fit_decay,
    kdv_coefficients,
    kdv_compare,
    kdv_profile,
    long_wave_speed2,
    omega2,
    potential_library,
    silling_medium,
    sinc,
    solve,
    theta2,
    theta2_imag,
)


def chain(*specs):
    return DiscreteCoupling(tuple(Bond(xi, potential_library(name, **kw)) for xi, name, kw in specs))


FPUT = chain((1.0, "harmonic", {"c": 0.5}))
FPUT_CUBIC = chain((1.0, "polyseries", {"coefficients": [0.5, 1.0 / 6.0]}))
POLY26 = chain((1.0, "poly26", {}), (2.0, "poly26", {}))


# --------------------------------------------------------------- dispersion

def test_theta2_single_bond_is_squared_sinc():
    k = np.linspace(0.0, 4.0 * math.pi, 200)
    np.testing.assert_allclose(theta2(k, FPUT), sinc(k / 2.0) ** 2, atol=1e-12)
    assert theta2(2.0 * math.pi, FPUT) == pytest.approx(0.0, abs=1e-15)
    assert theta2(0.0, FPUT) == 1.0


def test_omega2_values():
    k = np.linspace(0.0, 10.0, 100)
    np.testing.assert_allclose(omega2(k, FPUT), 4.0 * np.sin(k / 2.0) ** 2, atol=1e-12)
    assert omega2(0.0, FPUT) == 0.0


def test_theta2_additivity_over_bonds():
    k = np.linspace(0.0, 5.0, 50)
    b1 = chain((1.0, "poly26", {}))
    b2 = chain((2.0, "poly26", {}))
    np.testing.assert_allclose(theta2(k, POLY26), theta2(k, b1) + theta2(k, b2), rtol=1e-14)


def test_theta2_continuous_quadrature():
    # alpha = beta = 1 on (0, 1] with unit curvature: Theta^2(0) = 1/3
    from periwave import build_quadrature, coefficient_family

    one = coefficient_family("constant")
    med = build_quadrature(one, one, potential_library("harmonic", c=0.5), xi_max=1.0, xi_step=1e-3)
    assert theta2(0.0, med) == pytest.approx(1.0 / 3.0, rel=1e-6)
    assert long_wave_speed2(med) == theta2(0.0, med)


def test_dispersion_curve_fields():
    crv = dispersion_curve(FPUT, k_max=4.0 * math.pi, samples=128)
    assert crv.k[0] == 0.0 and crv.k[-1] == pytest.approx(4.0 * math.pi)
    np.testing.assert_allclose(crv.omega2, crv.k ** 2 * crv.theta2, rtol=1e-14)
    assert crv.c0 == 1.0
    # high-frequency mean of the single-bond chain
    assert crv.c_inf == pytest.approx(2.0)
    with pytest.raises(ValueError):
        dispersion_curve(FPUT, k_max=0.0)


# -------------------------------------------------------------------- tails

def test_theta2_imag_values():
    assert theta2_imag(0.0, FPUT) == pytest.approx(theta2(0.0, FPUT), rel=1e-14)
    assert theta2_imag(2.0, FPUT) == pytest.approx(math.sinh(1.0) ** 2, rel=1e-14)
    lam = np.linspace(0.0, 5.0, 40)
    vals = theta2_imag(lam, FPUT)
    assert np.all(np.diff(vals) > 0.0)
    with pytest.raises(ValueError):
        theta2_imag(-1.0, FPUT)
    with pytest.raises(DecayOverflowError):
        theta2_imag(2e3, FPUT)


def test_decay_rate_round_trip():
    for lam in (0.1, 1.0, 2.0, 10.0):
        s2 = theta2_imag(lam, POLY26)
        assert decay_rate(s2, POLY26) == pytest.approx(lam, rel=1e-9)


def test_decay_rate_requires_supersonic_speed():
    c0 = long_wave_speed2(FPUT)
    with pytest.raises(SubsonicError):
        decay_rate(c0, FPUT)
    with pytest.raises(SubsonicError):
        decay_rate(0.5 * c0, FPUT)


def test_fit_decay_recovers_exponential_rate():
    g = Grid(10.0, 1024)
    W = Profile(g, np.exp(-3.0 * np.abs(g.nodes)))
    assert fit_decay(W, window=(1.0, 6.0)) == pytest.approx(3.0, rel=1e-6)


def test_fit_decay_on_sech_squared_tail():
    # sech^2(x/2) decays like exp(-x) far out; the window must sit in the tail
    g = Grid(12.0, 2048)
    W = Profile(g, 1.0 / np.cosh(g.nodes / 2.0) ** 2)
    assert fit_decay(W, window=(5.0, 10.0)) == pytest.approx(1.0, rel=2e-2)


def test_fit_decay_window_validation():
    g = Grid(10.0, 512)
    W = Profile(g, np.exp(-np.abs(g.nodes)))
    with pytest.raises(ValueError, match="increasing"):
        fit_decay(W, window=(3.0, 1.0))
    with pytest.raises(ValueError, match="three nodes"):
        fit_decay(W, window=(9.97, 9.99))
    flip = Profile(g, -np.exp(-np.abs(g.nodes)))
    with pytest.raises(ValueError, match="positive"):
        fit_decay(flip, window=(1.0, 5.0))


def test_decay_prediction_matches_computed_tail():
    sol = solve(0.5, POLY26, Grid(5.0, 512))
    pred = decay_rate(sol.sigma2, POLY26)
    meas = fit_decay(sol.profile, window=(1.0, 3.0))
    assert meas == pytest.approx(pred, rel=5e-2)


# ---------------------------------------------------------------- long wave

def test_kdv_coefficients_single_bond_cubic():
    coef = kdv_coefficients(FPUT_CUBIC)
    assert coef.c0 == 1.0
    assert coef.c1_half_moment == pytest.approx(0.5)
    assert coef.c1_curvature == pytest.approx(1.0 / 12.0)
    assert coef.c2 == pytest.approx(0.5)
    assert not coef.degenerate


def test_kdv_coefficients_compressive_medium():
    # mirrored into the cone the cubic branch supplies c2 = 1/4 at H = 1
    from periwave import reflect_coupling

    med = reflect_coupling(silling_medium(H=1.0, xi_step=1e-3))
    coef = kdv_coefficients(med)
    assert coef.c0 == pytest.approx(0.5, rel=1e-6)
    assert coef.c1_half_moment == pytest.approx(1.0 / 8.0, rel=1e-5)
    assert coef.c2 == pytest.approx(0.25, rel=1e-5)


def test_kdv_degenerate_for_even_potentials():
    coef = kdv_coefficients(POLY26)
    assert coef.degenerate
    with pytest.raises(ValueError, match="degenerate"):
        kdv_profile(0.3, POLY26, Grid(40.0, 512))


def test_kdv_profile_shape():
    g = Grid(40.0, 1024)
    eps = 0.3
    W, s2 = kdv_profile(eps, FPUT_CUBIC, g)
    coef = kdv_coefficients(FPUT_CUBIC)
    assert s2 == pytest.approx(coef.c0 + eps * eps)
    assert float(W.values.max()) == pytest.approx(eps * eps * 1.5 / coef.c2, rel=1e-12)
    assert cone_check(W).in_cone
    # amplitude scales with eps^2, width with 1/eps
    W2, _ = kdv_profile(eps / 2.0, FPUT_CUBIC, g)
    assert W.values.max() / W2.values.max() == pytest.approx(4.0, rel=1e-10)
    with pytest.raises(ValueError):
        kdv_profile(0.0, FPUT_CUBIC, g)


def test_kdv_compare_improves_toward_the_sonic_limit():
    errs = []
    for eps, grid in ((0.4, Grid(40.0, 1024)), (0.2, Grid(40.0, 1024))):
        coef = kdv_coefficients(FPUT_CUBIC)
        K = 3.0 * eps ** 3 * math.sqrt(coef.c1_curvature) / coef.c2 ** 2
        sol = solve(K, FPUT_CUBIC, grid, SolveOptions(max_iterations=20000))
        assert sol.converged
        rep = kdv_compare(sol, FPUT_CUBIC)
        assert rep.eps == pytest.approx(eps, rel=0.1)
        errs.append(rep.sup_error)
    assert errs[1] < errs[0]
    assert errs[1] < 0.05


def test_kdv_compare_rejects_sonic_waves():
    sol = solve(1.0, FPUT, Grid(5.0, 256))
    with pytest.raises(SubsonicError):
        kdv_compare(sol, FPUT)
