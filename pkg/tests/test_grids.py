"""Grid layout, norms, cone membership, and profile round-trips."""

import json
import math

import numpy as np
import pytest

from periwave import (
    Grid,
    GridMismatchError,
    Profile,
    cone_check,
    inner,
    l2_norm,
    make_grid,
    profile_from_csv,
    profile_from_json,
    profile_to_csv,
    profile_to_json,
)


def test_grid_layout():
    g = make_grid(1.0, 8)
    assert g.spacing == 0.25
    assert g.nodes[0] == -1.0
    np.testing.assert_allclose(np.diff(g.nodes), 0.25)
    # nodes cover [-L, L); x = -L stands in for x = +L by periodicity
    assert g.nodes[-1] == pytest.approx(1.0 - 0.25)


def test_grid_wavenumbers():
    g = Grid(10.0, 1024)
    assert g.rfft_wavenumbers[0] == 0.0
    assert g.rfft_wavenumbers[1] == pytest.approx(math.pi / 10.0, rel=1e-15)
    assert g.wavenumbers[1] == pytest.approx(math.pi / 10.0, rel=1e-15)
    assert len(g.rfft_wavenumbers) == 513


@pytest.mark.parametrize("L,N", [(1.0, 7), (1.0, 6), (1.0, 9), (0.0, 64), (-2.0, 64), (math.inf, 64)])
def test_grid_rejects_bad_parameters(L, N):
    with pytest.raises(ValueError):
        Grid(L, N)


def test_profile_requires_matching_length():
    g = Grid(1.0, 8)
    with pytest.raises(ValueError, match="expected 8 values"):
        Profile(g, np.zeros(9))


def test_profile_rejects_non_finite():
    g = Grid(1.0, 8)
    vals = np.zeros(8)
    vals[3] = math.nan
    with pytest.raises(ValueError, match="node 3"):
        Profile(g, vals)


def test_profile_arithmetic_and_grid_guard():
    g = Grid(1.0, 8)
    a = Profile(g, np.arange(8.0))
    b = Profile(g, np.ones(8))
    np.testing.assert_array_equal((a + b).values, np.arange(8.0) + 1.0)
    np.testing.assert_array_equal((a - b).values, np.arange(8.0) - 1.0)
    np.testing.assert_array_equal((2.0 * a).values, 2.0 * np.arange(8.0))
    np.testing.assert_array_equal((-a).values, -np.arange(8.0))
    other = Profile(Grid(2.0, 8), np.ones(8))
    with pytest.raises(GridMismatchError):
        a + other
    with pytest.raises(GridMismatchError):
        inner(a, other)


def test_l2_norm_values():
    g = Grid(1.0, 64)
    assert l2_norm(Profile(g, np.ones(64))) == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert l2_norm(Profile(g, np.zeros(64))) == 0.0
    # cos(pi x / L) has squared integral L over the full period
    gc = Grid(1.0, 256)
    W = Profile(gc, np.cos(math.pi * gc.nodes / gc.L))
    assert l2_norm(W) == pytest.approx(1.0, abs=1e-12)


def test_inner_product():
    g = Grid(3.0, 128)
    rng = np.random.default_rng(0)
    a = Profile(g, rng.normal(size=g.N))
    b = Profile(g, rng.normal(size=g.N))
    assert inner(a, a) == pytest.approx(l2_norm(a) ** 2, rel=1e-14)
    assert inner(a, b) == pytest.approx(inner(b, a), rel=1e-14)
    # the lowest cosine mode integrates to zero against constants
    c1 = Profile(g, np.ones(g.N))
    mode = Profile(g, np.cos(math.pi * g.nodes / g.L))
    assert abs(inner(c1, mode)) < 1e-12


def test_cone_check_accepts_even_unimodal_bump():
    g = Grid(5.0, 512)
    W = Profile(g, 1.0 / np.cosh(g.nodes) ** 2)
    rep = cone_check(W)
    assert rep.in_cone
    assert rep.evenness_defect < 1e-12
    assert rep.negativity_defect == 0.0
    assert rep.unimodality_defect == 0.0
    assert rep.decay_defect == 0.0


def test_cone_check_flags_odd_profile():
    g = Grid(5.0, 512)
    W = Profile(g, np.sin(math.pi * g.nodes / g.L))
    rep = cone_check(W)
    assert not rep.in_cone
    assert rep.evenness_defect > 0.1
    assert rep.negativity_defect > 0.1


def test_cone_check_flags_double_bump():
    g = Grid(5.0, 512)
    W = Profile(g, np.exp(-((np.abs(g.nodes) - 2.0) ** 2)))
    rep = cone_check(W)
    assert not rep.in_cone
    assert rep.unimodality_defect > 0.1
    assert rep.evenness_defect < 1e-12


def test_cone_decay_bound_applies_beyond_first_node():
    # a narrow spike at the origin is a cone member; the amplitude bound
    # W(x) <= |W| / sqrt(2|x|) is only enforced for |x| >= h
    g = Grid(5.0, 512)
    vals = np.zeros(g.N)
    vals[g.N // 2] = 1.0
    rep = cone_check(Profile(g, vals))
    assert rep.in_cone
    assert rep.decay_defect == 0.0


def test_cone_check_rejects_negative_tolerance():
    g = Grid(1.0, 8)
    with pytest.raises(ValueError, match="nonnegative"):
        cone_check(Profile(g, np.ones(8)), tol=-1.0)


def test_csv_round_trip(tmp_path):
    g = Grid(2.5, 64)
    rng = np.random.default_rng(1)
    W = Profile(g, rng.normal(size=g.N))
    path = tmp_path / "profile.csv"
    profile_to_csv(W, path)
    back = profile_from_csv(path)
    assert back.grid == g
    np.testing.assert_array_equal(back.values, W.values)


def test_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n0.0,1.0\n")
    with pytest.raises(ValueError, match="header"):
        profile_from_csv(path)


def test_json_round_trip():
    g = Grid(2.5, 64)
    rng = np.random.default_rng(2)
    W = Profile(g, rng.normal(size=g.N))
    obj = profile_to_json(W)
    assert set(obj) == {"grid", "values"}
    assert obj["grid"] == {"L": 2.5, "N": 64}
    back = profile_from_json(json.dumps(obj))
    assert back.grid == g
    np.testing.assert_array_equal(back.values, W.values)
