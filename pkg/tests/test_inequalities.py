import math

import numpy as np
import pytest

from conftest import sample, vector
from elsasser.inequalities import (
    RatioStats,
    bernstein_annulus_ratio,
    bernstein_ball_ratio,
    chi_chain,
    chi_product_ratio,
    default_partition,
    dissipation_ratio,
    interpolation_ratio,
    partial,
    resolution_drift,
    sample_rng,
    skp1_ratio,
    skp2_weight,
    verify_bernstein,
    verify_chi_chain_and_interp,
    verify_chi_product,
    verify_dissipation_bound,
    verify_skp1,
    verify_skp2,
)
from elsasser.norms import INF, BesovParams, besov_norm
from elsasser.spectral import advect, band_limited_random, make_grid


def cos2(grid):
    return sample(grid, lambda x, y, z: np.cos(2 * x))


@pytest.mark.parametrize("gamma, j, expected", [((1, 0, 0), 1, 1.0), ((2, 0, 0), 1, 1.0), ((0, 1, 0), 1, 0.0)])
def test_bernstein_ball_sharp(grid32, gamma, j, expected):
    assert bernstein_ball_ratio(cos2(grid32), gamma, 2, 2, j) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("order, p", [(1, 2), (2, 2), (1, INF), (2, 4)])
def test_bernstein_annulus_sharp(grid32, order, p):
    assert bernstein_annulus_ratio(cos2(grid32), order, p, 1) == pytest.approx(1.0, abs=1e-10)


def test_partial(grid32):
    f = sample(grid32, lambda x, y, z: np.sin(x) * np.sin(2 * y))
    g = partial(f, (1, 1, 0))
    x, y, z = grid32.coordinates()
    assert np.abs(g.physical() - 2 * np.cos(x) * np.cos(2 * y)).max() < 1e-12


def test_dissipation_sharp(grid32):
    assert dissipation_ratio(cos2(grid32), 2, 2.0) == pytest.approx(4.0, abs=1e-10)
    # only the L^2 case is sharp on a single mode
    assert dissipation_ratio(cos2(grid32), 4, 2.0) >= 4.0


def test_dissipation_rejects_odd(grid32):
    with pytest.raises(ValueError):
        verify_dissipation_bound(grid32, 3, 2, 0)
    with pytest.raises(ValueError):
        verify_dissipation_bound(grid32, 2, 2, 0, R1=4, R2=2)


def test_dissipation_suite(grid32):
    st = verify_dissipation_bound(grid32, 2, 10, 0)
    assert st.verdict and st.min >= 4 - 1e-10 and st.bound == (4.0, None)
    st4 = verify_dissipation_bound(grid32, 4, 5, 0)
    assert st4.min > 0 and st4.verdict


def test_chi_product_example(grid32):
    u = vector(grid32, lambda x, y, z: np.sin(y))
    v = vector(grid32, None, None, lambda x, y, z: np.sin(x))
    assert chi_product_ratio(u, v) == pytest.approx(1 / math.sqrt(2), rel=1e-10)


def test_chi_product_suite(grid32):
    st = verify_chi_product(grid32, 10, 0)
    assert st.verdict and st.max <= 1.0
    assert st.samples == 10


def test_interpolation(grid32):
    assert interpolation_ratio(cos2(grid32)) == pytest.approx(1.0, abs=1e-12)
    two = sample(grid32, lambda x, y, z: np.cos(x) + np.cos(2 * x))
    assert interpolation_ratio(two) == pytest.approx(2 / math.sqrt(4.5), rel=1e-12)
    assert interpolation_ratio(two) < 1


def test_chi_chain_single_mode(grid32, part32):
    a, b, c = chi_chain(cos2(grid32), part32)
    assert a <= b <= c * (1 + 1e-13)
    # a single shell at |k| = 2 = 2^1 lives in blocks 0 and 1
    assert b == pytest.approx(c, rel=1e-12)


def test_chain_suite(grid32, part32):
    equiv, interp = verify_chi_chain_and_interp(grid32, part32, 5, 0)
    assert equiv.extra["violations"] == 0 and equiv.verdict and interp.verdict
    assert 0.75 <= equiv.min and equiv.max <= 8 / 3
    with pytest.raises(ValueError, match="covered band"):
        verify_chi_chain_and_interp(grid32, part32, 1, 0, band=(0.01, 5))


def test_skp1_frozen_example(grid32, part32):
    u = vector(grid32, lambda x, y, z: np.sin(y))
    v = vector(grid32, None, None, lambda x, y, z: np.sin(x))
    r = skp1_ratio(u, v, 4, 1, part32)
    assert 0 < r < 1
    st = verify_skp1(grid32, part32, 4, 1, 3, 0)
    assert st.verdict and st.samples == 3


@pytest.mark.parametrize("eps, r, ws, wr", [(0.2, 2.0, None, INF), (0.0, 1.0, 3 / 6, 1.0)])
def test_skp2_frozen_closed_form(grid32, part32, eps, r, ws, wr):
    rng = sample_rng(4, 0)
    u = band_limited_random(grid32, rng, 1, 4, vector=True, solenoidal=True)
    v = band_limited_random(grid32, rng, 1, 4, vector=True, solenoidal=True)
    p = 6.0
    t = np.linspace(0, 1, 6)
    ratio = verify_skp2(t, [u] * 6, [v] * 6, part32, p, r, eps, weight_s=ws, weight_r=wr)
    s_w = 3 / p - eps if ws is None else ws
    lhs = besov_norm(advect(u, v), BesovParams(3 / p - 1, p, r), part32)
    hi = besov_norm(v, BesovParams(3 / p + 1, p, r), part32)
    lo = besov_norm(v, BesovParams(3 / p - 1, p, r), part32)
    w = besov_norm(u, BesovParams(s_w, p, wr), part32)
    expected = lhs / (hi ** ((1 + eps) / 2) * (w ** (2 / (1 - eps)) * lo) ** ((1 - eps) / 2))
    assert ratio == pytest.approx(expected, rel=0.01)
    assert skp2_weight(u, p, eps, part32, ws, wr) == pytest.approx(w ** (2 / (1 - eps)), rel=1e-12)


def test_skp2_errors(grid32, part32):
    u = band_limited_random(grid32, sample_rng(0, 0), 1, 3, vector=True)
    with pytest.raises(ValueError, match="5 snapshots"):
        verify_skp2([0, 1], [u] * 2, [u] * 2, part32, 6, 1, 0)
    with pytest.raises(ValueError, match="differ"):
        verify_skp2(range(5), [u] * 5, [u] * 4, part32, 6, 1, 0)
    with pytest.raises(ValueError):
        verify_skp2(range(5), [u] * 5, [u] * 5, part32, 6, 1, 1.0)


def test_determinism(grid32):
    a = verify_chi_product(grid32, 4, 11)
    b = verify_chi_product(grid32, 4, 11)
    assert np.array_equal(a.ratios, b.ratios)
    c = verify_chi_product(grid32, 4, 12)
    assert not np.array_equal(a.ratios, c.ratios)


def test_sample_independent_of_resolution():
    f32 = band_limited_random(make_grid(32), sample_rng(3, 1), 1, 4)
    f64 = band_limited_random(make_grid(64), sample_rng(3, 1), 1, 4)
    from elsasser.norms import chi_norm

    assert chi_norm(f32, 0) == pytest.approx(chi_norm(f64, 0), rel=1e-12)


def test_bernstein_drift():
    b32 = verify_bernstein(make_grid(32), 3, 0)
    b64 = verify_bernstein(make_grid(64), 3, 0)
    for a, b in zip(b32, b64):
        assert a.verdict and b.verdict
        assert resolution_drift(a, b) < 2


def test_bernstein_degenerate(grid32):
    with pytest.raises(ValueError):
        verify_bernstein(grid32, 1, 0, annulus=(2, 1))


def test_ratio_stats_verdicts():
    ok = RatioStats("x", 32, np.array([0.5, 1.0]), bound=(None, 1.0))
    assert ok.verdict and ok.median == 0.75
    assert not RatioStats("x", 32, np.array([1.5]), bound=(None, 1.0)).verdict
    assert not RatioStats("x", 32, np.array([0.1]), bound=(0.5, None)).verdict
    assert not RatioStats("x", 32, np.array([math.inf])).verdict
    assert not RatioStats("x", 32, np.array([0.1]), extra={"violations": 1}).verdict
    d = ok.to_dict()
    assert d["id"] == "x" and d["samples"] == 2 and d["max"] == 1.0


def test_default_partition():
    assert default_partition(make_grid(32)).j_max == 3
    assert default_partition(make_grid(64)).j_max == 4
