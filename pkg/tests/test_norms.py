import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sample
from elsasser.littlewood_paley import block_lp_norms, build_partition
from elsasser.norms import (
    INF,
    BesovParams,
    BlockNormHistory,
    b111_norm,
    besov_from_blocks,
    besov_norm,
    chemin_lerner,
    chemin_lerner_prefix,
    chemin_lerner_weighted,
    chi_norm,
    fmt,
    lp_norm,
    lr_sum,
    read_norm_rows,
    richardson_error,
    sobolev_partition_sum,
    time_norm,
    write_norm_rows,
)
from elsasser.spectral import SpectralField, band_limited_random, make_grid


@pytest.mark.parametrize("p", [1, 2, 3, 4, 7.5, INF])
def test_complex_mode_unit_norm(grid32, p):
    x1, _, _ = grid32.coordinates()
    assert lp_norm(np.exp(2j * x1), p) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("p, expected", [(2, 1 / math.sqrt(2)), (4, (3 / 8) ** 0.25), (6, (5 / 16) ** (1 / 6)), (INF, 1.0)])
def test_cos_lp(grid32, p, expected):
    f = sample(grid32, lambda x, y, z: np.cos(x))
    assert lp_norm(f, p) == pytest.approx(expected, rel=1e-13)


def test_lp_exact_quadrature_beats_grid(grid32):
    # cos(10 x)^6 aliases on 32 points; the field path integrates it exactly
    f = sample(grid32, lambda x, y, z: np.cos(10 * x))
    assert lp_norm(f, 6) == pytest.approx((5 / 16) ** (1 / 6), rel=1e-13)


def test_lp_vector_magnitude(grid32):
    from conftest import vector

    v = vector(grid32, lambda x, y, z: np.cos(x), lambda x, y, z: np.sin(x))
    for p in (2, 4, INF):
        assert lp_norm(v, p) == pytest.approx(1.0, rel=1e-13)


def test_lp_zero_and_errors(grid32):
    assert lp_norm(SpectralField.zeros(grid32), 3) == 0.0
    with pytest.raises(ValueError):
        lp_norm(np.ones(4), 0.5)
    with pytest.raises(ValueError):
        BesovParams(0, 2, 0.9)


def test_lr_sum():
    assert lr_sum([3, 4], 2) == pytest.approx(5)
    assert lr_sum([3, 4], INF) == 4
    assert lr_sum([], 1) == 0


def test_besov_cos(grid32, part32):
    f = sample(grid32, lambda x, y, z: np.cos(x))
    assert besov_norm(f, BesovParams(0, 2, 1), part32) == pytest.approx(1 / math.sqrt(2), rel=1e-13)
    sup = besov_norm(f, BesovParams(0, 2, INF), part32)
    assert sup <= 1 / math.sqrt(2)
    # phi at |xi| = 1 for j = -1 is the larger half of the split
    assert sup == pytest.approx(0.641834045088731 / math.sqrt(2), rel=1e-12)


def test_besov_zero(grid32, part32):
    assert besov_norm(SpectralField.zeros(grid32), BesovParams(-0.5, 6, 1), part32) == 0.0


@pytest.mark.parametrize("s, expected", [(-1, 0.5), (0, 1.0), (1, 2.0)])
def test_chi_cos2(grid32, s, expected):
    f = sample(grid32, lambda x, y, z: np.cos(2 * x))
    assert chi_norm(f, s) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("mode", [(3, 0, 0), (1, 2, 2), (0, 3, 4)])
@pytest.mark.parametrize("s", [-1.0, 0.0, 0.5, 2.0])
def test_chi_homogeneity(grid32, mode, s):
    a, b, c = mode
    f = sample(grid32, lambda x, y, z: 0.7 * np.cos(a * x + b * y + c * z))
    m = math.sqrt(a * a + b * b + c * c)
    # round-off in the 32^3 other coefficients is weighted by |k|^s
    assert chi_norm(f, s) == pytest.approx(m**s * 0.7, rel=1e-10)


def test_chi_zero(grid32):
    assert chi_norm(SpectralField.zeros(grid32), -1) == 0


def test_b111_single_mode(grid32, part32):
    f = sample(grid32, lambda x, y, z: np.cos(2 * x))
    ratio = b111_norm(f, part32) / chi_norm(f, -1)
    assert 0.75 <= ratio <= 8 / 3
    assert b111_norm(SpectralField.zeros(grid32), part32) == 0


@pytest.mark.parametrize("seed", range(3))
def test_b111_dominates_besov(grid32, part32, seed):
    f = band_limited_random(grid32, np.random.default_rng(seed), 1, 8)
    assert besov_norm(f, BesovParams(-1, INF, 1), part32) <= b111_norm(f, part32) * (1 + 1e-13)


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 10**6), s=st.floats(-1.5, 1.5))
def test_sobolev_equivalence(seed, s):
    g = make_grid(16)
    part = build_partition(g, -2, 2)
    f = band_limited_random(g, np.random.default_rng(seed), 1, 5)
    ratio = besov_norm(f, BesovParams(s, 2, 2), part) / sobolev_partition_sum(f, s, part)
    assert 0.5 <= ratio <= 2


def _history(values, times, js=(0, 1, 2), p=2.0):
    h = BlockNormHistory(tuple(js), p)
    for t, row in zip(times, values):
        h.append(t, row)
    return h


def test_chemin_lerner_constant():
    row = np.array([1.0, 0.5, 0.25])
    t = np.linspace(0, 2, 5)
    h = _history([row] * 5, t)
    inst = besov_from_blocks(row, h.js, 0.5, 1)
    assert chemin_lerner(h, 1, 0.5, 1) == pytest.approx(2 * inst, rel=1e-14)
    assert chemin_lerner(h, INF, 0.5, 1) == pytest.approx(inst, rel=1e-14)


def test_chemin_lerner_decay():
    t = np.linspace(0, 1, 41)
    row = np.array([1.0, 2.0, 3.0])
    h = _history([row * math.exp(-ti) for ti in t], t)
    exact = (1 - math.exp(-1)) * besov_from_blocks(row, h.js, 0.0, 1)
    # trapezoid error bound T h^2 / 12 max|a''| per unit block weight
    bound = (1 / 40) ** 2 / 12 * besov_from_blocks(row, h.js, 0.0, 1)
    assert abs(chemin_lerner(h, 1, 0.0, 1) - exact) <= bound


def test_chemin_lerner_weighted():
    t = np.linspace(0, 1, 41)
    row = np.array([1.0, 2.0, 3.0])
    h = _history([row] * len(t), t)
    assert chemin_lerner_weighted(h, np.ones(len(t)), 1, 0, 2) == pytest.approx(chemin_lerner(h, 1, 0, 2), rel=1e-15)
    assert chemin_lerner_weighted(h, np.zeros(len(t)), 1, 0, 2) == 0
    inst = besov_from_blocks(row, h.js, 0, 2)
    val = chemin_lerner_weighted(h, np.exp(-t), 1, 0, 2)
    assert abs(val - (1 - math.exp(-1)) * inst) <= (1 / 40) ** 2 / 12 * inst


def test_chemin_lerner_errors():
    h = _history([[1.0, 1.0, 1.0]], [0.0])
    with pytest.raises(ValueError):
        chemin_lerner(h, 1, 0, 1)
    assert chemin_lerner(h, INF, 0, 1) == pytest.approx(sum(2.0 ** np.array([0, 0, 0])))
    h2 = _history([[1.0] * 3] * 3, [0, 1, 2])
    with pytest.raises(ValueError):
        chemin_lerner_weighted(h2, [1, 1], 1, 0, 1)
    with pytest.raises(ValueError):
        chemin_lerner_weighted(h2, [1, -1, 1], 1, 0, 1)
    with pytest.raises(ValueError):
        h2.append(1.5, [1.0] * 3)
    with pytest.raises(ValueError):
        h2.append(3.0, [1.0, -1.0, 1.0])
    with pytest.raises(ValueError):
        h2.append(3.0, [1.0])


def test_prefix_matches_full():
    rng = np.random.default_rng(3)
    t = np.cumsum(rng.uniform(0.1, 0.2, 12))
    h = _history(rng.uniform(0, 1, (12, 3)), t)
    for r1 in (1.0, 2.0, INF):
        pre = chemin_lerner_prefix(h, r1, -0.5, 2)
        assert pre[-1] == pytest.approx(chemin_lerner(h, r1, -0.5, 2), rel=1e-13)
        assert np.all(np.diff(pre) >= 0)
        for i in (3, 7):
            assert pre[i] == pytest.approx(chemin_lerner(h.truncated(i + 1), r1, -0.5, 2), rel=1e-13)


def test_richardson_estimate():
    t = np.linspace(0, 1, 21)
    h = _history([[math.exp(-3 * ti)] * 3 for ti in t], t)
    err = richardson_error(h, 1, 0, 1)
    exact = 3 * (1 - math.exp(-3)) / 3
    assert abs(chemin_lerner(h, 1, 0, 1) - exact) < 3 * err
    with pytest.raises(ValueError):
        richardson_error(h.truncated(2), 1, 0, 1)


def test_time_norm():
    t = np.linspace(0, 1, 101)
    assert time_norm(t, np.ones_like(t), 2) == pytest.approx(1.0)
    assert time_norm(t, t, INF) == 1.0


def test_block_norms_vector(grid32, part32):
    from conftest import vector

    v = vector(grid32, lambda x, y, z: np.cos(4 * y), lambda x, y, z: np.sin(4 * y))
    norms = block_lp_norms(v, part32, [2.0, INF])
    # |v| = 1 pointwise, split between blocks 1 and 2
    assert norms[2.0].sum() == pytest.approx(1.0, rel=1e-12)
    assert norms[INF].sum() == pytest.approx(1.0, rel=1e-12)


def test_csv_round_trip(tmp_path):
    rows = [(0.0, "W-", -0.5, 6.0, 1.0, 0.1 + 0.2), (0.1, "W+", -0.5, INF, 2.0, 1e-300)]
    write_norm_rows(tmp_path / "n.csv", rows)
    back = read_norm_rows(tmp_path / "n.csv")
    assert list(back[0]) == ["t", "name", "s", "p", "r", "value"]
    assert float(back[0]["value"]) == 0.1 + 0.2
    assert back[1]["p"] == "inf"
    assert fmt(3) == "3" and fmt(None) == ""
