import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sample, vector
from elsasser.spectral import (
    SpectralField,
    VectorField,
    advect,
    as_vectors,
    band_limited_random,
    dealias,
    derivative,
    divergence,
    energy_sum,
    full_spectrum,
    gradient,
    homogenize,
    inner,
    laplacian,
    leray_project,
    make_grid,
    read_checkpoint,
    resample,
    to_physical,
    to_spectral,
    write_checkpoint,
)


@pytest.mark.parametrize("n", [8, 16, 32])
def test_grid_lattice(n):
    g = make_grid(n)
    assert g.shape == (n, n, n)
    assert np.prod(g.shape) == n**3
    assert g.kx.min() == -n // 2 and g.kx.max() == n // 2 - 1
    # every Nyquist row is masked
    assert not g.nyquist_free[n // 2].any()
    assert not g.nyquist_free[..., -1].any()


@pytest.mark.parametrize("n", [12, 4, 0, 33, 6.0, True])
def test_grid_rejects(n):
    with pytest.raises(ValueError):
        make_grid(n)


def test_cos_coefficients(grid32):
    f = sample(grid32, lambda x, y, z: np.cos(x))
    assert f.coefficient((1, 0, 0)) == pytest.approx(0.5, abs=1e-15)
    assert f.coefficient((-1, 0, 0)) == pytest.approx(0.5, abs=1e-15)
    c = f.coeffs.copy()
    c[1, 0, 0] = c[-1, 0, 0] = 0
    assert np.abs(c).max() < 1e-15


def test_zero_samples(grid32):
    assert not np.any(to_spectral(np.zeros(grid32.shape)).coeffs)


def test_round_trip(grid32, rng):
    s = rng.standard_normal(grid32.shape)
    back = to_physical(to_spectral(s))
    assert np.max(np.abs(back - s)) < 1e-12 * np.max(np.abs(s))


def test_size_mismatch():
    with pytest.raises(ValueError):
        to_spectral(np.zeros((8, 8, 16)))


@pytest.mark.parametrize(
    "fn, axis, expected",
    [
        (lambda x, y, z: np.cos(x), 1, lambda x, y, z: -np.sin(x)),
        (lambda x, y, z: np.sin(2 * z), 3, lambda x, y, z: 2 * np.cos(2 * z)),
        (lambda x, y, z: np.ones_like(x), 2, lambda x, y, z: np.zeros_like(x)),
    ],
)
def test_derivative(grid32, fn, axis, expected):
    d = derivative(sample(grid32, fn), axis)
    want = sample(grid32, expected)
    assert np.max(np.abs(to_physical(d) - to_physical(want))) < 1e-12


def test_derivative_bad_axis(grid32):
    with pytest.raises(ValueError):
        derivative(SpectralField.zeros(grid32), 0)


def test_laplacian_single_mode(grid32):
    f = sample(grid32, lambda x, y, z: np.sin(x + 2 * y))
    assert np.allclose(laplacian(f).coeffs, -5 * f.coeffs)


def test_leray_kills_gradient(grid32):
    phi = sample(grid32, lambda x, y, z: np.sin(x) * np.sin(y))
    assert np.abs(leray_project(gradient(phi)).coeffs).max() < 1e-15


def test_leray_keeps_solenoidal(grid32):
    v = vector(grid32, lambda x, y, z: np.sin(y))
    assert np.allclose(leray_project(v).coeffs, v.coeffs)


def test_leray_removes_divergence(grid32):
    v = vector(grid32, lambda x, y, z: np.sin(x))
    assert np.abs(divergence(v).coeffs).max() > 0.1
    assert np.abs(divergence(leray_project(v)).coeffs).max() < 1e-12


def test_leray_idempotent_self_adjoint(grid32, rng):
    a = band_limited_random(grid32, rng, 1, 6, vector=True)
    b = band_limited_random(grid32, rng, 1, 6, vector=True)
    pa = leray_project(a)
    assert np.abs(leray_project(pa).coeffs - pa.coeffs).max() < 1e-12
    lhs = inner(pa, b)
    rhs = inner(a, leray_project(b))
    assert abs(lhs - rhs) < 1e-10 * max(abs(lhs), 1.0)


@pytest.mark.parametrize(
    "u, v, expected",
    [
        ((lambda x, y, z: np.sin(y),), (lambda x, y, z: np.sin(y),), None),
        ((lambda x, y, z: np.sin(y),), (lambda x, y, z: np.sin(x),), lambda x, y, z: np.sin(y) * np.cos(x)),
        ((None,), (lambda x, y, z: np.sin(x),), None),
    ],
)
def test_advect_examples(grid32, u, v, expected):
    out = advect(vector(grid32, *u), vector(grid32, *v))
    want = np.zeros((3,) + grid32.shape)
    if expected is not None:
        want[0] = expected(*grid32.coordinates())
    assert np.max(np.abs(out.physical() - want)) < 1e-12


def test_advect_skew(grid32, rng):
    u = band_limited_random(grid32, rng, 1, 5, vector=True, solenoidal=True)
    v = band_limited_random(grid32, rng, 1, 5, vector=True)
    val = inner(advect(u, v), v)
    scale = np.sqrt(energy_sum(u)) * energy_sum(v)
    assert abs(val) < 1e-8 * scale


def test_dealias(grid32, rng):
    f = sample(grid32, lambda x, y, z: np.cos(12 * x) + np.cos(x + y + z))
    d = dealias(f)
    assert d.coefficient((12, 0, 0)) == 0
    assert d.coefficient((1, 1, 1)) == pytest.approx(0.5)
    r = band_limited_random(grid32, rng, 0.5, 15)
    assert np.array_equal(dealias(dealias(r)).coeffs, dealias(r).coeffs)


def test_homogenize_removes_mean(grid32):
    f = homogenize(sample(grid32, lambda x, y, z: 3 + np.cos(x)))
    assert f.coeffs[0, 0, 0] == 0
    assert f.coefficient((1, 0, 0)) == pytest.approx(0.5)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_parseval(seed):
    g = make_grid(16)
    f = band_limited_random(g, np.random.default_rng(seed), 0.5, 5)
    direct = np.mean(to_physical(f) ** 2)
    assert abs(energy_sum(f) - direct) < 1e-10 * direct


def test_random_field_is_resolution_independent(rng):
    seed = 7
    a = band_limited_random(make_grid(16), np.random.default_rng(seed), 1, 4)
    b = band_limited_random(make_grid(32), np.random.default_rng(seed), 1, 4)
    ka = a.coefficient((2, -1, 3))
    kb = b.coefficient((2, -1, 3))
    assert ka == kb
    assert energy_sum(a) == pytest.approx(energy_sum(b), rel=1e-14)


def test_solenoidal_random(grid32, rng):
    v = band_limited_random(grid32, rng, 1, 8, vector=True, solenoidal=True)
    assert np.abs(divergence(v).coeffs).max() < 1e-10 * np.abs(v.coeffs).max()


def test_resample_matches_native(grid32, rng):
    f = band_limited_random(grid32, rng, 1, 4)
    fine = resample(f.coeffs, 32, (16, 16, 16))
    assert np.max(np.abs(fine - to_physical(f)[::2, ::2, ::2])) < 1e-12
    with pytest.raises(ValueError):
        resample(f.coeffs, 32, (8, 8, 8))


@pytest.mark.parametrize("version, tol", [(1, 1e-6), (2, 0.0)])
def test_checkpoint_round_trip(tmp_path, grid32, rng, version, tol):
    u = band_limited_random(grid32, rng, 1, 6, vector=True, solenoidal=True)
    s = band_limited_random(grid32, rng, 1, 6)
    path = tmp_path / "f.elsf"
    size = write_checkpoint(path, [u, s], version=version)
    itemsize = 8 if version == 1 else 16
    assert size == 16 + 4 * 32**3 * itemsize == path.stat().st_size
    raw = path.read_bytes()
    assert raw[:4] == b"ELSF"
    assert int.from_bytes(raw[4:8], "little") == version
    assert int.from_bytes(raw[8:12], "little") == 32
    assert int.from_bytes(raw[12:16], "little") == 4
    comps = read_checkpoint(path)
    back = as_vectors(comps[:3])[0]
    err = np.abs(back.coeffs - u.coeffs).max()
    assert err <= tol * np.abs(u.coeffs).max()


def test_checkpoint_layout_is_full_lattice(tmp_path, grid32):
    f = sample(grid32, lambda x, y, z: np.cos(x + 2 * y))
    write_checkpoint(tmp_path / "a.elsf", [f], version=2)
    data = np.frombuffer((tmp_path / "a.elsf").read_bytes()[16:], dtype="<c16").reshape(32, 32, 32)
    assert data[1, 2, 0] == pytest.approx(0.5)
    assert data[-1, -2, 0] == pytest.approx(0.5)
    assert np.array_equal(data, full_spectrum(f.coeffs, 32))


@pytest.mark.parametrize("payload", [b"XXXX" + bytes(12), b"ELS"])
def test_checkpoint_rejects_bad_files(tmp_path, payload):
    p = tmp_path / "bad.elsf"
    p.write_bytes(payload)
    with pytest.raises(ValueError):
        read_checkpoint(p)


def test_field_algebra_checks_grid():
    a = SpectralField.zeros(make_grid(8))
    b = SpectralField.zeros(make_grid(16))
    with pytest.raises(ValueError):
        a + b
    with pytest.raises(ValueError):
        VectorField.zeros(make_grid(8)) - VectorField.zeros(make_grid(16))
