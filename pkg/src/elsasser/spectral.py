"""
Fourier representation of real fields on the periodic box [0, 2pi)^3.

Coefficients follow the Fourier-series convention

    f(x) = sum_k c_k exp(i k.x),      c_k = (1/N^3) sum_x f(x) exp(-i k.x)

and are stored as the real-to-complex half spectrum (last axis holds
k3 = 0 .. n/2).  Every field built here is real, so the other half of the
lattice is implied by c_{-k} = conj(c_k).  Sums over the full lattice of a
quantity that is even in k are evaluated with ``Grid.weight``, which counts
the interior k3 planes twice.

Array axis 0 is x1, axis 1 is x2, axis 2 is x3.  L^p norms elsewhere in the
package use the normalized measure (2pi)^-3 dx, so ||exp(ik.x)||_p = 1.
"""

from __future__ import annotations

import functools
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import scipy.fft as sfft

BOX_LENGTH = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform n^3 collocation grid and its half-spectrum frequency lattice."""

    n: int
    kx: np.ndarray = field(repr=False)
    ky: np.ndarray = field(repr=False)
    kz: np.ndarray = field(repr=False)
    k2: np.ndarray = field(repr=False)
    kmag: np.ndarray = field(repr=False)
    inv_k2: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)
    nyquist_free: np.ndarray = field(repr=False)
    dealias_mask: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n // 2 + 1)

    @property
    def spacing(self) -> float:
        return BOX_LENGTH / self.n

    @property
    def dealias_cutoff(self) -> float:
        """Largest |k_m| kept by the 2/3 rule."""
        return self.n / 3.0

    @property
    def max_resolved_wavenumber(self) -> float:
        """|k| at the corner of the lattice."""
        return np.sqrt(3.0) * self.n / 2

    def wavevectors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.kx, self.ky, self.kz

    def coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.arange(self.n) * self.spacing
        return np.meshgrid(x, x, x, indexing="ij")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Grid) and other.n == self.n

    def __hash__(self) -> int:
        return hash(("Grid", self.n))


@functools.lru_cache(maxsize=None)
def make_grid(n: int) -> Grid:
    """Build the grid with ``n`` points per axis.

    ``n`` must be a power of two and at least 8.  Grids are cached, so two
    calls with the same ``n`` return the same object.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError(f"grid size must be an integer, got {n!r}")
    n = int(n)
    if n < 8 or n & (n - 1):
        raise ValueError(f"grid size must be a power of two >= 8, got {n}")

    k_full = sfft.fftfreq(n, d=1.0 / n)
    k_half = sfft.rfftfreq(n, d=1.0 / n)
    kx = k_full.reshape(n, 1, 1)
    ky = k_full.reshape(1, n, 1)
    kz = k_half.reshape(1, 1, n // 2 + 1)
    k2 = kx**2 + ky**2 + kz**2
    kmag = np.sqrt(k2)
    inv_k2 = np.zeros_like(k2)
    np.divide(1.0, k2, out=inv_k2, where=k2 > 0)

    weight = np.full(kz.shape, 2.0)
    weight[..., 0] = 1.0
    weight[..., -1] = 1.0

    half = n // 2
    nyquist_free = (np.abs(kx) < half) & (np.abs(ky) < half) & (np.abs(kz) < half)
    cutoff = n / 3.0
    dealias_mask = (np.abs(kx) <= cutoff) & (np.abs(ky) <= cutoff) & (np.abs(kz) <= cutoff)

    arrays = [kx, ky, kz, k2, kmag, inv_k2, weight, nyquist_free, dealias_mask]
    for a in arrays:
        a.setflags(write=False)
    return Grid(n, *arrays)


def _grid_of(shape: tuple[int, ...]) -> Grid:
    if len(shape) != 3 or not (shape[0] == shape[1] == shape[2]):
        raise ValueError(f"expected an n x n x n array, got shape {shape}")
    return make_grid(shape[0])


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Real scalar field held as half-spectrum Fourier coefficients."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.spectral_shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid "
                f"{self.grid.spectral_shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.spectral_shape, dtype=complex))

    def physical(self) -> np.ndarray:
        return to_physical(self)

    def coefficient(self, k: Sequence[int]) -> complex:
        """Coefficient c_k for any lattice vector, using conjugate symmetry."""
        n = self.grid.n
        k1, k2, k3 = (int(v) for v in k)
        if k3 < 0:
            return complex(np.conj(self.coeffs[(-k1) % n, (-k2) % n, -k3]))
        return complex(self.coeffs[k1 % n, k2 % n, k3])

    def _check(self, other: "SpectralField") -> None:
        if not isinstance(other, SpectralField):
            raise TypeError(f"expected SpectralField, got {type(other).__name__}")
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SpectralField(self.grid, self.coeffs / scalar)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Three real components on a shared grid, coefficients shaped (3, ...)."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (3,) + self.grid.spectral_shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid "
                f"(3,) + {self.grid.spectral_shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((3,) + grid.spectral_shape, dtype=complex))

    @classmethod
    def from_components(cls, components: Sequence[SpectralField]) -> "VectorField":
        if len(components) != 3:
            raise ValueError("a vector field needs exactly 3 components")
        grid = components[0].grid
        for c in components[1:]:
            if c.grid != grid:
                raise ValueError("components live on different grids")
        return cls(grid, np.stack([c.coeffs for c in components]))

    @property
    def components(self) -> tuple[SpectralField, SpectralField, SpectralField]:
        return tuple(SpectralField(self.grid, c) for c in self.coeffs)

    def physical(self) -> np.ndarray:
        return to_physical(self)

    def _check(self, other: "VectorField") -> None:
        if not isinstance(other, VectorField):
            raise TypeError(f"expected VectorField, got {type(other).__name__}")
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        self._check(other)
        return VectorField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return VectorField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self):
        return VectorField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        return VectorField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return VectorField(self.grid, self.coeffs / scalar)


Field = Union[SpectralField, VectorField]


def forward(samples: np.ndarray) -> np.ndarray:
    """Half-spectrum coefficients of real samples over the last three axes."""
    return sfft.rfftn(samples, axes=(-3, -2, -1), norm="forward")


def inverse(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Real samples from half-spectrum coefficients over the last three axes."""
    return sfft.irfftn(coeffs, s=(n, n, n), axes=(-3, -2, -1), norm="forward")


def to_spectral(samples: np.ndarray) -> Field:
    """Transform real grid samples to coefficients.

    A (n, n, n) array gives a SpectralField, a (3, n, n, n) array a
    VectorField.  The transform is lossless; mean and Nyquist removal are
    done separately by :func:`homogenize`.
    """
    samples = np.asarray(samples)
    if np.iscomplexobj(samples):
        raise ValueError("to_spectral expects real samples")
    if samples.ndim == 4 and samples.shape[0] == 3:
        grid = _grid_of(samples.shape[1:])
        return VectorField(grid, forward(samples.astype(float)))
    grid = _grid_of(samples.shape)
    return SpectralField(grid, forward(samples.astype(float)))


def to_physical(f: Field) -> np.ndarray:
    return inverse(f.coeffs, f.grid.n)


def _same_kind(f: Field, coeffs: np.ndarray) -> Field:
    return type(f)(f.grid, coeffs)


def homogenize(f: Field) -> Field:
    """Zero the mean mode and every Nyquist row."""
    c = f.coeffs * f.grid.nyquist_free
    c[..., 0, 0, 0] = 0.0
    return _same_kind(f, c)


def dealias(f: Field) -> Field:
    """2/3 rule: zero every mode with some |k_m| > n/3."""
    return _same_kind(f, f.coeffs * f.grid.dealias_mask)


def derivative(f: Field, axis: int) -> Field:
    """Spectral derivative along x_axis (axis in {1, 2, 3})."""
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis!r}")
    k = f.grid.wavevectors()[axis - 1]
    return _same_kind(f, 1j * k * f.coeffs * f.grid.nyquist_free)


def gradient(f: SpectralField) -> VectorField:
    g = f.grid
    c = f.coeffs * g.nyquist_free
    return VectorField(g, np.stack([1j * k * c for k in g.wavevectors()]))


def divergence(v: VectorField) -> SpectralField:
    g = v.grid
    c = sum(1j * k * v.coeffs[m] for m, k in enumerate(g.wavevectors()))
    return SpectralField(g, c * g.nyquist_free)


def laplacian(f: Field) -> Field:
    return _same_kind(f, -f.grid.k2 * f.coeffs)


def project_coeffs(c: np.ndarray, grid: Grid) -> np.ndarray:
    """Leray projection on a raw (3, ...) coefficient array."""
    kx, ky, kz = grid.wavevectors()
    kdotc = (kx * c[0] + ky * c[1] + kz * c[2]) * grid.inv_k2
    return np.stack([c[0] - kx * kdotc, c[1] - ky * kdotc, c[2] - kz * kdotc])


def leray_project(v: VectorField) -> VectorField:
    """Project onto divergence-free fields; the k = 0 mode is left alone."""
    return VectorField(v.grid, project_coeffs(v.coeffs, v.grid))


def advect(u: VectorField, v: VectorField) -> VectorField:
    """Dealiased (u . grad) v, products formed on the collocation grid."""
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")
    g = u.grid
    up = inverse(u.coeffs, g.n)
    out = np.zeros((3,) + g.shape)
    for m, k in enumerate(g.wavevectors()):
        dv = inverse(1j * k * v.coeffs * g.nyquist_free, g.n)
        out += up[m] * dv
    return VectorField(g, forward(out) * g.dealias_mask * g.nyquist_free)


def band_extent(coeffs: np.ndarray, n: int) -> tuple[int, int, int]:
    """Largest |k_a| carrying a coefficient above round-off, per axis.

    Coefficients below ``1e-14`` times the largest one are treated as empty,
    so sampled fields are not mistaken for full-band ones.
    """
    mag = np.abs(coeffs).reshape((-1,) + coeffs.shape[-3:]).max(axis=0)
    occupied = mag > 1e-14 * mag.max(initial=0.0)
    if not occupied.any():
        return (0, 0, 0)
    k = sfft.fftfreq(n, d=1.0 / n).astype(int)
    k1 = np.abs(k[occupied.any(axis=(1, 2))]).max()
    k2 = np.abs(k[occupied.any(axis=(0, 2))]).max()
    k3 = np.nonzero(occupied.any(axis=(0, 1)))[0].max()
    return int(k1), int(k2), int(k3)


def resample(coeffs: np.ndarray, n: int, sizes: Sequence[int]) -> np.ndarray:
    """Evaluate a band-limited field on an M1 x M2 x M3 grid.

    Every size must exceed twice the field's bandwidth on that axis.
    """
    sizes = tuple(int(s) for s in sizes)
    if sizes == (n, n, n):
        return inverse(coeffs, n)
    K = band_extent(coeffs, n)
    for s, kb in zip(sizes, K):
        if s <= 2 * kb:
            raise ValueError(f"grid size {s} cannot hold bandwidth {kb}")
    lead = coeffs.shape[:-3]
    out = np.zeros(lead + (sizes[0], sizes[1], sizes[2] // 2 + 1), dtype=complex)
    a = np.arange(-K[0], K[0] + 1)
    b = np.arange(-K[1], K[1] + 1)
    c = np.arange(K[2] + 1)
    src = coeffs[..., (a % n)[:, None, None], (b % n)[None, :, None], c[None, None, :]]
    out[..., (a % sizes[0])[:, None, None], (b % sizes[1])[None, :, None], c[None, None, :]] = src
    return sfft.irfftn(out, s=sizes, axes=(-3, -2, -1), norm="forward")


def quadrature_sizes(coeffs: np.ndarray, n: int, p: float) -> tuple[int, int, int]:
    """Grid on which the mean of |f|^p is exact.

    For even integer p, |f|^p is a trigonometric polynomial of degree p*K_a
    per axis, so M_a > p*K_a points integrate it exactly.  Other exponents
    (including inf) use the native grid.
    """
    if not (np.isfinite(p) and float(p).is_integer() and int(p) % 2 == 0):
        return (n, n, n)
    K = band_extent(coeffs, n)
    return tuple(sfft.next_fast_len(int(p) * kb + 1, real=True) if kb else 1 for kb in K)


def inner(f: Field, h: Field) -> float:
    """L^2 inner product with the normalized measure."""
    if f.grid != h.grid:
        raise ValueError("fields live on different grids")
    w = f.grid.weight
    return float(np.sum(w * (f.coeffs * np.conj(h.coeffs)).real))


def energy_sum(f: Field) -> float:
    """||f||_2^2 by Parseval."""
    return inner(f, f)


def embed(local: np.ndarray, kmax: int, grid: Grid) -> np.ndarray:
    """Place full-lattice coefficients on [-kmax, kmax]^3 into the half spectrum.

    ``local`` has shape (..., 2kmax+1, 2kmax+1, 2kmax+1) and is indexed by
    k + kmax.  It must already be conjugate-symmetric.
    """
    n = grid.n
    if 2 * kmax >= n:
        raise ValueError(f"band |k_m| <= {kmax} does not fit on an n={n} grid")
    out = np.zeros(local.shape[:-3] + grid.spectral_shape, dtype=complex)
    ks = np.arange(-kmax, kmax + 1)
    rows = ks % n
    sub = local[..., kmax:]  # k3 >= 0
    out[..., rows[:, None, None], rows[None, :, None], np.arange(kmax + 1)[None, None, :]] = sub
    return out


def band_limited_random(
    grid: Grid,
    rng: np.random.Generator,
    k_min: float,
    k_max: float,
    *,
    vector: bool = False,
    solenoidal: bool = False,
) -> Field:
    """Random real field with coefficients supported in k_min <= |k| <= k_max.

    Coefficients are independent complex Gaussians, symmetrized to a real
    field.  They are drawn on the local cube |k_m| <= ceil(k_max), so the
    same generator state gives the same function on every grid that can
    hold the band.
    """
    kb = int(np.ceil(k_max))
    side = 2 * kb + 1
    ncomp = 3 if vector else 1
    c = rng.standard_normal((ncomp, side, side, side)) + 1j * rng.standard_normal(
        (ncomp, side, side, side)
    )
    ks = np.arange(-kb, kb + 1, dtype=float)
    kk = np.sqrt(ks[:, None, None] ** 2 + ks[None, :, None] ** 2 + ks[None, None, :] ** 2)
    c *= (kk >= k_min) & (kk <= k_max) & (kk > 0)
    c = 0.5 * (c + np.conj(c[:, ::-1, ::-1, ::-1]))
    coeffs = embed(c, kb, grid) * grid.nyquist_free
    if vector:
        if solenoidal:
            coeffs = project_coeffs(coeffs, grid)
        return VectorField(grid, coeffs)
    return SpectralField(grid, coeffs[0])


# -- checkpoints -------------------------------------------------------------

MAGIC = b"ELSF"
_HEADER = struct.Struct("<4sIII")
_DTYPES = {1: np.dtype("<c8"), 2: np.dtype("<c16")}


def full_spectrum(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Expand half-spectrum coefficients (..., n, n, n//2+1) to the full lattice."""
    out = np.empty(coeffs.shape[:-3] + (n, n, n), dtype=complex)
    h = n // 2 + 1
    out[..., :h] = coeffs
    idx = (-np.arange(n)) % n
    rest = np.arange(h, n)
    mirror = np.conj(coeffs[..., idx[:, None, None], idx[None, :, None], ((-rest) % n)[None, None, :]])
    out[..., h:] = mirror
    return out


def write_checkpoint(path: str | Path, fields: Sequence[Field], version: int = 1) -> int:
    """Write fields as an ELSF checkpoint and return the byte count.

    Layout: magic ``ELSF``, then little-endian u32 version, n and component
    count, then every component's full-lattice coefficients in row-major
    order with axes in FFT index order (k = 0..n/2-1, -n/2..-1).  Version 1
    stores complex64, version 2 complex128.
    """
    if version not in _DTYPES:
        raise ValueError(f"unknown checkpoint version {version}")
    comps = []
    for f in fields:
        comps.extend([f.coeffs] if isinstance(f, SpectralField) else list(f.coeffs))
    if not comps:
        raise ValueError("nothing to write")
    n = fields[0].grid.n
    data = full_spectrum(np.stack(comps), n).astype(_DTYPES[version])
    payload = _HEADER.pack(MAGIC, version, n, len(comps)) + data.tobytes()
    Path(path).write_bytes(payload)
    return len(payload)


def read_checkpoint(path: str | Path) -> list[SpectralField]:
    """Read an ELSF checkpoint as a list of scalar components."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, n, count = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version not in _DTYPES:
        raise ValueError(f"{path}: unsupported version {version}")
    dtype = _DTYPES[version]
    expected = _HEADER.size + count * n**3 * dtype.itemsize
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype=dtype, offset=_HEADER.size).reshape(count, n, n, n)
    grid = make_grid(n)
    half = data[..., : n // 2 + 1].astype(complex)
    return [SpectralField(grid, c) for c in half]


def as_vectors(components: Sequence[SpectralField]) -> list[VectorField]:
    if len(components) % 3:
        raise ValueError(f"{len(components)} components do not form vector fields")
    return [VectorField.from_components(components[i : i + 3]) for i in range(0, len(components), 3)]
