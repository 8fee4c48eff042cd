"""
Norms: L^p, homogeneous Besov, the weighted l^1 spaces chi^s, the
frequency-side B^{-1}_{1,1}, and Chemin-Lerner space-time norms built from
per-block histories.

All Besov-type quantities are restricted to the partition's finite j-range.
Vector fields use the Euclidean magnitude (pointwise in x for L^p, per
coefficient for the frequency-side norms).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .littlewood_paley import DyadicPartition, block_lp_norms
from .spectral import Field, SpectralField, VectorField, quadrature_sizes, resample

INF = math.inf


def _check_exponent(name: str, v: float) -> float:
    v = float(v)
    if math.isnan(v) or v < 1:
        raise ValueError(f"{name} must be >= 1 (or inf), got {v}")
    return v


@dataclass(frozen=True)
class BesovParams:
    s: float
    p: float
    r: float

    def __post_init__(self):
        _check_exponent("p", self.p)
        _check_exponent("r", self.r)

    @classmethod
    def critical(cls, p: float, r: float, shift: float = -1.0) -> "BesovParams":
        """Index 3/p + shift, e.g. the scaling-critical 3/p - 1."""
        return cls(3.0 / p + shift, p, r)


def field_samples(coeffs: np.ndarray, n: int, p: float) -> np.ndarray:
    """Pointwise magnitude on a grid where the mean of |f|^p is exact (even p)."""
    x = resample(coeffs, n, quadrature_sizes(coeffs, n, p))
    if coeffs.ndim == 4:
        x = np.sqrt(np.sum(x * x, axis=0))
    return x


def lp_norm(f, p: float) -> float:
    """L^p norm with the normalized measure; ``f`` is a field or a sample array.

    Sample arrays use the plain grid mean (1/N^3) sum_x |f(x)|^p, taking the
    magnitude first for shape (3, n, n, n).  Fields are evaluated on a grid
    fine enough that the mean is exact for even integer p; other p use the
    native collocation grid.
    """
    p = _check_exponent("p", p)
    if isinstance(f, (SpectralField, VectorField)):
        x = field_samples(f.coeffs, f.grid.n, p)
    else:
        x = np.asarray(f)
        if x.ndim == 4:
            x = np.sqrt(np.sum(np.abs(x) ** 2, axis=0))
    a = np.abs(x)
    if p == INF:
        return float(a.max(initial=0.0))
    if p == 2.0:
        return float(np.sqrt(np.mean(a * a)))
    return float(np.mean(a**p) ** (1.0 / p))


def lr_sum(terms, r: float) -> float:
    """l^r norm of a nonnegative sequence."""
    t = np.asarray(terms, dtype=float)
    if t.size == 0:
        return 0.0
    if r == INF:
        return float(t.max())
    if r == 1.0:
        return float(t.sum())
    return float(np.sum(t**r) ** (1.0 / r))


def besov_from_blocks(block_norms: np.ndarray, js: Sequence[int], s: float, r: float) -> float:
    weights = 2.0 ** (s * np.asarray(js, dtype=float))
    return lr_sum(weights * block_norms, r)


def besov_norm(f: Field, params: BesovParams, part: DyadicPartition) -> float:
    """(sum_j (2^{js} ||Delta_j f||_p)^r)^{1/r} over the partition range."""
    if len(part.js) == 0:
        raise ValueError("empty partition")
    norms = block_lp_norms(f, part, [params.p])[params.p]
    return besov_from_blocks(norms, part.js, params.s, params.r)


def _coeff_magnitude(f: Field) -> np.ndarray:
    if isinstance(f, VectorField):
        return np.sqrt(np.sum(np.abs(f.coeffs) ** 2, axis=0))
    return np.abs(f.coeffs)


def chi_norm(f: Field, s: float) -> float:
    """sum_{k != 0} |k|^s |c_k| over the full lattice."""
    g = f.grid
    mag = _coeff_magnitude(f)
    k = g.kmag
    nz = k > 0
    return float(np.sum((g.weight * mag)[nz] * k[nz] ** s))


def b111_norm(f: Field, part: DyadicPartition) -> float:
    """sum_j 2^{-j} sum_k phi(2^{-j} k) |c_k|: the B^{-1}_{1,1} norm measured in frequency."""
    g = f.grid
    wm = g.weight * _coeff_magnitude(f)
    return float(sum(2.0**-j * np.sum(part.multipliers[j] * wm) for j in part.js))


def lowpass_besov(f: Field, params: BesovParams, part: DyadicPartition) -> float:
    """||2^{js} ||S_j f||_p||_{l^r}, j over j_min..j_max+1."""
    from .littlewood_paley import lowpass

    terms = []
    js = list(range(part.j_min, part.j_max + 2))
    for j in js:
        terms.append(2.0 ** (params.s * j) * lp_norm(lowpass(f, j, part), params.p))
    return lr_sum(terms, params.r)


def sobolev_partition_sum(f: Field, s: float, part: DyadicPartition) -> float:
    """(sum_k |k|^{2s} |c_k|^2 sum_j phi_j(k)^2)^{1/2}, the Parseval side of B^s_{2,2}."""
    g = f.grid
    mag2 = g.weight * _coeff_magnitude(f) ** 2
    phi2 = sum(m * m for m in part.multipliers.values())
    k = g.kmag
    nz = k > 0
    return float(np.sqrt(np.sum((mag2 * phi2)[nz] * k[nz] ** (2 * s))))


# -- time histories ----------------------------------------------------------


@dataclass
class BlockNormHistory:
    """a[j][i] = ||Delta_j f(t_i)||_{L^p} on an append-only snapshot list."""

    js: tuple
    p: float
    times: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def append(self, t: float, block_norms: Sequence[float]) -> None:
        b = np.asarray(block_norms, dtype=float)
        if b.shape != (len(self.js),):
            raise ValueError(f"expected {len(self.js)} block norms, got {b.shape}")
        if np.any(b < 0) or not np.all(np.isfinite(b)):
            raise ValueError("block norms must be finite and nonnegative")
        if self.times and not t > self.times[-1]:
            raise ValueError(f"snapshot times must increase: {t} after {self.times[-1]}")
        self.times.append(float(t))
        self.rows.append(b)

    def record(self, t: float, f: Field, part: DyadicPartition) -> None:
        self.append(t, block_lp_norms(f, part, [self.p])[self.p])

    @property
    def matrix(self) -> np.ndarray:
        """Array of shape (n_blocks, n_snapshots)."""
        if not self.rows:
            return np.zeros((len(self.js), 0))
        return np.stack(self.rows, axis=1)

    def __len__(self) -> int:
        return len(self.times)

    def truncated(self, count: int) -> "BlockNormHistory":
        return BlockNormHistory(self.js, self.p, self.times[:count], self.rows[:count])

    def besov_series(self, s: float, r: float) -> np.ndarray:
        """Instantaneous Besov norm at each snapshot."""
        return np.array([besov_from_blocks(row, self.js, s, r) for row in self.rows])


def _block_time_norms(a: np.ndarray, t: np.ndarray, r1: float, w: np.ndarray | None) -> np.ndarray:
    if w is not None:
        a = a * w[None, :]
    if r1 == INF:
        return a.max(axis=1)
    if len(t) < 2:
        raise ValueError("a finite time exponent needs at least 2 snapshots")
    integral = trapezoid(a**r1, t, axis=1)
    return integral ** (1.0 / r1)


def chemin_lerner(hist: BlockNormHistory, r1: float, s: float, r: float) -> float:
    """|| 2^{js} ||Delta_j f||_{L^{r1}_t L^p} ||_{l^r}, time integrals by trapezoid."""
    r1 = _check_exponent("r1", r1)
    per_block = _block_time_norms(hist.matrix, np.asarray(hist.times), r1, None)
    return besov_from_blocks(per_block, hist.js, s, r)


def chemin_lerner_weighted(hist: BlockNormHistory, weights: Sequence[float], r1: float, s: float, r: float) -> float:
    """Chemin-Lerner norm with omega(t)^{r1} inside each block's time integral."""
    r1 = _check_exponent("r1", r1)
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(hist),):
        raise ValueError(f"{w.size} weights for {len(hist)} snapshots")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    per_block = _block_time_norms(hist.matrix, np.asarray(hist.times), r1, w)
    return besov_from_blocks(per_block, hist.js, s, r)


def chemin_lerner_prefix(hist: BlockNormHistory, r1: float, s: float, r: float) -> np.ndarray:
    """Chemin-Lerner norm over [t_0, t_i] for every i, with running per-block sums.

    The first entry of a finite-r1 series is 0 (empty time interval).
    """
    r1 = _check_exponent("r1", r1)
    a = hist.matrix
    t = np.asarray(hist.times)
    m = a.shape[1]
    out = np.zeros(m)
    if m == 0:
        return out
    if r1 == INF:
        running = np.zeros(a.shape[0])
        for i in range(m):
            running = np.maximum(running, a[:, i])
            out[i] = besov_from_blocks(running, hist.js, s, r)
        return out
    acc = np.zeros(a.shape[0])
    ar = a**r1
    for i in range(1, m):
        acc = acc + 0.5 * (t[i] - t[i - 1]) * (ar[:, i] + ar[:, i - 1])
        out[i] = besov_from_blocks(acc ** (1.0 / r1), hist.js, s, r)
    return out


def richardson_error(hist: BlockNormHistory, r1: float, s: float, r: float) -> float:
    """Trapezoid error estimate |I_h - I_2h| / 3 from every-other-snapshot quadrature.

    Needs an odd number (>= 3) of snapshots so both rules span the same interval.
    """
    m = len(hist)
    if m < 3:
        raise ValueError("Richardson estimate needs at least 3 snapshots")
    if m % 2 == 0:
        hist = hist.truncated(m - 1)
    fine = chemin_lerner(hist, r1, s, r)
    coarse_hist = BlockNormHistory(hist.js, hist.p, hist.times[::2], hist.rows[::2])
    coarse = chemin_lerner(coarse_hist, r1, s, r)
    return abs(fine - coarse) / 3.0


def time_norm(times: Sequence[float], values: Sequence[float], r1: float) -> float:
    """Plain L^{r1}_t norm of a scalar series (trapezoid)."""
    v = np.asarray(values, dtype=float)
    if r1 == INF:
        return float(v.max(initial=0.0))
    if len(v) < 2:
        raise ValueError("a finite time exponent needs at least 2 snapshots")
    return float(trapezoid(v**r1, np.asarray(times, dtype=float)) ** (1.0 / r1))


# -- CSV ---------------------------------------------------------------------

NORM_COLUMNS = ("t", "name", "s", "p", "r", "value")


def fmt(v) -> str:
    """Exact, platform-stable text for CSV cells."""
    if v is None or v == "":
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    x = float(v)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def write_norm_rows(path, rows: Iterable[Sequence], append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode, newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if not append:
            w.writerow(NORM_COLUMNS)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_norm_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
