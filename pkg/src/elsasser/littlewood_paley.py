"""
Dyadic frequency decomposition on the torus lattice.

The radial cutoff ``lowpass_profile`` equals 1 on |xi| <= 3/4 and 0 on
|xi| >= 4/3, with a C-infinity monotone ramp built from exp(-1/t).  The
annulus bump is the telescoping difference

    lp_bump(xi) = lowpass_profile(xi / 2) - lowpass_profile(xi),

supported in 3/4 <= |xi| <= 8/3, so sum_j lp_bump(2^-j xi) = 1 holds by
construction rather than by tuning.  Blocks act as multipliers on the
coefficient lattice (no convolution kernels).

The finite range j_min..j_max stands in for j in Z.  The multiplier below
j_min (the "tail", lowpass_profile(2^-j_min xi)) is kept so that
tail + sum_j blocks = 1 on every lattice point up to 3/2 * 2^j_max.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import Field, Grid, SpectralField, forward, inverse

INNER = 0.75
OUTER = 4.0 / 3.0


def _transition(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=float)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, monotone in between."""
    t = np.asarray(t, dtype=float)
    a = _transition(t)
    b = _transition(1.0 - t)
    return a / (a + b)


def lowpass_profile(r) -> np.ndarray:
    """Radial cutoff: 1 on r <= 3/4, 0 on r >= 4/3."""
    r = np.asarray(r, dtype=float)
    return 1.0 - smooth_step((r - INNER) / (OUTER - INNER))


def lp_bump(r) -> np.ndarray:
    """Annulus bump supported in 3/4 <= r <= 8/3."""
    r = np.asarray(r, dtype=float)
    return lowpass_profile(r / 2.0) - lowpass_profile(r)


@dataclass(frozen=True, eq=False)
class DyadicPartition:
    grid: Grid
    j_min: int
    j_max: int
    multipliers: dict = field(repr=False)
    tail: np.ndarray = field(repr=False)
    lowpass_multipliers: dict = field(repr=False)

    @property
    def js(self) -> range:
        return range(self.j_min, self.j_max + 1)

    @property
    def covered_band(self) -> tuple[float, float]:
        """|xi| range on which the blocks alone sum to one."""
        return OUTER * 2.0**self.j_min, 1.5 * 2.0**self.j_max

    def multiplier(self, j: int) -> np.ndarray:
        self._check_j(j)
        return self.multipliers[j]

    def lowpass_multiplier(self, j: int) -> np.ndarray:
        """Multiplier of S_j = tail + sum_{k <= j-1} Delta_k, for j_min <= j <= j_max+1."""
        if j not in self.lowpass_multipliers:
            raise ValueError(f"S_{j} outside partition range [{self.j_min}, {self.j_max + 1}]")
        return self.lowpass_multipliers[j]

    def unity_error(self) -> float:
        """max |sum_j phi_j - 1| over nonzero lattice points in the covered band."""
        lo, hi = self.covered_band
        k = self.grid.kmag
        band = (k >= lo) & (k <= hi) & (k > 0)
        total = sum(self.multipliers.values())
        if not band.any():
            return 0.0
        return float(np.max(np.abs(total[band] - 1.0)))

    def covers(self, f: Field, tol: float = 0.0) -> bool:
        """True if f has no energy outside tail + blocks (beyond tol)."""
        total = sum(self.multipliers.values()) + self.tail
        c = f.coeffs if isinstance(f, SpectralField) else f.coeffs
        resid = np.abs(c * (1.0 - total))
        return bool(resid.max(initial=0.0) <= tol * max(np.abs(c).max(initial=0.0), 1e-300))

    def _check_j(self, j: int) -> None:
        if not (self.j_min <= j <= self.j_max):
            raise ValueError(f"block {j} outside partition range [{self.j_min}, {self.j_max}]")


def build_partition(grid: Grid, j_min: int, j_max: int) -> DyadicPartition:
    """Precompute block multipliers lp_bump(2^-j |k|) for j_min <= j <= j_max."""
    if j_min > j_max:
        raise ValueError(f"empty partition: j_min={j_min} > j_max={j_max}")
    if not (j_min <= 0 <= j_max):
        raise ValueError(f"partition range must contain 0, got [{j_min}, {j_max}]")
    if 8.0 / 3.0 * 2.0**j_max > grid.max_resolved_wavenumber:
        raise ValueError(
            f"j_max={j_max} needs |xi| up to {8 / 3 * 2.0**j_max:.3g}, beyond the "
            f"resolved {grid.max_resolved_wavenumber:.3g} on n={grid.n}"
        )
    k = grid.kmag
    multipliers = {}
    for j in range(j_min, j_max + 1):
        m = lp_bump(k * 2.0**-j)
        m.setflags(write=False)
        multipliers[j] = m
    tail = lowpass_profile(k * 2.0**-j_min)
    tail.setflags(write=False)
    lows = {j_min: tail}
    running = tail
    for j in range(j_min + 1, j_max + 2):
        running = running + multipliers[j - 1]
        running.setflags(write=False)
        lows[j] = running
    return DyadicPartition(grid, j_min, j_max, multipliers, tail, lows)


def _apply(f: Field, mult: np.ndarray) -> Field:
    return type(f)(f.grid, f.coeffs * mult)


def block(f: Field, j: int, part: DyadicPartition) -> Field:
    """Delta_j f."""
    return _apply(f, part.multiplier(j))


def lowpass(f: Field, j: int, part: DyadicPartition) -> Field:
    """S_j f = sum_{k <= j-1} Delta_k f plus the tail below j_min."""
    return _apply(f, part.lowpass_multiplier(j))


def _levels(part: DyadicPartition) -> list[tuple[int, np.ndarray]]:
    # tail plays the role of block j_min - 1 so the finite sums telescope exactly
    return [(part.j_min - 1, part.tail)] + [(j, part.multipliers[j]) for j in part.js]


def _physical_blocks(f: Field, part: DyadicPartition) -> dict[int, np.ndarray | None]:
    n = f.grid.n
    out = {}
    for j, m in _levels(part):
        c = f.coeffs * m
        out[j] = inverse(c, n) if np.any(c) else None
    return out


def _lows_from_blocks(blocks: dict[int, np.ndarray | None]) -> dict[int, np.ndarray | None]:
    # lows[k] = sum_{i <= k-2} blocks[i], i.e. S_{k-1}
    keys = sorted(blocks)
    lows = {}
    acc = None
    for idx, k in enumerate(keys):
        lows[k] = acc
        if idx >= 1:
            b = blocks[keys[idx - 1]]
            if b is not None:
                acc = b.copy() if acc is None else acc + b
    return lows


def _check_pair(u: SpectralField, v: SpectralField) -> None:
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")
    if not (isinstance(u, SpectralField) and isinstance(v, SpectralField)):
        raise TypeError("paraproducts act on scalar fields")


def _finish(total: np.ndarray | None, grid: Grid) -> SpectralField:
    if total is None:
        return SpectralField.zeros(grid)
    return SpectralField(grid, forward(total) * grid.dealias_mask * grid.nyquist_free)


def paraproduct(u: SpectralField, v: SpectralField, part: DyadicPartition) -> SpectralField:
    """T_u v = sum_k S_{k-1} u Delta_k v (dealiased)."""
    _check_pair(u, v)
    ub = _physical_blocks(u, part)
    vb = _physical_blocks(v, part)
    ulow = _lows_from_blocks(ub)
    total = None
    for k, vk in vb.items():
        s = ulow[k]
        if s is None or vk is None:
            continue
        total = s * vk if total is None else total + s * vk
    return _finish(total, u.grid)


def remainder(u: SpectralField, v: SpectralField, part: DyadicPartition) -> SpectralField:
    """R(u, v) = sum_j Delta_j u (Delta_{j-1} + Delta_j + Delta_{j+1}) v (dealiased)."""
    _check_pair(u, v)
    ub = _physical_blocks(u, part)
    vb = _physical_blocks(v, part)
    total = None
    for j, uj in ub.items():
        if uj is None:
            continue
        near = [vb.get(i) for i in (j - 1, j, j + 1)]
        near = [x for x in near if x is not None]
        if not near:
            continue
        term = uj * sum(near)
        total = term if total is None else total + term
    return _finish(total, u.grid)


def bony_terms(u: SpectralField, v: SpectralField, part: DyadicPartition):
    """(T_u v, T_v u, R(u, v))."""
    return paraproduct(u, v, part), paraproduct(v, u, part), remainder(u, v, part)


def block_lp_norms(f: Field, part: DyadicPartition, ps) -> dict[float, np.ndarray]:
    """||Delta_j f||_{L^p} for every block j, for each p in ``ps``.

    Vector fields use the pointwise Euclidean magnitude.  Blocks that the
    field does not reach are zero without a transform.
    """
    from .norms import field_samples, lp_norm

    ps = list(ps)
    out = {p: np.zeros(len(part.js)) for p in ps}
    n = f.grid.n
    for i, j in enumerate(part.js):
        c = f.coeffs * part.multipliers[j]
        if not np.any(c):
            continue
        for p in ps:
            out[p][i] = lp_norm(field_samples(c, n, p), p)
    return out
