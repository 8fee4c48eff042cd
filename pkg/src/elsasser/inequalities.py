"""
Empirical checks of the harmonic-analysis inequalities behind the
well-posedness argument: Bernstein bounds, the L^p dissipation lower bound,
Besov product laws, the chi product estimate, and the chi^{-1} norm chain.

Each suite draws seeded random fields and reports the distribution of
LHS / RHS (constants omitted).  Samples use independent generators spawned
from ``SeedSequence([seed, i])``, so suites are bit-reproducible and
sample i is the same function on every grid that can hold its band.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .littlewood_paley import DyadicPartition, build_partition
from .norms import (
    INF,
    BesovParams,
    BlockNormHistory,
    b111_norm,
    besov_from_blocks,
    besov_norm,
    chemin_lerner,
    chemin_lerner_weighted,
    chi_norm,
    lp_norm,
)
from .littlewood_paley import block_lp_norms
from .spectral import (
    Grid,
    SpectralField,
    VectorField,
    advect,
    band_limited_random,
    derivative,
    quadrature_sizes,
    resample,
)

PQ_PAIRS = ((2.0, 2.0), (2.0, 4.0), (2.0, INF), (4.0, INF))


@dataclass
class RatioStats:
    name: str
    n: int
    ratios: np.ndarray
    bound: Optional[tuple] = None
    extra: dict = field(default_factory=dict)

    @property
    def samples(self) -> int:
        return int(self.ratios.size)

    @property
    def min(self) -> float:
        return float(self.ratios.min()) if self.ratios.size else math.nan

    @property
    def median(self) -> float:
        return float(np.median(self.ratios)) if self.ratios.size else math.nan

    @property
    def max(self) -> float:
        return float(self.ratios.max()) if self.ratios.size else math.nan

    @property
    def verdict(self) -> bool:
        if self.ratios.size == 0 or not np.all(np.isfinite(self.ratios)):
            return False
        if self.extra.get("violations", 0):
            return False
        if self.bound is None:
            return True
        lo, hi = self.bound
        return (lo is None or self.min >= lo) and (hi is None or self.max <= hi)

    def to_dict(self) -> dict:
        out = {
            "id": self.name,
            "n": self.n,
            "samples": self.samples,
            "min": self.min,
            "median": self.median,
            "max": self.max,
            "bound": None if self.bound is None else list(self.bound),
            "verdict": self.verdict,
        }
        out.update({k: v for k, v in self.extra.items() if not isinstance(v, np.ndarray)})
        return out


def resolution_drift(a: RatioStats, b: RatioStats) -> float:
    """max(a/b, b/a) of the two suites' maximum ratios."""
    return max(a.max / b.max, b.max / a.max)


def sample_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(i)]))


def _ratio(lhs: float, rhs: float) -> Optional[float]:
    # 0/0 is skipped, x/0 is a genuine failure
    if rhs == 0:
        return None if lhs == 0 else math.inf
    return lhs / rhs


def _multi_indices(order: int) -> list[tuple[int, int, int]]:
    return [g for g in itertools.product(range(order + 1), repeat=3) if sum(g) == order]


def partial(f: SpectralField, gamma: Sequence[int]) -> SpectralField:
    out = f
    for axis, count in enumerate(gamma, start=1):
        for _ in range(count):
            out = derivative(out, axis)
    return out


# -- Bernstein ----------------------------------------------------------------


def bernstein_ball_ratio(f: SpectralField, gamma, p: float, q: float, j: int) -> Optional[float]:
    """||d^gamma f||_q / (2^{j|gamma| + 3j(1/p - 1/q)} ||f||_p)."""
    order = sum(gamma)
    scale = 2.0 ** (j * order + 3 * j * (1 / p - 1 / q))
    return _ratio(lp_norm(partial(f, gamma), q), scale * lp_norm(f, p))


def bernstein_annulus_ratio(f: SpectralField, order: int, p: float, j: int) -> Optional[float]:
    """||f||_p / (2^{-j|gamma|} sup_{|beta| = |gamma|} ||d^beta f||_p)."""
    sup = max(lp_norm(partial(f, b), p) for b in _multi_indices(order))
    return _ratio(lp_norm(f, p), 2.0 ** (-j * order) * sup)


def verify_bernstein(
    grid: Grid,
    samples: int,
    seed: int,
    *,
    j_ball: int = 2,
    ball_factor: float = 1.0,
    j_annulus: int = 1,
    annulus: tuple = (1.0, 2.0),
) -> tuple[RatioStats, RatioStats]:
    """Ball bound over |gamma| in {1, 2} and the (p, q) pairs; annulus bound for p in {2, 4, inf}.

    Ball fields live in |k| <= ball_factor 2^j_ball; annulus fields in
    annulus[0] 2^j <= |k| <= annulus[1] 2^j.
    """
    radius = ball_factor * 2.0**j_ball
    lo, hi = annulus[0] * 2.0**j_annulus, annulus[1] * 2.0**j_annulus
    if lo <= 0 or hi <= lo:
        raise ValueError(f"degenerate annulus [{lo}, {hi}]")
    if radius <= 0:
        raise ValueError("degenerate ball")
    ball, ann = [], []
    cases_ball: dict = {}
    cases_ann: dict = {}
    for i in range(samples):
        rng = sample_rng(seed, i)
        f = band_limited_random(grid, rng, 1e-9, radius)
        g = band_limited_random(grid, rng, lo, hi)
        for order in (1, 2):
            for gamma in _multi_indices(order):
                for p, q in PQ_PAIRS:
                    r = bernstein_ball_ratio(f, gamma, p, q, j_ball)
                    if r is not None:
                        ball.append(r)
                        key = f"|g|={order},p={p:g},q={q:g}"
                        cases_ball[key] = max(cases_ball.get(key, 0.0), r)
            for p in (2.0, 4.0, INF):
                r = bernstein_annulus_ratio(g, order, p, j_annulus)
                if r is not None:
                    ann.append(r)
                    key = f"|g|={order},p={p:g}"
                    cases_ann[key] = max(cases_ann.get(key, 0.0), r)
    return (
        RatioStats("bernstein_ball", grid.n, np.array(ball), extra={"case_max": cases_ball}),
        RatioStats("bernstein_annulus", grid.n, np.array(ann), extra={"case_max": cases_ann}),
    )


# -- dissipation lower bound ------------------------------------------------------


def dissipation_ratio(u: SpectralField, p: int, R1: float) -> Optional[float]:
    """-(1/(p-1)) int Lap u |u|^{p-2} u  over  (R1^2/p^2) int |u|^p, both exact for even p."""
    n = u.grid.n
    sizes = quadrature_sizes(u.coeffs, n, p)
    x = resample(u.coeffs, n, sizes)
    lap = resample(-u.grid.k2 * u.coeffs, n, sizes)
    rhs = -np.mean(lap * x ** (p - 1)) / (p - 1)
    lhs = R1**2 / p**2 * np.mean(x**p)
    return _ratio(float(rhs), float(lhs))


def verify_dissipation_bound(grid: Grid, p: int, samples: int, seed: int, R1: float = 2.0, R2: float = 4.0) -> RatioStats:
    """Empirical constant c: the minimum ratio over annulus-supported fields."""
    if int(p) != p or p % 2:
        raise ValueError(f"p must be an even integer, got {p}")
    p = int(p)
    if not 0 < R1 < R2:
        raise ValueError("annulus needs 0 < R1 < R2")
    ratios = []
    for i in range(samples):
        u = band_limited_random(grid, sample_rng(seed, i), R1, R2)
        r = dissipation_ratio(u, p, R1)
        if r is not None:
            ratios.append(r)
    lower = float(p * p) if p == 2 else 0.0
    return RatioStats(f"dissipation_p{p}", grid.n, np.array(ratios), bound=(lower, None), extra={"R1": R1, "R2": R2})


# -- Besov product laws -------------------------------------------------------------


def skp1_ratio(u: VectorField, v: VectorField, p: float, r: float, part: DyadicPartition) -> Optional[float]:
    lo = BesovParams(3 / p - 1, p, r)
    hi = BesovParams(3 / p + 1, p, r)
    lhs = besov_norm(advect(u, v), lo, part)
    rhs = besov_norm(u, lo, part) * besov_norm(v, hi, part) + besov_norm(v, lo, part) * besov_norm(u, hi, part)
    return _ratio(lhs, rhs)


def verify_skp1(grid: Grid, part: DyadicPartition, p: float, r: float, samples: int, seed: int, band: tuple = (1.0, 5.0)) -> RatioStats:
    ratios = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        u = band_limited_random(grid, rng, *band, vector=True, solenoidal=True)
        v = band_limited_random(grid, rng, *band, vector=True, solenoidal=True)
        x = skp1_ratio(u, v, p, r, part)
        if x is not None:
            ratios.append(x)
    return RatioStats(f"skp1_p{p:g}_r{r:g}", grid.n, np.array(ratios))


def skp2_weight(u: VectorField, p: float, eps: float, part: DyadicPartition, weight_s: Optional[float] = None, weight_r: float = INF) -> float:
    """f = ||u||_{B^{weight_s}_{p,weight_r}}^{2/(1-eps)}, weight_s defaulting to 3/p - eps."""
    s = 3 / p - eps if weight_s is None else weight_s
    return besov_norm(u, BesovParams(s, p, weight_r), part) ** (2 / (1 - eps))


def verify_skp2(
    times: Sequence[float],
    us: Sequence[VectorField],
    vs: Sequence[VectorField],
    part: DyadicPartition,
    p: float,
    r: float,
    eps: float,
    *,
    weight_s: Optional[float] = None,
    weight_r: float = INF,
) -> Optional[float]:
    """LHS / RHS of the time-integrated product law along a trajectory.

    For (eps, r) = (0, 1) pass weight_s = 3/p and weight_r = 1.
    """
    if len(times) < 5:
        raise ValueError("need at least 5 snapshots")
    if not (len(times) == len(us) == len(vs)):
        raise ValueError("snapshot lists differ in length")
    if not 0 <= eps < 1:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    js = tuple(part.js)
    prod = BlockNormHistory(js, p)
    vh = BlockNormHistory(js, p)
    weights = []
    for t, u, v in zip(times, us, vs):
        prod.record(t, advect(u, v), part)
        vh.record(t, v, part)
        weights.append(skp2_weight(u, p, eps, part, weight_s, weight_r))
    lhs = chemin_lerner(prod, 1.0, 3 / p - 1, r)
    a = chemin_lerner(vh, 1.0, 3 / p + 1, r)
    b = chemin_lerner_weighted(vh, weights, 1.0, 3 / p - 1, r)
    return _ratio(lhs, a ** ((1 + eps) / 2) * b ** ((1 - eps) / 2))


# -- chi estimates -------------------------------------------------------------------


def chi_product_ratio(u: VectorField, v: VectorField) -> Optional[float]:
    return _ratio(chi_norm(advect(u, v), -1.0), chi_norm(u, 0.0) * chi_norm(v, 0.0))


def verify_chi_product(grid: Grid, samples: int, seed: int, band: tuple = (1.0, 5.0)) -> RatioStats:
    ratios = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        u = band_limited_random(grid, rng, *band, vector=True, solenoidal=True)
        v = band_limited_random(grid, rng, *band, vector=True, solenoidal=True)
        x = chi_product_ratio(u, v)
        if x is not None:
            ratios.append(x)
    return RatioStats("chi_product", grid.n, np.array(ratios), bound=(None, 1.0 + 1e-10))


def chi_chain(f, part: DyadicPartition, r: float = 2.0) -> tuple[float, float, float]:
    """(B^{-1}_{inf,r}, B^{-1}_{inf,1}, frequency-side B^{-1}_{1,1})."""
    blocks = block_lp_norms(f, part, [INF])[INF]
    return (
        besov_from_blocks(blocks, part.js, -1.0, r),
        besov_from_blocks(blocks, part.js, -1.0, 1.0),
        b111_norm(f, part),
    )


def interpolation_ratio(f) -> Optional[float]:
    """chi^0 / sqrt(chi^{-1} chi^1); at most 1 by Cauchy-Schwarz."""
    return _ratio(chi_norm(f, 0.0), math.sqrt(chi_norm(f, -1.0) * chi_norm(f, 1.0)))


def verify_chi_chain_and_interp(
    grid: Grid, part: DyadicPartition, samples: int, seed: int, band: tuple = (1.0, 5.0), rs: Sequence[float] = (2.0, INF)
) -> tuple[RatioStats, RatioStats]:
    """Chain ordering (violations counted), B^{-1}_{1,1}/chi^{-1} ratios, and interpolation ratios."""
    lo, hi = part.covered_band
    if band[0] < lo or band[1] > hi:
        raise ValueError(f"band {band} leaves the covered band [{lo:.3g}, {hi:.3g}]")
    equiv, interp = [], []
    violations = 0
    slack = 1e-13
    for i in range(samples):
        f = band_limited_random(grid, sample_rng(seed, i), *band)
        for r in rs:
            a, b, c = chi_chain(f, part, r)
            if a > b * (1 + slack) or b > c * (1 + slack):
                violations += 1
        x = _ratio(b111_norm(f, part), chi_norm(f, -1.0))
        if x is not None:
            equiv.append(x)
        y = interpolation_ratio(f)
        if y is not None:
            interp.append(y)
    return (
        RatioStats("chi_equivalence", grid.n, np.array(equiv), bound=(0.75, 8.0 / 3.0), extra={"violations": violations}),
        RatioStats("chi_interpolation", grid.n, np.array(interp), bound=(None, 1.0 + 1e-12)),
    )


def default_partition(grid: Grid, j_min: int = -2) -> DyadicPartition:
    """Widest partition the grid resolves."""
    j_max = int(math.floor(math.log2(grid.max_resolved_wavenumber * 3 / 8)))
    return build_partition(grid, j_min, j_max)
