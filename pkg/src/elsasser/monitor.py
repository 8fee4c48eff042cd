"""
Smallness conditions for global solutions and the bootstrap quantities
tracked along numerical trajectories.

Condition names used in reports:

    besov_wminus        small W0- in critical Besov norm, general nu-
    besov_wplus         the same with W+ and W- exchanged
    besov_wminus_equal  nu- = 0 specialization (mu1 = mu2)
    besov_wplus_equal   its mirror
    chi_wminus, chi_wplus, chi_wminus_equal, chi_wplus_equal
                        the chi^{-1} analogues
    chi_wminus_margin   chi_wminus with the slack threshold (2 - eps0) nu+

Every report keeps the raw ingredients so the left side can be recomputed
offline with other constants.  nu- enters through |nu-|, so mu2 > mu1 is
handled symmetrically.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .initial_data import elsasser
from .littlewood_paley import DyadicPartition
from .norms import INF, BesovParams, BlockNormHistory, besov_norm, chemin_lerner_prefix, chi_norm
from .spectral import VectorField

DEFAULTS = {"C": 1.0, "eta": 0.01, "eps0": 0.05, "C1": 1.0, "C2": 1.0, "c": 1.0}


def check_epsilon_r(eps: float, r: float) -> bool:
    """Admissible (eps, r) pairs for the Besov conditions."""
    if not r >= 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if r == 1:
        return 0 <= eps < 1
    if r <= 2:
        return 0 < eps < 1
    if math.isinf(r):
        return False
    return 1 - 2 / r <= eps < 1


def viscosities(mu1: float, mu2: float) -> tuple[float, float]:
    """(nu+, |nu-|) with nu+- = (mu1 +- mu2) / 2."""
    if not (mu1 > 0 and mu2 > 0):
        raise ValueError(f"mu1 and mu2 must be positive, got {mu1}, {mu2}")
    return 0.5 * (mu1 + mu2), abs(0.5 * (mu1 - mu2))


# -- closed forms -------------------------------------------------------------


def _scaled_exp(pre: float, x: float) -> float:
    """pre * exp(x), inf on overflow and 0 when pre is 0."""
    if pre == 0:
        return 0.0
    try:
        return pre * math.exp(x)
    except OverflowError:
        # large data drives the exponent far past the float range
        return math.inf


def besov_lhs(small: float, large: float, nu_plus: float, nu_minus: float, eps: float, C: float) -> float:
    """(small + nu-/nu+ (large + nu-)) exp(C nu+^(-2/(1-eps)) (nu- + large)^(2/(1-eps)))."""
    q = 2.0 / (1.0 - eps)
    pre = small + nu_minus / nu_plus * (large + nu_minus)
    return _scaled_exp(pre, C * nu_plus ** (-q) * (nu_minus + large) ** q)


def besov_equal_lhs(small: float, large: float, nu_plus: float, eps: float, C: float) -> float:
    q = 2.0 / (1.0 - eps)
    return _scaled_exp(small, C * nu_plus ** (-q) * large**q)


def chi_lhs(small: float, large: float, nu_plus: float, nu_minus: float, C: float) -> float:
    """(small + C nu-/nu+ (nu- + large)) exp(C/nu+^2 (nu- + large)^2)."""
    pre = small + C * nu_minus / nu_plus * (nu_minus + large)
    return _scaled_exp(pre, C / nu_plus**2 * (nu_minus + large) ** 2)


def chi_equal_lhs(small: float, large: float, nu_plus: float, C: float) -> float:
    return _scaled_exp(small, C / nu_plus**2 * large**2)


def gronwall_envelope_besov(
    w0_minus: float, w0_plus: float, nu_plus: float, nu_minus: float, eps: float, C: float
) -> float:
    """Predicted bound on the weighted W- norms: C times the besov_wminus left side."""
    return C * besov_lhs(w0_minus, w0_plus, nu_plus, nu_minus, eps, C)


# -- reports ------------------------------------------------------------------


@dataclass
class ConditionReport:
    name: str
    w0_minus: float
    w0_plus: float
    nu_plus: float
    nu_minus: float
    constants: dict
    lhs: float
    threshold: float
    strict: bool = True
    norm: str = ""

    @property
    def verdict(self) -> bool:
        return self.lhs < self.threshold if self.strict else self.lhs <= self.threshold

    @property
    def ratios(self) -> dict:
        return {
            "w0_minus_over_nu_plus": self.w0_minus / self.nu_plus,
            "w0_plus_over_nu_plus": self.w0_plus / self.nu_plus,
            "nu_minus_over_nu_plus": self.nu_minus / self.nu_plus,
        }

    def recompute(self) -> float:
        """Left side from the logged ingredients alone."""
        k = self.constants
        a, b = self.w0_minus, self.w0_plus
        if self.name.endswith("wplus") or self.name.endswith("wplus_equal"):
            a, b = b, a
        if self.name.startswith("besov"):
            if self.name.endswith("_equal"):
                return besov_equal_lhs(a, b, self.nu_plus, k["eps"], k["C"])
            return besov_lhs(a, b, self.nu_plus, self.nu_minus, k["eps"], k["C"])
        if self.name.endswith("_equal"):
            return chi_equal_lhs(a, b, self.nu_plus, k["C"])
        return chi_lhs(a, b, self.nu_plus, self.nu_minus, k["C"])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict
        d["ratios"] = self.ratios
        return d


def besov_reports(
    w0_minus: float, w0_plus: float, nu_plus: float, nu_minus: float, eps: float, C: float, eta: float, norm: str = ""
) -> tuple[ConditionReport, ConditionReport]:
    """besov_wminus and besov_wplus from precomputed norms."""
    k = {"C": C, "eta": eta, "eps": eps}
    thr = eta * nu_plus
    a = besov_lhs(w0_minus, w0_plus, nu_plus, nu_minus, eps, C)
    b = besov_lhs(w0_plus, w0_minus, nu_plus, nu_minus, eps, C)
    return (
        ConditionReport("besov_wminus", w0_minus, w0_plus, nu_plus, nu_minus, dict(k), a, thr, norm=norm),
        ConditionReport("besov_wplus", w0_minus, w0_plus, nu_plus, nu_minus, dict(k), b, thr, norm=norm),
    )


def besov_equal_reports(
    w0_minus: float, w0_plus: float, nu_plus: float, eps: float, C: float, eta: float, norm: str = ""
) -> tuple[ConditionReport, ConditionReport]:
    """nu- = 0 forms.  The second is the W+/W- swap of the first."""
    k = {"C": C, "eta": eta, "eps": eps}
    thr = eta * nu_plus
    a = besov_equal_lhs(w0_minus, w0_plus, nu_plus, eps, C)
    b = besov_equal_lhs(w0_plus, w0_minus, nu_plus, eps, C)
    return (
        ConditionReport("besov_wminus_equal", w0_minus, w0_plus, nu_plus, 0.0, dict(k), a, thr, norm=norm),
        ConditionReport("besov_wplus_equal", w0_minus, w0_plus, nu_plus, 0.0, dict(k), b, thr, norm=norm),
    )


def chi_reports(
    w0_minus: float, w0_plus: float, nu_plus: float, nu_minus: float, C: float
) -> tuple[ConditionReport, ConditionReport]:
    k = {"C": C}
    thr = 2.0 * nu_plus
    a = chi_lhs(w0_minus, w0_plus, nu_plus, nu_minus, C)
    b = chi_lhs(w0_plus, w0_minus, nu_plus, nu_minus, C)
    return (
        ConditionReport("chi_wminus", w0_minus, w0_plus, nu_plus, nu_minus, dict(k), a, thr, norm="chi^-1"),
        ConditionReport("chi_wplus", w0_minus, w0_plus, nu_plus, nu_minus, dict(k), b, thr, norm="chi^-1"),
    )


def chi_equal_reports(w0_minus: float, w0_plus: float, nu_plus: float, C: float) -> tuple[ConditionReport, ConditionReport]:
    k = {"C": C}
    thr = 2.0 * nu_plus
    a = chi_equal_lhs(w0_minus, w0_plus, nu_plus, C)
    b = chi_equal_lhs(w0_plus, w0_minus, nu_plus, C)
    return (
        ConditionReport("chi_wminus_equal", w0_minus, w0_plus, nu_plus, 0.0, dict(k), a, thr, norm="chi^-1"),
        ConditionReport("chi_wplus_equal", w0_minus, w0_plus, nu_plus, 0.0, dict(k), b, thr, norm="chi^-1"),
    )


def chi_margin_report(w0_minus: float, w0_plus: float, nu_plus: float, nu_minus: float, C: float, eps0: float) -> ConditionReport:
    """chi_wminus against (2 - eps0) nu+ (non-strict)."""
    lhs = chi_lhs(w0_minus, w0_plus, nu_plus, nu_minus, C)
    return ConditionReport(
        "chi_wminus_margin", w0_minus, w0_plus, nu_plus, nu_minus, {"C": C, "eps0": eps0}, lhs,
        (2.0 - eps0) * nu_plus, strict=False, norm="chi^-1",
    )


def _besov_label(params: BesovParams) -> str:
    return f"B^{params.s:.6g}_{params.p:g},{params.r:g}"


def condition_besov(
    u0: VectorField,
    B0: VectorField,
    mu1: float,
    mu2: float,
    params: BesovParams,
    eps: float,
    C: float,
    eta: float,
    part: DyadicPartition,
) -> tuple[ConditionReport, ConditionReport]:
    if not check_epsilon_r(eps, params.r):
        raise ValueError(f"(eps, r) = ({eps}, {params.r}) is not admissible")
    nu_p, nu_m = viscosities(mu1, mu2)
    wp, wm = elsasser(u0, B0)
    return besov_reports(
        besov_norm(wm, params, part), besov_norm(wp, params, part), nu_p, nu_m, eps, C, eta, _besov_label(params)
    )


def corollary_besov(
    u0: VectorField,
    B0: VectorField,
    mu1: float,
    mu2: float,
    params: BesovParams,
    eps: float,
    C: float,
    eta: float,
    part: DyadicPartition,
) -> tuple[ConditionReport, ConditionReport]:
    """The nu- = 0 forms; requires mu1 == mu2."""
    if mu1 != mu2:
        raise ValueError("the equal-viscosity forms need mu1 == mu2")
    if not check_epsilon_r(eps, params.r):
        raise ValueError(f"(eps, r) = ({eps}, {params.r}) is not admissible")
    nu_p, _ = viscosities(mu1, mu2)
    wp, wm = elsasser(u0, B0)
    return besov_equal_reports(
        besov_norm(wm, params, part), besov_norm(wp, params, part), nu_p, eps, C, eta, _besov_label(params)
    )


def condition_chi(u0: VectorField, B0: VectorField, mu1: float, mu2: float, C: float) -> tuple[ConditionReport, ConditionReport]:
    nu_p, nu_m = viscosities(mu1, mu2)
    wp, wm = elsasser(u0, B0)
    return chi_reports(chi_norm(wm, -1.0), chi_norm(wp, -1.0), nu_p, nu_m, C)


def corollary_chi(u0: VectorField, B0: VectorField, mu1: float, mu2: float, C: float) -> tuple[ConditionReport, ConditionReport]:
    if mu1 != mu2:
        raise ValueError("the equal-viscosity forms need mu1 == mu2")
    nu_p, _ = viscosities(mu1, mu2)
    wp, wm = elsasser(u0, B0)
    return chi_equal_reports(chi_norm(wm, -1.0), chi_norm(wp, -1.0), nu_p, C)


# -- constants for the chi bootstrap --------------------------------------------


def constants_feasible(eps0: float, C1: float, C2: float) -> bool:
    """2 (2 - eps0)^2 < C2 (2 - C1)^2 with C1, C2 in (0, 2)."""
    if not (0 < C1 < 2 and 0 < C2 < 2):
        raise ValueError(f"C1 and C2 must lie in (0, 2), got {C1}, {C2}")
    return 2 * (2 - eps0) ** 2 < C2 * (2 - C1) ** 2


def b_interval(nu_plus: float, eps0: float, C1: float, C2: float) -> tuple[float, float]:
    """Open interval (2 (2 - eps0) nu+ / (2 - C1), sqrt(2 C2) nu+) for b; may be empty."""
    if not (0 < C1 < 2 and 0 < C2 < 2):
        raise ValueError(f"C1 and C2 must lie in (0, 2), got {C1}, {C2}")
    return 2 * (2 - eps0) * nu_plus / (2 - C1), math.sqrt(2 * C2) * nu_plus


def default_b(nu_plus: float, eps0: float, C1: float, C2: float) -> float:
    """Midpoint of the b interval, or 2 nu+ when the interval is empty."""
    lo, hi = b_interval(nu_plus, eps0, C1, C2)
    return 0.5 * (lo + hi) if lo < hi else 2.0 * nu_plus


# -- bootstrap traces ---------------------------------------------------------------


@dataclass
class BootstrapTrace:
    name: str
    times: np.ndarray
    values: np.ndarray
    threshold: float
    first_violation: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def violated(self) -> bool:
        return self.first_violation is not None

    @property
    def max_ratio(self) -> float:
        if self.threshold == 0:
            return math.inf if np.any(self.values > 0) else 0.0
        return float(np.max(self.values, initial=0.0) / self.threshold)


def _trace(name: str, times, values, threshold: float, **extra) -> BootstrapTrace:
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    bad = np.nonzero(v > threshold)[0]
    first = float(t[bad[0]]) if bad.size else None
    return BootstrapTrace(name, t, v, float(threshold), first, dict(extra))


def besov_bootstrap_series(hist: BlockNormHistory, r: float, weight: float) -> np.ndarray:
    """sup-in-time norm at 3/p - 1 plus ``weight`` times the L^1-in-time norm at 3/p + 1."""
    if len(hist) == 0:
        raise ValueError("empty history")
    s = 3.0 / hist.p
    return chemin_lerner_prefix(hist, INF, s - 1, r) + weight * chemin_lerner_prefix(hist, 1.0, s + 1, r)


def bootstrap_besov(hist: BlockNormHistory, r: float, eps0: float, nu_plus: float) -> BootstrapTrace:
    """Q(t) for W- with threshold eps0 nu+."""
    if hist is None:
        raise ValueError("missing W- block history")
    q = besov_bootstrap_series(hist, r, nu_plus)
    return _trace("besov_bootstrap", hist.times, q, eps0 * nu_plus, eps0=eps0, nu_plus=nu_plus)


def wplus_bound_trace(
    hist: BlockNormHistory, r: float, w0_plus: float, nu_plus: float, nu_minus: float, c: float = 1.0,
    dissipative: bool = True,
) -> BootstrapTrace:
    """W+ a priori bound: sup part (+ c nu+ times the L^1 part) against 4 ||W0+|| + 2 c |nu-|."""
    weight = c * nu_plus if dissipative else 0.0
    q = besov_bootstrap_series(hist, r, weight)
    bound = 4.0 * w0_plus + 2.0 * c * nu_minus
    return _trace("wplus_bound", hist.times, q, bound, c=c, dissipative=dissipative)


def _running_max(v: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(v) if v.size else v


def _running_integral(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    if v.size == 0:
        return v
    return cumulative_trapezoid(v, t, initial=0.0)


def bootstrap_chi(times: Sequence[float], chi_m1: Sequence[float], chi_p1: Sequence[float], b: float, nu_plus: float) -> BootstrapTrace:
    """sup_t ||W-||_{chi^-1} + nu+ int ||W-||_{chi^1} against b."""
    t = np.asarray(times, dtype=float)
    a = np.asarray(chi_m1, dtype=float)
    d = np.asarray(chi_p1, dtype=float)
    if not (t.shape == a.shape == d.shape):
        raise ValueError("series lengths differ")
    q = _running_max(a) + nu_plus * _running_integral(t, d)
    return _trace("chi_bootstrap", t, q, b, b=b, nu_plus=nu_plus)


def chi_energy_check(
    times: Sequence[float],
    wplus: dict,
    wminus: dict,
    a: float,
    nu_plus: float,
    nu_minus: float,
) -> BootstrapTrace:
    """Integrated chi^{-1} energy inequality for W+.

    ``wplus`` maps s in {-1, 1} and ``wminus`` maps s in {0, 1} to chi^s
    series.  The left side uses ||W+(t)||_{chi^-1} at each time, the form
    obtained by integrating the differential inequality up to t; with the
    running supremum there instead, even pure heat decay would violate it.
    The trace value is LHS - RHS, so a violation means the inequality
    failed at that snapshot.
    """
    t = np.asarray(times, dtype=float)
    now = np.asarray(wplus[-1.0], dtype=float)
    sup_p = _running_max(now)
    lhs = now + (nu_plus - a / 2) * _running_integral(t, np.asarray(wplus[1.0], dtype=float))
    l2 = _running_integral(t, np.asarray(wminus[0.0], dtype=float) ** 2)
    rhs = l2 / (2 * a) * sup_p + nu_minus * _running_integral(t, np.asarray(wminus[1.0], dtype=float))
    rhs = rhs + float(wplus[-1.0][0])
    return _trace("chi_energy", t, lhs - rhs, 0.0, lhs=lhs.tolist(), rhs=rhs.tolist())


def is_nondecreasing(values: Sequence[float]) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) >= 0))
