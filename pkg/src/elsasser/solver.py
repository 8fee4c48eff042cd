"""
Pseudo-spectral time stepping for incompressible MHD in primal variables

    du/dt = P(-u.grad u + B.grad B) + mu1 Lap u
    dB/dt = -u.grad B + B.grad u    + mu2 Lap B

with exact integrating factors exp(-mu |k|^2 dt).  The linear part is
diagonal in (u, B), so the coupled viscosities nu+- = (mu1 +- mu2)/2 of the
Elsasser form are handled without splitting error; W+- are diagnostics.

Nonlinear terms are evaluated in divergence form,

    du_i = -P d_j (u_i u_j - B_i B_j),    dB_i = d_j (u_i B_j - B_i u_j),

which needs 6 inverse and 9 forward transforms per stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .initial_data import elsasser
from .littlewood_paley import DyadicPartition, block_lp_norms
from .norms import BlockNormHistory, chi_norm
from .spectral import Grid, VectorField, energy_sum, forward, inverse, project_coeffs

SCHEMES = ("IF-RK2", "IF-RK4")
BLOWUP_FACTOR = 1.0e6
FIELDS = ("u", "B", "W+", "W-")


class NumericalAbort(RuntimeError):
    """Integration stopped; ``state`` is the last healthy state."""

    def __init__(self, reason: str, message: str, state: "State"):
        super().__init__(message)
        self.reason = reason
        self.state = state


class CFLError(NumericalAbort):
    def __init__(self, dt: float, admissible_dt: float, state: "State"):
        super().__init__(
            "cfl",
            f"dt={dt:.6g} violates the CFL bound; admissible dt <= {admissible_dt:.6g}",
            state,
        )
        self.dt = dt
        self.admissible_dt = admissible_dt


@dataclass(frozen=True)
class State:
    u: VectorField
    B: VectorField
    step: int = 0
    dt: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.B.grid:
            raise ValueError("u and B live on different grids")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def t(self) -> float:
        # step * dt rather than a running sum keeps snapshot times reproducible
        return self.step * self.dt

    def elsasser(self) -> tuple[VectorField, VectorField]:
        return elsasser(self.u, self.B)

    def field(self, name: str) -> VectorField:
        if name == "u":
            return self.u
        if name == "B":
            return self.B
        wp, wm = self.elsasser()
        if name == "W+":
            return wp
        if name == "W-":
            return wm
        raise ValueError(f"unknown field {name!r}; expected one of {FIELDS}")


@dataclass(frozen=True)
class IntegratorParams:
    dt: float
    scheme: str = "IF-RK2"
    cfl_safety: float = 0.5
    t_end: float = 1.0
    snapshot_every: int = 1
    dense_until: float = 0.0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not (0 < self.cfl_safety <= 1):
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be a positive integer")
        if self.dense_until < 0:
            raise ValueError(f"dense_until must be nonnegative, got {self.dense_until}")
        self.n_steps  # validates t_end / dt

    @property
    def n_steps(self) -> int:
        k = int(round(self.t_end / self.dt))
        if abs(k * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(f"t_end={self.t_end} is not a whole number of steps of dt={self.dt}")
        return k


def clean(c: np.ndarray, grid: Grid) -> np.ndarray:
    """Mean-free, Nyquist-free, solenoidal and dealiased coefficients."""
    out = project_coeffs(c * (grid.dealias_mask * grid.nyquist_free), grid)
    out[:, 0, 0, 0] = 0.0
    return out


def make_state(u: VectorField, B: VectorField, dt: float = 0.0) -> State:
    g = u.grid
    return State(VectorField(g, clean(u.coeffs, g)), VectorField(g, clean(B.coeffs, g)), 0, dt)


# pairs (i, j) with i <= j for the symmetric tensor, i < j for the antisymmetric one
_SYM = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
_ANTI = [(0, 1), (0, 2), (1, 2)]


def _nonlinear(uc: np.ndarray, bc: np.ndarray, grid: Grid, diagnostics: bool = True):
    """Tendencies, plus the pointwise maxima of max(|W+|, |W-|) and |u|."""
    n = grid.n
    fields = inverse(np.concatenate([uc, bc]), n)
    up, bp = fields[:3], fields[3:]
    prods = np.empty((9,) + grid.shape)
    for m, (i, j) in enumerate(_SYM):
        np.subtract(up[i] * up[j], bp[i] * bp[j], out=prods[m])
    for m, (i, j) in enumerate(_ANTI):
        np.subtract(up[i] * bp[j], bp[i] * up[j], out=prods[6 + m])
    hat = forward(prods)
    sym = {}
    for m, (i, j) in enumerate(_SYM):
        sym[i, j] = sym[j, i] = hat[m]
    anti = {}
    for m, (i, j) in enumerate(_ANTI):
        anti[i, j] = hat[6 + m]
        anti[j, i] = -hat[6 + m]
    ik = [1j * k for k in grid.wavevectors()]
    mask = grid.dealias_mask * grid.nyquist_free
    du = np.empty_like(uc)
    db = np.empty_like(bc)
    for i in range(3):
        du[i] = -(ik[0] * sym[i, 0] + ik[1] * sym[i, 1] + ik[2] * sym[i, 2])
        a, b = [j for j in range(3) if j != i]
        db[i] = ik[a] * anti[i, a] + ik[b] * anti[i, b]
    du = project_coeffs(du * mask, grid)
    db = project_coeffs(db * mask, grid)
    if not diagnostics:
        return du, db, 0.0, 0.0
    u2 = np.sum(up * up, axis=0)
    b2 = np.sum(bp * bp, axis=0)
    ub = np.abs(np.sum(up * bp, axis=0))
    # |u +- B|^2 = |u|^2 + |B|^2 +- 2 u.B
    wmax = float(np.sqrt((u2 + b2 + 2 * ub).max()))
    return du, db, wmax, float(np.sqrt(u2.max()))


def rhs_nonlinear(s: State) -> tuple[VectorField, VectorField]:
    """(P(-u.grad u + B.grad B), -u.grad B + B.grad u), dealiased and solenoidal."""
    du, db, _, _ = _nonlinear(s.u.coeffs, s.B.coeffs, s.grid)
    return VectorField(s.grid, du), VectorField(s.grid, db)


@dataclass(frozen=True)
class _Factors:
    eu: np.ndarray
    eb: np.ndarray
    eu2: np.ndarray
    eb2: np.ndarray


def _factors(grid: Grid, mu1: float, mu2: float, dt: float) -> _Factors:
    k2 = grid.k2
    return _Factors(
        np.exp(-mu1 * k2 * dt), np.exp(-mu2 * k2 * dt), np.exp(-mu1 * k2 * dt / 2), np.exp(-mu2 * k2 * dt / 2)
    )


def _check_viscosities(mu1: float, mu2: float) -> None:
    if not (mu1 > 0 and mu2 > 0):
        raise ValueError(f"viscosity and diffusivity must be positive, got mu1={mu1}, mu2={mu2}")


def _advance(uc, bc, grid, dt, scheme, F: _Factors, first=None):
    N = lambda a, b: _nonlinear(a, b, grid, diagnostics=False)[:2]
    k1u, k1b = first if first is not None else N(uc, bc)
    if scheme == "IF-RK2":
        su = F.eu * (uc + dt * k1u)
        sb = F.eb * (bc + dt * k1b)
        k2u, k2b = N(su, sb)
        nu = F.eu * (uc + 0.5 * dt * k1u) + 0.5 * dt * k2u
        nb = F.eb * (bc + 0.5 * dt * k1b) + 0.5 * dt * k2b
        return nu, nb
    # Lawson IF-RK4
    k2u, k2b = N(F.eu2 * (uc + 0.5 * dt * k1u), F.eb2 * (bc + 0.5 * dt * k1b))
    k3u, k3b = N(F.eu2 * uc + 0.5 * dt * k2u, F.eb2 * bc + 0.5 * dt * k2b)
    k4u, k4b = N(F.eu * uc + dt * F.eu2 * k3u, F.eb * bc + dt * F.eb2 * k3b)
    nu = F.eu * uc + dt / 6 * (F.eu * k1u + 2 * F.eu2 * (k2u + k3u) + k4u)
    nb = F.eb * bc + dt / 6 * (F.eb * k1b + 2 * F.eb2 * (k2b + k3b) + k4b)
    return nu, nb


def admissible_dt(vmax: float, grid: Grid, cfl_safety: float) -> float:
    return math.inf if vmax == 0 else cfl_safety * grid.spacing / vmax


def step(s: State, mu1: float, mu2: float, params: IntegratorParams) -> State:
    """One integrating-factor Runge-Kutta step; raises CFLError if dt is too large."""
    _check_viscosities(mu1, mu2)
    g = s.grid
    du, db, vmax, _ = _nonlinear(s.u.coeffs, s.B.coeffs, g)
    limit = admissible_dt(vmax, g, params.cfl_safety)
    if params.dt > limit:
        raise CFLError(params.dt, limit, s)
    F = _factors(g, mu1, mu2, params.dt)
    nu, nb = _advance(s.u.coeffs, s.B.coeffs, g, params.dt, params.scheme, F, first=(du, db))
    return State(VectorField(g, clean(nu, g)), VectorField(g, clean(nb, g)), s.step + 1, params.dt)


@dataclass(frozen=True)
class EnergyReport:
    kinetic: float
    magnetic: float
    dissipation_u: float
    dissipation_B: float

    @property
    def total(self) -> float:
        return self.kinetic + self.magnetic

    @property
    def dissipation(self) -> float:
        return self.dissipation_u + self.dissipation_B


def energy_report(s: State, mu1: float, mu2: float) -> EnergyReport:
    """Energies 1/2 ||.||^2 and dissipation rates mu ||grad .||^2 by Parseval."""
    g = s.grid
    w = g.weight * g.k2

    def grad2(v: VectorField) -> float:
        return float(np.sum(w * np.abs(v.coeffs) ** 2))

    return EnergyReport(
        0.5 * energy_sum(s.u), 0.5 * energy_sum(s.B), mu1 * grad2(s.u), mu2 * grad2(s.B)
    )


def energy_budget_residual(e0: EnergyReport, e1: EnergyReport, e2: EnergyReport, dt: float) -> float:
    """Relative residual of dE/dt = -D over two equal steps.

    Centered difference for dE/dt and Simpson's rule for the dissipation,
    both fourth-order consistent, normalized by the mid-point dissipation.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    rate = (e2.total - e0.total) / (2 * dt)
    mean_d = (e0.dissipation + 4 * e1.dissipation + e2.dissipation) / 6
    scale = e1.dissipation
    if scale == 0:
        return abs(rate + mean_d)
    return abs(rate + mean_d) / scale


# -- trajectories -------------------------------------------------------------


@dataclass
class Recorder:
    """Per-snapshot diagnostics: block L^p histories, chi^s norms, energy.

    ``block_ps`` maps a field name in FIELDS to the Lebesgue exponents whose
    block norms are recorded.
    """

    part: DyadicPartition
    mu1: float
    mu2: float
    block_ps: dict = field(default_factory=dict)
    chi_s: tuple = (-1.0, 0.0, 1.0)
    chi_fields: tuple = FIELDS
    histories: dict = field(default_factory=dict)
    chi: dict = field(default_factory=dict)
    times: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    energy: list = field(default_factory=list)

    def __post_init__(self):
        for name, ps in self.block_ps.items():
            if name not in FIELDS:
                raise ValueError(f"unknown field {name!r}; expected one of {FIELDS}")
            for p in ps:
                self.histories.setdefault((name, float(p)), BlockNormHistory(tuple(self.part.js), float(p)))
        for name in self.chi_fields:
            for s in self.chi_s:
                self.chi.setdefault((name, float(s)), [])

    def record(self, s: State) -> None:
        self.times.append(s.t)
        self.steps.append(s.step)
        fields = {}
        for name in set(self.block_ps) | set(self.chi_fields):
            fields[name] = s.field(name)
        for name, ps in self.block_ps.items():
            ps = [float(p) for p in ps]
            norms = block_lp_norms(fields[name], self.part, ps)
            for p in ps:
                self.histories[name, p].append(s.t, norms[p])
        for (name, sv), series in self.chi.items():
            series.append(chi_norm(fields[name], sv))
        self.energy.append(energy_report(s, self.mu1, self.mu2))

    def history(self, name: str, p: float) -> BlockNormHistory:
        key = (name, float(p))
        if key not in self.histories:
            raise KeyError(f"no block history recorded for {name} at p={p}")
        return self.histories[key]


@dataclass
class Trajectory:
    final: State
    recorder: Optional[Recorder]
    states: list
    aborted: Optional[str] = None
    message: str = ""


def _is_snapshot(step_no: int, params: IntegratorParams) -> bool:
    # every step while t <= dense_until resolves fast initial transients
    if step_no * params.dt <= params.dense_until * (1 + 1e-12):
        return True
    return step_no % params.snapshot_every == 0 or step_no == params.n_steps


def blowup_reference(s: State) -> float:
    """max |u| on the grid, or max |W+-| when u is at rest."""
    _, _, vmax, umax = _nonlinear(s.u.coeffs, s.B.coeffs, s.grid)
    return umax if umax > 0 else vmax


def run(
    initial: State,
    mu1: float,
    mu2: float,
    params: IntegratorParams,
    recorder: Optional[Recorder] = None,
    *,
    keep_states: bool = False,
    on_snapshot: Optional[Callable[[State], None]] = None,
    u_inf_reference: Optional[float] = None,
    stop_after: Optional[int] = None,
) -> Trajectory:
    """Integrate from ``initial`` (which may be a resumed state) to t_end.

    Snapshots are taken every ``snapshot_every`` steps, at every step up
    to ``dense_until``, and at the final step; the initial state is
    recorded only when ``initial.step == 0``.
    Numerical aborts are reported in the returned trajectory, not raised.
    ``stop_after`` ends the run after that many snapshots (used to simulate
    interruption).
    """
    _check_viscosities(mu1, mu2)
    n_steps = params.n_steps
    s = replace(initial, dt=params.dt)
    if s.step > n_steps:
        raise ValueError(f"state at step {s.step} is past the final step {n_steps}")
    if u_inf_reference is None:
        u_inf_reference = blowup_reference(s)
    states = []
    taken = 0

    def snapshot(st: State) -> bool:
        nonlocal taken
        if recorder is not None:
            recorder.record(st)
        if keep_states:
            states.append(st)
        if on_snapshot is not None:
            on_snapshot(st)
        taken += 1
        return stop_after is not None and taken >= stop_after

    if s.step == 0 and snapshot(s):
        return Trajectory(s, recorder, states, "stopped", "stopped after requested snapshots")
    g = s.grid
    F = _factors(g, mu1, mu2, params.dt)
    while s.step < n_steps:
        du, db, vmax, umax = _nonlinear(s.u.coeffs, s.B.coeffs, g)
        if u_inf_reference > 0 and umax > BLOWUP_FACTOR * u_inf_reference:
            return Trajectory(s, recorder, states, "blowup", f"||u||_inf={umax:.3g} at t={s.t:.6g}")
        limit = admissible_dt(vmax, g, params.cfl_safety)
        if params.dt > limit:
            err = CFLError(params.dt, limit, s)
            return Trajectory(s, recorder, states, "cfl", str(err))
        nu, nb = _advance(s.u.coeffs, s.B.coeffs, g, params.dt, params.scheme, F, first=(du, db))
        if not (np.all(np.isfinite(nu)) and np.all(np.isfinite(nb))):
            return Trajectory(s, recorder, states, "nan", f"non-finite coefficients after t={s.t:.6g}")
        s = State(VectorField(g, clean(nu, g)), VectorField(g, clean(nb, g)), s.step + 1, params.dt)
        if _is_snapshot(s.step, params) and snapshot(s):
            if s.step < n_steps:
                return Trajectory(s, recorder, states, "stopped", "stopped after requested snapshots")
    return Trajectory(s, recorder, states)
