"""
Experiment orchestration behind the command line: initial data, condition
reports, trajectories with checkpoints and resumption, sweeps, and the
inequality suites.

A run directory holds ``config.yaml``, ``manifest.json``, ELSF checkpoints
(``initial.elsf`` and ``ckpt_<step>.elsf``, version 2), ``norms.csv``,
``blocks.csv``, ``chi.csv``, ``energy.csv``, bootstrap traces under
``trace_<name>.csv`` and ``conditions.json``.  Numeric outputs depend only
on the config, so reruns reproduce them byte for byte; wall-clock times
appear in the manifest alone.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import inequalities as ineq
from .config import ConfigError, RunConfig, dump_config, with_updates
from .initial_data import StreamSpec, large_data_pair, make_stream, reference_stream
from .littlewood_paley import DyadicPartition, build_partition
from .monitor import (
    BootstrapTrace,
    bootstrap_besov,
    bootstrap_chi,
    check_epsilon_r,
    chi_energy_check,
    chi_margin_report,
    condition_besov,
    condition_chi,
    corollary_besov,
    corollary_chi,
    default_b,
    gronwall_envelope_besov,
    viscosities,
    wplus_bound_trace,
)
from .norms import BesovParams, BlockNormHistory, besov_norm, chi_norm, fmt, write_norm_rows
from .solver import (
    EnergyReport,
    IntegratorParams,
    Recorder,
    State,
    blowup_reference,
    make_state,
    run,
)
from .spectral import Grid, VectorField, as_vectors, make_grid, read_checkpoint, write_checkpoint

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3

# sweep axes that are not config keys
VIRTUAL_AXES = ("nu_plus", "nu_minus", "m")


# -- building blocks -------------------------------------------------------------


def partition_for(cfg: RunConfig, grid: Grid) -> DyadicPartition:
    if cfg.j_max is None:
        j_max = int(math.floor(math.log2(grid.max_resolved_wavenumber * 3 / 8)))
    else:
        j_max = cfg.j_max
    try:
        return build_partition(grid, cfg.j_min, j_max)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def stream_for(cfg: RunConfig, grid: Grid):
    try:
        if cfg.stream == "reference":
            return reference_stream(grid, cfg.stream_amplitude)
        if cfg.stream == "shell":
            spec = StreamSpec(cfg.stream_rho1, cfg.stream_rho2, cfg.stream_amplitude)
        elif cfg.stream == "random":
            spec = StreamSpec(cfg.stream_rho1, cfg.stream_rho2, cfg.stream_amplitude, seed=cfg.seed)
        else:
            spec = StreamSpec(cfg.stream_rho1, cfg.stream_rho2, cfg.stream_amplitude, modes=cfg.stream_modes)
        return make_stream(spec, grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def initial_fields(cfg: RunConfig) -> tuple[VectorField, VectorField]:
    """(u0, B0) from a checkpoint or from the large-data family."""
    if cfg.initial_checkpoint:
        try:
            fields = as_vectors(read_checkpoint(cfg.initial_checkpoint))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"initial_checkpoint: {exc}") from None
        if len(fields) != 2 or fields[0].grid.n != cfg.n:
            raise ConfigError(f"initial_checkpoint must hold u and B on n={cfg.n}")
        return fields[0], fields[1]
    grid = make_grid(cfg.n)
    try:
        pair = large_data_pair(stream_for(cfg, grid), cfg.osc_m)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return pair.u0, pair.B0


def condition_reports(cfg: RunConfig, u0: VectorField, B0: VectorField, part: DyadicPartition) -> list:
    params = BesovParams(3.0 / cfg.besov_p - 1.0, cfg.besov_p, cfg.besov_r)
    mu1, mu2 = cfg.viscosity, cfg.diffusivity
    nu_p, nu_m = viscosities(mu1, mu2)
    out = []
    if check_epsilon_r(cfg.epsilon, cfg.besov_r):
        out += condition_besov(u0, B0, mu1, mu2, params, cfg.epsilon, cfg.C, cfg.eta, part)
        if mu1 == mu2:
            out += corollary_besov(u0, B0, mu1, mu2, params, cfg.epsilon, cfg.C, cfg.eta, part)
    out += condition_chi(u0, B0, mu1, mu2, cfg.C)
    if mu1 == mu2:
        out += corollary_chi(u0, B0, mu1, mu2, cfg.C)
    wp, wm = u0 + B0, u0 - B0
    out.append(chi_margin_report(chi_norm(wm, -1.0), chi_norm(wp, -1.0), nu_p, nu_m, cfg.C, cfg.eps0))
    return out


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _clean(o):
    # JSON has no inf or nan; spell them as strings
    if isinstance(o, float) and not math.isfinite(o):
        return fmt(o) if not math.isnan(o) else "nan"
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default) + "\n")


# -- recorder persistence -----------------------------------------------------------


def recorder_for(cfg: RunConfig, part: DyadicPartition) -> Recorder:
    block_ps: dict = {"W+": {cfg.besov_p}, "W-": {cfg.besov_p}}
    for m in cfg.monitored:
        block_ps.setdefault(m.field, set()).add(m.p)
    return Recorder(part, cfg.viscosity, cfg.diffusivity, {k: sorted(v) for k, v in block_ps.items()})


def recorder_state(rec: Recorder) -> dict:
    return {
        "times": rec.times,
        "steps": rec.steps,
        "histories": [
            {"field": name, "p": fmt(p), "rows": [r.tolist() for r in h.rows]} for (name, p), h in rec.histories.items()
        ],
        "chi": [{"field": name, "s": s, "values": v} for (name, s), v in rec.chi.items()],
        "energy": [dataclasses.asdict(e) for e in rec.energy],
    }


def restore_recorder(rec: Recorder, data: dict) -> None:
    rec.times[:] = [float(t) for t in data["times"]]
    rec.steps[:] = [int(s) for s in data["steps"]]
    for h in data["histories"]:
        key = (h["field"], float(h["p"]))
        rec.histories[key] = BlockNormHistory(tuple(rec.part.js), key[1], list(rec.times), [np.array(r) for r in h["rows"]])
    for c in data["chi"]:
        rec.chi[c["field"], float(c["s"])] = [float(v) for v in c["values"]]
    rec.energy[:] = [EnergyReport(**e) for e in data["energy"]]


# -- outputs ---------------------------------------------------------------------------


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_series(run_dir: Path, cfg: RunConfig, rec: Recorder) -> None:
    rows = []
    for m in cfg.monitored:
        series = rec.history(m.field, m.p).besov_series(m.s, m.r)
        rows += [(t, m.field, m.s, m.p, m.r, v) for t, v in zip(rec.times, series)]
    rows.sort(key=lambda row: row[0])
    write_norm_rows(run_dir / "norms.csv", rows)
    blocks = []
    for (name, p), h in sorted(rec.histories.items()):
        for t, row in zip(h.times, h.rows):
            blocks += [(t, name, p, j, v) for j, v in zip(h.js, row)]
    _write_csv(run_dir / "blocks.csv", ("t", "name", "p", "j", "value"), blocks)
    chi_rows = []
    for (name, s), values in sorted(rec.chi.items()):
        chi_rows += [(t, name, s, v) for t, v in zip(rec.times, values)]
    _write_csv(run_dir / "chi.csv", ("t", "name", "s", "value"), chi_rows)
    _write_csv(
        run_dir / "energy.csv",
        ("t", "kinetic", "magnetic", "dissipation_u", "dissipation_B"),
        [(t, e.kinetic, e.magnetic, e.dissipation_u, e.dissipation_B) for t, e in zip(rec.times, rec.energy)],
    )


def bootstrap_traces(cfg: RunConfig, rec: Recorder) -> list[BootstrapTrace]:
    nu_p, nu_m = viscosities(cfg.viscosity, cfg.diffusivity)
    r = cfg.besov_r
    out = []
    if len(rec.times) == 0:
        return out
    wm = rec.history("W-", cfg.besov_p)
    wp = rec.history("W+", cfg.besov_p)
    out.append(bootstrap_besov(wm, r, cfg.eps0, nu_p))
    w0p = wp.besov_series(3.0 / cfg.besov_p - 1.0, r)[0]
    out.append(wplus_bound_trace(wp, r, w0p, nu_p, nu_m, cfg.c_dissipation))
    b = cfg.b if cfg.b is not None else default_b(nu_p, cfg.eps0, cfg.C1, cfg.C2)
    out.append(bootstrap_chi(rec.times, rec.chi["W-", -1.0], rec.chi["W-", 1.0], b, nu_p))
    if len(rec.times) >= 1:
        out.append(
            chi_energy_check(
                rec.times,
                {-1.0: rec.chi["W+", -1.0], 1.0: rec.chi["W+", 1.0]},
                {0.0: rec.chi["W-", 0.0], 1.0: rec.chi["W-", 1.0]},
                nu_p,
                nu_p,
                nu_m,
            )
        )
    return out


def envelope_summary(cfg: RunConfig, reports) -> dict:
    """Predicted W- envelope and the W+ a priori bound, for comparison with the traces."""
    rep = next((r for r in reports if r.name == "besov_wminus"), None)
    if rep is None:
        return {}
    return {
        "besov_wminus": gronwall_envelope_besov(
            rep.w0_minus, rep.w0_plus, rep.nu_plus, rep.nu_minus, cfg.epsilon, cfg.C
        ),
        "wplus_bound": 4.0 * rep.w0_plus + 2.0 * cfg.c_dissipation * rep.nu_minus,
    }


def trace_summary(tr: BootstrapTrace) -> dict:
    return {
        "name": tr.name,
        "threshold": tr.threshold,
        "max_value": float(tr.values.max(initial=-math.inf)),
        "max_ratio": tr.max_ratio,
        "violated": tr.violated,
        "first_violation": tr.first_violation,
    }


def write_traces(run_dir: Path, traces: Sequence[BootstrapTrace]) -> None:
    for tr in traces:
        _write_csv(
            run_dir / f"trace_{tr.name}.csv",
            ("t", "value", "threshold", "violated"),
            [(t, v, tr.threshold, int(v > tr.threshold)) for t, v in zip(tr.times, tr.values)],
        )


# -- run -------------------------------------------------------------------------------


@dataclass
class RunResult:
    exit_code: int
    run_dir: Path
    manifest: dict


def _ckpt_name(step: int) -> str:
    return f"ckpt_{step:08d}.elsf"


def _latest_checkpoint(run_dir: Path) -> Optional[tuple[Path, Path]]:
    found = sorted(run_dir.glob("ckpt_*.elsf"))
    for path in reversed(found):
        side = path.with_suffix(".json")
        if side.exists():
            return path, side
    return None


def _manifest(cfg, run_dir, started, rec, abort, message, complete, exit_code, extra=None) -> dict:
    files = {}
    for p in sorted(run_dir.iterdir()):
        if p.is_file() and p.name != "manifest.json":
            files[p.name] = p.stat().st_size
    m = {
        "config_hash": cfg.hash,
        "grid": cfg.n,
        "mu1": cfg.viscosity,
        "mu2": cfg.diffusivity,
        "start_time": started,
        "end_time": time.time(),
        "snapshot_index": [{"step": s, "t": t} for s, t in zip(rec.steps, rec.times)] if rec else [],
        "files": files,
        "abort_reason": abort,
        "message": message,
        "incomplete": not complete,
        "exit_code": exit_code,
    }
    if extra:
        m.update(extra)
    return m


def verify_manifest(run_dir) -> list[str]:
    """Names of listed files that are missing or whose size differs."""
    run_dir = Path(run_dir)
    m = json.loads((run_dir / "manifest.json").read_text())
    bad = []
    for name, size in m["files"].items():
        p = run_dir / name
        if not p.exists() or p.stat().st_size != size:
            bad.append(name)
    return bad


def cmd_run(
    cfg: RunConfig,
    run_dir=None,
    *,
    resume: bool = False,
    stop_after: Optional[int] = None,
) -> RunResult:
    """Integrate a config into ``run_dir`` (default ``cfg.output_dir``).

    With ``resume`` the latest checkpoint and its recorder sidecar are
    reloaded and the run continues from there.  ``stop_after`` interrupts
    after that many new snapshots and leaves the manifest incomplete.
    """
    run_dir = Path(run_dir or cfg.output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    if resume:
        old = json.loads((run_dir / "manifest.json").read_text())
        if old["config_hash"] != cfg.hash:
            raise ConfigError("resume: config differs from the one that started this run")
        started = old["start_time"]
    (run_dir / "config.yaml").write_text(dump_config(cfg))
    grid = make_grid(cfg.n)
    part = partition_for(cfg, grid)
    rec = recorder_for(cfg, part)
    params = IntegratorParams(
        cfg.dt, cfg.scheme, cfg.cfl_safety, cfg.t_end, cfg.snapshot_every, cfg.dense_until
    )

    if resume and (found := _latest_checkpoint(run_dir)):
        ckpt, side = found
        meta = json.loads(side.read_text())
        u, B = as_vectors(read_checkpoint(ckpt))
        state = State(u, B, meta["step"], cfg.dt)
        restore_recorder(rec, meta["recorder"])
        u_ref = meta["u_inf_reference"]
        initial = as_vectors(read_checkpoint(run_dir / "initial.elsf"))
    else:
        for old in run_dir.glob("ckpt_*"):
            old.unlink()
        state = make_state(*initial_fields(cfg))
        write_checkpoint(run_dir / "initial.elsf", [state.u, state.B], version=2)
        u_ref = blowup_reference(state)
        initial = [state.u, state.B]

    reports = condition_reports(cfg, initial[0], initial[1], part)
    conditions = {"initial": [r.to_dict() for r in reports]}
    write_json(run_dir / "conditions.json", conditions)
    write_json(run_dir / "manifest.json", _manifest(cfg, run_dir, started, rec, None, "", False, None))

    if cfg.t_end == 0:
        m = _manifest(cfg, run_dir, started, None, None, "t_end = 0: initial condition report only", True, EXIT_OK)
        write_json(run_dir / "manifest.json", m)
        return RunResult(EXIT_OK, run_dir, m)

    count = {"snapshots": 0}

    def on_snapshot(st: State) -> None:
        count["snapshots"] += 1
        every = cfg.checkpoint_every
        if every and count["snapshots"] % every == 0 and st.step > 0:
            _checkpoint(run_dir, st, rec, u_ref)

    traj = run(state, cfg.viscosity, cfg.diffusivity, params, rec, on_snapshot=on_snapshot,
               u_inf_reference=u_ref, stop_after=stop_after)
    final = traj.final
    stopped = traj.aborted == "stopped"
    if traj.aborted is None or stopped:
        _checkpoint(run_dir, final, rec, u_ref)
    write_series(run_dir, cfg, rec)
    traces = bootstrap_traces(cfg, rec)
    write_traces(run_dir, traces)
    conditions["bootstrap"] = [trace_summary(t) for t in traces]
    conditions["envelope"] = envelope_summary(cfg, reports)
    conditions["final"] = {
        "t": final.t,
        "step": final.step,
        "norms": {m.label: rec.history(m.field, m.p).besov_series(m.s, m.r)[-1] for m in cfg.monitored} if rec.times else {},
    }
    write_json(run_dir / "conditions.json", conditions)
    if traj.aborted is None:
        code, complete = EXIT_OK, True
    elif stopped:
        code, complete = EXIT_OK, False
    else:
        code, complete = EXIT_ABORT, False
    m = _manifest(cfg, run_dir, started, rec, None if stopped else traj.aborted, traj.message, complete, code)
    write_json(run_dir / "manifest.json", m)
    return RunResult(code, run_dir, m)


def _checkpoint(run_dir: Path, st: State, rec: Recorder, u_ref: float) -> None:
    path = run_dir / _ckpt_name(st.step)
    write_checkpoint(path, [st.u, st.B], version=2)
    write_json(path.with_suffix(".json"), {"step": st.step, "t": st.t, "u_inf_reference": u_ref, "recorder": recorder_state(rec)})


# -- sweeps ----------------------------------------------------------------------------


def sweep_member(cfg: RunConfig, axis: str, value: float) -> RunConfig:
    """Config with ``axis`` set to ``value``; virtual axes keep their partner fixed."""
    nu_p, nu_m = viscosities(cfg.viscosity, cfg.diffusivity)
    sign = 1.0 if cfg.viscosity >= cfg.diffusivity else -1.0
    if axis == "nu_minus":
        changes = {"viscosity": nu_p + sign * value, "diffusivity": nu_p - sign * value}
    elif axis == "nu_plus":
        changes = {"viscosity": value + sign * nu_m, "diffusivity": value - sign * nu_m}
    elif axis == "m":
        changes = {"osc_m": value}
    else:
        changes = {axis: value}
    return with_updates(cfg, **changes)


def _axis_kind(cfg: RunConfig, axis: str):
    if axis in VIRTUAL_AXES:
        return int if axis == "m" else float
    if axis not in cfg.to_dict():
        raise ConfigError(f"invalid sweep axis {axis!r}")
    v = getattr(cfg, axis)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"sweep axis {axis!r} is not a numeric config field")
    return type(v)


def _run_member(args) -> dict:
    cfg, axis, value, run_dir = args
    try:
        member = sweep_member(cfg, axis, value)
    except ConfigError as exc:
        return {axis: value, "exit_code": EXIT_CONFIG, "abort_reason": "config", "message": str(exc)}
    res = cmd_run(member, run_dir)
    cond = json.loads((Path(run_dir) / "conditions.json").read_text())
    row = {axis: value, "exit_code": res.exit_code, "abort_reason": res.manifest["abort_reason"] or ""}
    for r in cond["initial"]:
        row[f"{r['name']}_lhs"] = r["lhs"]
        row[f"{r['name']}_verdict"] = int(r["verdict"])
    for label, v in cond.get("final", {}).get("norms", {}).items():
        row[f"final_{label}"] = v
    for tr in cond.get("bootstrap", []):
        row[f"{tr['name']}_max_ratio"] = tr["max_ratio"]
        row[f"{tr['name']}_first_violation"] = "" if tr["first_violation"] is None else tr["first_violation"]
    return row


def cmd_sweep(cfg: RunConfig, axis: str, values: Sequence[float], out_dir=None, workers: int = 1) -> list[dict]:
    """One run per value under ``out_dir/<axis>_<i>``, plus ``summary.csv``."""
    if not values:
        raise ConfigError("sweep needs at least one value")
    kind = _axis_kind(cfg, axis)
    values = [kind(v) for v in values]
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, axis, v, out / f"{axis}_{i:03d}") for i, v in enumerate(values)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_member, jobs))
    else:
        rows = [_run_member(j) for j in jobs]
    header: list = []
    for r in rows:
        header += [k for k in r if k not in header]
    _write_csv(out / "summary.csv", header, [[r.get(k, "") for k in header] for r in rows])
    return rows


# -- monitor, norms, data ------------------------------------------------------------


def cmd_monitor(run_dir, cfg: Optional[RunConfig] = None) -> list[dict]:
    """Recompute bootstrap traces of a finished run, optionally with new constants."""
    from .config import load_config

    run_dir = Path(run_dir)
    base = load_config(run_dir / "config.yaml")
    cfg = cfg or base
    found = _latest_checkpoint(run_dir)
    if found is None:
        raise ConfigError(f"{run_dir}: no checkpoint with recorder data")
    grid = make_grid(base.n)
    rec = recorder_for(base, partition_for(base, grid))
    restore_recorder(rec, json.loads(found[1].read_text())["recorder"])
    traces = bootstrap_traces(cfg, rec)
    write_traces(run_dir, traces)
    return [trace_summary(t) for t in traces]


def cmd_check_conditions(cfg: RunConfig) -> list[dict]:
    u0, B0 = initial_fields(cfg)
    grid = u0.grid
    return [r.to_dict() for r in condition_reports(cfg, u0, B0, partition_for(cfg, grid))]


def cmd_gen_data(cfg: RunConfig, path) -> dict:
    """Write (u0, B0) as a version-1 checkpoint plus a JSON sidecar."""
    u0, B0 = initial_fields(cfg)
    part = partition_for(cfg, u0.grid)
    params = BesovParams(3.0 / cfg.besov_p - 1.0, cfg.besov_p, cfg.besov_r)
    path = Path(path)
    size = write_checkpoint(path, [u0, B0], version=1)
    meta = {
        "n": cfg.n,
        "m": cfg.osc_m,
        "stream": cfg.stream,
        "stream_amplitude": cfg.stream_amplitude,
        "config_hash": cfg.hash,
        "bytes": size,
        "components": ["u1", "u2", "u3", "B1", "B2", "B3"],
        "norms": {
            "u0": besov_norm(u0, params, part),
            "B0": besov_norm(B0, params, part),
            "u0-B0": besov_norm(u0 - B0, params, part),
        },
        "besov": {"s": params.s, "p": params.p, "r": params.r},
    }
    write_json(path.with_suffix(".json"), meta)
    return meta


def cmd_norms(path, j_min: int = -2, j_max: Optional[int] = None, p: float = 6.0, r: float = 1.0, s: Optional[float] = None) -> list[dict]:
    """Besov and chi^s norms of every vector field in a checkpoint."""
    comps = read_checkpoint(path)
    grid = comps[0].grid
    if j_max is None:
        j_max = int(math.floor(math.log2(grid.max_resolved_wavenumber * 3 / 8)))
    part = build_partition(grid, j_min, j_max)
    s = 3.0 / p - 1.0 if s is None else s
    fields = as_vectors(comps) if len(comps) % 3 == 0 else comps
    out = []
    for i, f in enumerate(fields):
        out.append(
            {
                "index": i,
                "besov": besov_norm(f, BesovParams(s, p, r), part),
                "s": s,
                "p": p,
                "r": r,
                "chi_-1": chi_norm(f, -1.0),
                "chi_0": chi_norm(f, 0.0),
                "chi_1": chi_norm(f, 1.0),
            }
        )
    return out


SUITES = ("bernstein", "dissipation", "skp1", "chi_product", "chi_chain")


def cmd_inequality_suite(n: int, samples: int, seed: int, out_dir, suites: Sequence[str] = SUITES) -> list[dict]:
    """Run the inequality suites; write ``inequalities.json`` and ``ratios.csv``."""
    unknown = set(suites) - set(SUITES)
    if unknown:
        raise ConfigError(f"unknown suites {sorted(unknown)}; choose from {SUITES}")
    grid = make_grid(n)
    part = ineq.default_partition(grid)
    stats = []
    if "bernstein" in suites:
        stats += ineq.verify_bernstein(grid, samples, seed)
    if "dissipation" in suites:
        stats += [ineq.verify_dissipation_bound(grid, p, samples, seed) for p in (2, 4, 6)]
    if "skp1" in suites:
        stats += [ineq.verify_skp1(grid, part, p, r, samples, seed) for p in (2.0, 4.0, 6.0) for r in (1.0, 2.0)]
    if "chi_product" in suites:
        stats.append(ineq.verify_chi_product(grid, samples, seed))
    if "chi_chain" in suites:
        stats += ineq.verify_chi_chain_and_interp(grid, part, samples, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dicts = [s.to_dict() for s in stats]
    write_json(out / "inequalities.json", dicts)
    _write_csv(out / "ratios.csv", ("id", "n", "sample", "ratio"),
               [(s.name, s.n, i, x) for s in stats for i, x in enumerate(s.ratios)])
    return dicts
