"""
Run configuration: a flat YAML mapping validated into ``RunConfig``.

Every key is listed in ``FIELD_NAMES``.  Unknown keys are rejected with a
spelling suggestion, and errors carry the line of the offending key.
The physics parameters ``viscosity`` (mu1) and ``diffusivity`` (mu2) have
no defaults.  All lengths are in units of the 2 pi-periodic box and all
times in the same units as ``dt``.
"""

from __future__ import annotations

import dataclasses
import difflib
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Optional

import yaml

from .solver import FIELDS, SCHEMES

STREAMS = ("reference", "shell", "random", "modes")


class ConfigError(ValueError):
    """Invalid configuration text or values; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class MonitoredNorm:
    field: str
    s: float
    p: float
    r: float

    @property
    def label(self) -> str:
        return f"{self.field}:{self.s:g}:{self.p:g}:{self.r:g}"


@dataclass(frozen=True)
class RunConfig:
    n: int
    viscosity: float
    diffusivity: float
    dt: float
    t_end: float
    j_min: int = -2
    j_max: Optional[int] = None
    stream: str = "reference"
    stream_rho1: float = 1.2
    stream_rho2: float = 1.6
    stream_amplitude: float = 1.0
    stream_modes: Optional[tuple] = None
    seed: int = 0
    osc_m: int = 4
    initial_checkpoint: Optional[str] = None
    scheme: str = "IF-RK2"
    cfl_safety: float = 0.5
    snapshot_every: int = 1
    dense_until: float = 0.0
    checkpoint_every: int = 0
    monitor: tuple = ()
    besov_p: float = 6.0
    besov_r: float = 1.0
    epsilon: float = 0.0
    C: float = 1.0
    eta: float = 0.01
    eps0: float = 0.05
    C1: float = 1.0
    C2: float = 1.0
    b: Optional[float] = None
    c_dissipation: float = 1.0
    output_dir: str = "runs/out"

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["monitor"] = [dataclasses.asdict(m) for m in self.monitor]
        if self.stream_modes is not None:
            d["stream_modes"] = [list(k) for k in self.stream_modes]
        return d

    @property
    def hash(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    @property
    def monitored(self) -> tuple:
        """Explicit monitor entries, or W+- at the condition exponents."""
        if self.monitor:
            return self.monitor
        s = 3.0 / self.besov_p - 1.0
        return tuple(MonitoredNorm(f, s, self.besov_p, self.besov_r) for f in ("W+", "W-"))


REQUIRED = ("n", "viscosity", "diffusivity", "dt", "t_end")
FIELD_NAMES = tuple(f.name for f in dataclasses.fields(RunConfig))


def _key_lines(text: str) -> dict:
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value}


def _number(name, v, line, kind=float, allow_inf=False):
    if isinstance(v, bool) or v is None:
        raise ConfigError(f"{name} must be a number, got {v!r}", line)
    if isinstance(v, str):
        if allow_inf and v.strip().lower() in ("inf", "infinity", ".inf"):
            return math.inf
        raise ConfigError(f"{name} must be a number, got {v!r}", line)
    if kind is int:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"{name} must be an integer, got {v!r}", line)
        return int(v)
    x = float(v)
    if math.isnan(x) or (math.isinf(x) and not allow_inf):
        raise ConfigError(f"{name} must be finite, got {v!r}", line)
    return x


_INTS = {"n", "j_min", "seed", "osc_m", "snapshot_every", "checkpoint_every"}
_STRS = {"stream", "scheme", "output_dir"}
_EXPONENTS = {"besov_p", "besov_r"}


def _coerce(key: str, v, line):
    if key in _INTS:
        return _number(key, v, line, int)
    if key == "j_max":
        return None if v is None else _number(key, v, line, int)
    if key in ("b", "initial_checkpoint") and v is None:
        return None
    if key == "initial_checkpoint":
        if not isinstance(v, str):
            raise ConfigError(f"initial_checkpoint must be a path, got {v!r}", line)
        return v
    if key in _STRS:
        if not isinstance(v, str):
            raise ConfigError(f"{key} must be a string, got {v!r}", line)
        return v
    if key == "stream_modes":
        if v is None:
            return None
        if not isinstance(v, list) or not all(isinstance(k, list) and len(k) == 3 for k in v):
            raise ConfigError("stream_modes must be a list of integer triples", line)
        return tuple(tuple(_number("stream_modes", c, line, int) for c in k) for k in v)
    if key == "monitor":
        if not isinstance(v, list):
            raise ConfigError("monitor must be a list of {field, s, p, r} entries", line)
        out = []
        for entry in v:
            if not isinstance(entry, dict) or set(entry) != {"field", "s", "p", "r"}:
                raise ConfigError(f"monitor entry {entry!r} needs exactly field, s, p, r", line)
            if entry["field"] not in FIELDS:
                raise ConfigError(f"monitor field {entry['field']!r} not in {FIELDS}", line)
            out.append(
                MonitoredNorm(
                    entry["field"],
                    _number("monitor.s", entry["s"], line),
                    _number("monitor.p", entry["p"], line, allow_inf=True),
                    _number("monitor.r", entry["r"], line, allow_inf=True),
                )
            )
        return tuple(out)
    return _number(key, v, line, allow_inf=key in _EXPONENTS)


def _validate(cfg: RunConfig, lines: dict) -> None:
    def fail(key, msg):
        raise ConfigError(msg, lines.get(key))

    if cfg.n < 8 or cfg.n & (cfg.n - 1):
        fail("n", f"n must be a power of two >= 8, got {cfg.n}")
    for key in ("viscosity", "diffusivity"):
        if not getattr(cfg, key) > 0:
            fail(key, f"{key} must be positive (zero dissipation is outside the supported regime), got {getattr(cfg, key)}")
    if not cfg.dt > 0:
        fail("dt", f"dt must be positive, got {cfg.dt}")
    if cfg.t_end < 0:
        fail("t_end", f"t_end must be nonnegative, got {cfg.t_end}")
    k = round(cfg.t_end / cfg.dt)
    if abs(k * cfg.dt - cfg.t_end) > 1e-9 * max(1.0, cfg.t_end):
        fail("t_end", f"t_end={cfg.t_end} is not a whole number of steps of dt={cfg.dt}")
    if cfg.scheme not in SCHEMES:
        fail("scheme", f"scheme must be one of {SCHEMES}, got {cfg.scheme!r}")
    if not 0 < cfg.cfl_safety <= 1:
        fail("cfl_safety", f"cfl_safety must lie in (0, 1], got {cfg.cfl_safety}")
    if cfg.snapshot_every < 1:
        fail("snapshot_every", "snapshot_every must be >= 1")
    if cfg.checkpoint_every < 0:
        fail("checkpoint_every", "checkpoint_every must be >= 0 (0 keeps only the final checkpoint)")
    if cfg.dense_until < 0:
        fail("dense_until", "dense_until must be nonnegative")
    if cfg.stream not in STREAMS:
        fail("stream", f"stream must be one of {STREAMS}, got {cfg.stream!r}")
    if cfg.stream == "modes" and not cfg.stream_modes:
        fail("stream", "stream 'modes' needs stream_modes")
    if not 0 < cfg.stream_rho1 < cfg.stream_rho2:
        fail("stream_rho1", "need 0 < stream_rho1 < stream_rho2")
    if cfg.stream_amplitude < 0:
        fail("stream_amplitude", "stream_amplitude must be nonnegative")
    if cfg.osc_m < 1:
        fail("osc_m", "osc_m must be a positive integer")
    if cfg.j_max is not None and cfg.j_max < cfg.j_min:
        fail("j_max", "j_max must be >= j_min")
    if not (cfg.j_min <= 0):
        fail("j_min", "j_min must be <= 0")
    for key in ("besov_p", "besov_r"):
        if getattr(cfg, key) < 1:
            fail(key, f"{key} must be >= 1")
    for m in cfg.monitor:
        if m.p < 1 or m.r < 1:
            fail("monitor", f"monitor entry {m.label}: p and r must be >= 1")
    if not 0 <= cfg.epsilon < 1:
        fail("epsilon", "epsilon must lie in [0, 1)")
    for key in ("C", "eta", "eps0", "c_dissipation"):
        if not getattr(cfg, key) > 0:
            fail(key, f"{key} must be positive")
    for key in ("C1", "C2"):
        if not 0 < getattr(cfg, key) < 2:
            fail(key, f"{key} must lie in (0, 2)")
    if cfg.b is not None and not cfg.b > 0:
        fail("b", "b must be positive")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a flat YAML config."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"parse error: {getattr(exc, 'problem', exc)}", mark.line + 1 if mark else None) from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a key: value mapping", 1)
    lines = _key_lines(text)
    values = {}
    for key, v in data.items():
        line = lines.get(key)
        if key not in FIELD_NAMES:
            close = difflib.get_close_matches(str(key), FIELD_NAMES, n=1)
            hint = f"; did you mean {close[0]!r}?" if close else ""
            raise ConfigError(f"unknown key {key!r}{hint}", line)
        values[key] = _coerce(key, v, line)
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    cfg = RunConfig(**values)
    _validate(cfg, lines)
    return cfg


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(cfg: RunConfig) -> str:
    """YAML text that parses back to an equal config."""
    d = cfg.to_dict()
    for m in d["monitor"]:
        for k in ("p", "r"):
            if math.isinf(m[k]):
                m[k] = "inf"
    for k in ("besov_p", "besov_r"):
        if math.isinf(d[k]):
            d[k] = "inf"
    return yaml.safe_dump(d, sort_keys=False, default_flow_style=None)


def with_updates(cfg: RunConfig, **changes) -> RunConfig:
    """Revalidated copy with ``changes`` applied."""
    return parse_config(dump_config(dataclasses.replace(cfg, **changes)))
