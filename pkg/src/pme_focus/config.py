"""Run configuration: flat ``key = value`` files with dotted keys.

Example::

    mode = simulate
    physics.m = 2
    physics.xi = 1
    physics.tau = -1
    grid.n = 4000
    fit.lo_frac = 0.1

Unset optional keys (``none`` or empty) fall back to values derived from the
physics, e.g. ``grid.rmax`` defaults to ``3 xi``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from .errors import PreconditionError

MODES = ("oracle", "simulate", "analyze", "sweep")


class ConfigError(PreconditionError):
    pass


# dotted key -> (field name, kind)
KEYS: Dict[str, Tuple[str, str]] = {
    "mode": ("mode", "str"),
    "physics.m": ("m", "float"),
    "physics.d": ("d", "int"),
    "physics.xi": ("xi", "float"),
    "physics.tau": ("tau", "float"),
    "physics.pde_consistent": ("pde_consistent", "bool"),
    "grid.n": ("n", "int"),
    "grid.rmax": ("rmax", "float?"),
    "numerics.cfl": ("cfl", "float"),
    "numerics.eps_iface": ("eps_iface", "float?"),
    "numerics.eps_focus": ("eps_focus", "float?"),
    "numerics.sample_every": ("sample_every", "int"),
    "numerics.t0": ("t0", "float?"),
    "numerics.t_end": ("t_end", "float?"),
    "fit.lo_frac": ("lo_frac", "float"),
    "fit.hi_frac": ("hi_frac", "float"),
    "output.dir": ("output_dir", "str"),
    "output.snapshots": ("snapshot_times", "floats"),
    "oracle.times": ("oracle_times", "floats"),
    "oracle.points": ("oracle_points", "int"),
    "sweep.m": ("sweep_m", "floats"),
    "sweep.xi": ("sweep_xi", "floats"),
    "sweep.tau": ("sweep_tau", "floats"),
    "sweep.max_runs": ("sweep_max_runs", "int"),
    "analyze.trace": ("analyze_trace", "str?"),
    "analyze.manifest": ("analyze_manifest", "str?"),
    "analyze.focus_time": ("analyze_focus_time", "float?"),
    "seed": ("seed", "int"),
}


@dataclass(frozen=True)
class RunConfig:
    mode: str = "simulate"
    m: float = 2.0
    d: int = 1
    xi: float = 1.0
    tau: float = -1.0
    pde_consistent: bool = False
    n: int = 4000
    rmax: Optional[float] = None
    cfl: float = 0.4
    eps_iface: Optional[float] = None
    eps_focus: Optional[float] = None
    sample_every: int = 200
    t0: Optional[float] = None
    t_end: Optional[float] = None
    lo_frac: float = 0.1
    hi_frac: float = 0.005
    output_dir: str = "out"
    snapshot_times: Tuple[float, ...] = ()
    oracle_times: Tuple[float, ...] = (-0.5,)
    oracle_points: int = 201
    sweep_m: Tuple[float, ...] = (1.5, 2.0, 3.0)
    sweep_xi: Tuple[float, ...] = (1.0,)
    sweep_tau: Tuple[float, ...] = (-1.0,)
    sweep_max_runs: int = 256
    analyze_trace: Optional[str] = None
    analyze_manifest: Optional[str] = None
    analyze_focus_time: Optional[float] = None
    seed: int = 0

    # {{{ derived defaults

    @property
    def rmax_value(self) -> float:
        return self.rmax if self.rmax is not None else 3.0 * self.xi

    @property
    def t0_value(self) -> float:
        return self.t0 if self.t0 is not None else self.tau + 0.01 * (-self.tau)

    @property
    def t_end_value(self) -> float:
        return self.t_end if self.t_end is not None else 0.25 * (-self.tau)

    # }}}

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_mapping(self) -> Dict[str, Any]:
        out = {}
        for key, (name, kind) in KEYS.items():
            value = getattr(self, name)
            out[key] = list(value) if kind == "floats" else value
        return out

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "RunConfig":
        values = {}
        for key, raw in mapping.items():
            if key not in KEYS:
                raise ConfigError(f"unknown configuration key {key!r}")
            name, kind = KEYS[key]
            values[name] = _coerce(key, kind, raw)
        return cls(**values)


def _coerce(key: str, kind: str, raw: Any):
    optional = kind.endswith("?")
    base = kind.rstrip("?")
    if isinstance(raw, str):
        text = raw.strip()
        if optional and text.lower() in ("", "none", "null"):
            return None
    elif raw is None:
        if optional:
            return None
        raise ConfigError(f"{key}: value required")
    try:
        if base == "str":
            return str(raw).strip()
        if base == "int":
            value = float(raw)
            if value != int(value):
                raise ValueError(raw)
            return int(value)
        if base == "float":
            return float(raw)
        if base == "bool":
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if base == "floats":
            if isinstance(raw, str):
                parts = [p for p in raw.replace(";", ",").split(",") if p.strip()]
            else:
                parts = list(raw)
            return tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {raw!r} as {base}") from None
    raise ConfigError(f"{key}: unknown kind {kind}")


def parse_lines(lines: Iterable[str], source: str = "<config>") -> Dict[str, str]:
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config(path: Optional[str] = None, overrides: Iterable[str] = (),
                **extra: Any) -> RunConfig:
    """Read ``path`` (if given), then apply ``key=value`` overrides and ``extra`` keys."""
    mapping: Dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {path} not found")
        mapping.update(parse_lines(p.read_text().splitlines(), str(p)))
    mapping.update(parse_lines(overrides, "--set"))
    mapping.update({k: v for k, v in extra.items() if v is not None})
    return RunConfig.from_mapping(mapping)


def format_config(config: RunConfig) -> str:
    lines = []
    for key, value in config.to_mapping().items():
        if isinstance(value, list):
            value = ", ".join(repr(v) for v in value)
        elif value is None:
            value = "none"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
