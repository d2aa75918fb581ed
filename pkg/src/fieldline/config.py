"""JSON run configuration with strict keys and flat ``a.b=value`` overrides."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError

METHODS = ("quadrature", "closed-form", "ode", "all")


@dataclass
class ProfileSpec:
    name: str = "uniform"
    b0: Optional[float] = None
    axis: Optional[str] = None
    a: Optional[float] = None
    b: Optional[float] = None
    value: Optional[float] = None
    path: Optional[str] = None


@dataclass
class ParticleSpec:
    q: float = 1.0
    m: float = 1.0
    x0: float = 0.0
    y0: float = 0.0
    vx0: float = 0.0
    vy0: float = 0.0


@dataclass
class ConstantsSpec:
    """Motion constants plus where to start; ``u0`` defaults to the point where
    the companion velocity vanishes."""

    k1: float = 0.0
    k2: float = 1.0
    k3: float = 1.0
    u0: Optional[float] = None
    w0: float = 0.0
    direction: int = 1


@dataclass
class TimeSpec:
    t_end: float = 10.0
    n_samples: int = 1001


@dataclass
class Tolerances:
    quad_tol: float = 1e-10
    ode_rel_tol: float = 1e-9
    ode_abs_tol: float = 1e-12
    ode_max_steps: int = 2_000_000
    ode_dt_initial: float = 0.0
    energy_check: float = 1e-8
    momentum_check: float = 1e-8  # times sqrt(k3)


@dataclass
class OutputSpec:
    dir: str = "out"
    stem: Optional[str] = None
    formats: list = field(default_factory=lambda: ["csv", "json"])
    plot: bool = False


@dataclass
class GridSpec:
    u_min: float = 0.0
    u_max: float = 5.0
    n: int = 101


@dataclass
class SusySpec:
    m_quantum: int = 0
    spin_branch: str = "lower"
    hbar: float = 1.0
    mass: float = 1.0
    n_max: int = 5
    convention: str = "n+1/2"
    ladder_base: float = 2.0
    r_min: float = 0.01
    r_max: float = 10.0
    n_table: int = 200


@dataclass
class RunConfig:
    profile: ProfileSpec = field(default_factory=ProfileSpec)
    particle: Optional[ParticleSpec] = None
    constants: Optional[ConstantsSpec] = None
    method: str = "quadrature"
    methods: list = field(default_factory=list)
    time: TimeSpec = field(default_factory=TimeSpec)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: OutputSpec = field(default_factory=OutputSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    susy: SusySpec = field(default_factory=SusySpec)

    def validate(self) -> "RunConfig":
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {', '.join(METHODS)}")
        for m in self.methods:
            if m not in METHODS[:3]:
                raise ConfigError(f"unknown method {m!r} in methods")
        if self.particle is not None and self.constants is not None:
            raise ConfigError("give either 'particle' or 'constants', not both")
        if self.time.t_end <= 0 or self.time.n_samples < 2:
            raise ConfigError("time.t_end must be > 0 and time.n_samples >= 2")
        for fmt in self.output.formats:
            if fmt not in ("csv", "json"):
                raise ConfigError(f"unknown output format {fmt!r}")
        if self.constants is not None and self.constants.direction not in (-1, 1):
            raise ConfigError("constants.direction must be +1 or -1")
        return self

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTIONS = {
    "profile": ProfileSpec, "particle": ParticleSpec, "constants": ConstantsSpec,
    "time": TimeSpec, "tolerances": Tolerances, "output": OutputSpec, "grid": GridSpec,
    "susy": SusySpec,
}


def _coerce(cls, key, value):
    where = f"{cls.__name__}.{key}"
    hint = {f.name: f.type for f in dataclasses.fields(cls)}[key]
    if value is None:
        if "Optional" in str(hint):
            return None
        raise ConfigError(f"{where} may not be null")
    if "float" in str(hint):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{where} must be finite")
        return value
    if "int" in str(hint):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{where} must be an integer")
        return int(value)
    if "bool" in str(hint):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false")
        return value
    if "str" in str(hint):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
        return value
    if "list" in str(hint):
        if isinstance(value, str):
            value = [value]
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be a list")
        return list(value)
    return value


def _build(cls, data):
    if not isinstance(data, dict):
        raise ConfigError(f"section for {cls.__name__} must be an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in {cls.__name__}: {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if cls is RunConfig and key in _SECTIONS:
            if value is None and key not in ("particle", "constants"):
                raise ConfigError(f"section {key!r} must be an object")
            kwargs[key] = None if value is None else _build(_SECTIONS[key], value)
        else:
            kwargs[key] = _coerce(cls, key, value)
    return cls(**kwargs)


def parse_override(text: str):
    """'a.b=value' -> (['a', 'b'], value); value is JSON when it parses, else a string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    path = [p for p in key.strip().split(".") if p]
    if not path:
        raise ConfigError(f"override {text!r} has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_overrides(data: dict, overrides) -> dict:
    data = json.loads(json.dumps(data))
    for text in overrides or ():
        path, value = parse_override(text)
        node = data
        for part in path[:-1]:
            nxt = node.get(part)
            if nxt is None:
                nxt = node[part] = {}
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {text!r}: {part} is not a section")
            node = nxt
        node[path[-1]] = value
    return data


def config_from_dict(data: dict, overrides=()) -> RunConfig:
    return _build(RunConfig, apply_overrides(data, overrides)).validate()


def load_config(path, overrides=()) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return config_from_dict(data, overrides)
