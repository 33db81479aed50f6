"""Run configuration: an INI-style file with three sections.

Example::

    [run]
    scenario = fig1
    method = all
    seed = 0
    out = results

    [params]
    nu_over_omega0 = 0.1, 0.01
    delta0 = 0

    [resolution]
    n_traj = 2000
    t_max = auto

``auto`` (or an omitted key) selects the scenario default.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import math
from dataclasses import dataclass, field, fields
from typing import Optional

SCENARIOS = ("fig1", "fig2", "fig3", "pointer", "validate")
METHODS = ("mc", "pde", "theory", "all")

# scenario defaults for the "auto" fields
_DEFAULTS = {
    "fig1": {"nu_over_omega0": (0.0, 0.01, 0.1, 1.0), "t_max": 20.0, "n_traj": 2000, "n_out": 200},
    "fig2": {"nu_over_omega0": (0.01, 0.001), "t_max": 12.0, "n_traj": 2000, "n_out": 240},
    "fig3": {"nu_over_omega0": (0.01, 0.001), "t_max": 500.0, "n_traj": 2000, "n_out": 400},
    "pointer": {"nu_over_omega0": (0.001,), "t_max": 300.0, "n_traj": 4000, "n_out": 60},
    "validate": {"nu_over_omega0": (0.1,), "t_max": 8.0, "n_traj": 4000, "n_out": 16},
}

# key -> section
_SECTIONS = {
    "scenario": "run", "method": "run", "seed": "run", "out": "run",
    "omega0": "params", "nu_over_omega0": "params", "delta0": "params",
    "phi_prime": "params", "n_mix": "params",
    "n_traj": "resolution", "dt_mc": "resolution", "dt_pde": "resolution",
    "grid_points": "resolution", "omega_max": "resolution", "t_max": "resolution",
    "n_out": "resolution", "workers": "resolution",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: str = "fig1"
    method: str = "all"
    seed: int = 0
    out: str = "results"
    omega0: float = 1.0
    nu_over_omega0: Optional[tuple] = None
    delta0: float = 0.0
    # pointer scenario: conditioning phase and weight of |1> mixed into |psi+>
    phi_prime: float = math.pi / 4
    n_mix: float = 0.1
    n_traj: Optional[int] = None
    dt_mc: Optional[float] = None
    dt_pde: float = 0.005
    grid_points: int = 2048
    omega_max: float = 6.0
    t_max: Optional[float] = None
    n_out: Optional[int] = None
    workers: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.omega0 != 1.0:
            raise ConfigError("omega0 is the unit of frequency and must be 1")
        if self.nu_over_omega0 is not None:
            self.nu_over_omega0 = tuple(float(x) for x in self.nu_over_omega0)
            if not self.nu_over_omega0:
                raise ConfigError("nu_over_omega0 must not be empty")
            if any(not (x >= 0 and math.isfinite(x)) for x in self.nu_over_omega0):
                raise ConfigError("nu_over_omega0 values must be finite and nonnegative")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        for name in ("n_traj", "n_out"):
            v = getattr(self, name)
            if v is not None and v < 2:
                raise ConfigError(f"{name} must be at least 2")
        for name in ("dt_mc", "dt_pde", "t_max", "omega_max"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive")
        if self.grid_points < 8:
            raise ConfigError("grid_points must be at least 8")
        if not 0 <= self.n_mix < 1:
            raise ConfigError("n_mix must lie in [0, 1)")

    # resolved values ------------------------------------------------------

    def resolved(self, name):
        v = getattr(self, name)
        return _DEFAULTS[self.scenario][name] if v is None else v

    @property
    def nus(self) -> tuple:
        return tuple(self.resolved("nu_over_omega0"))

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    # serialisation --------------------------------------------------------

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for sec in ("run", "params", "resolution"):
            cp.add_section(sec)
        for f in fields(self):
            cp.set(_SECTIONS[f.name], f.name, _format_value(getattr(self, f.name)))
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        types = {f.name: f for f in fields(cls)}
        kwargs = {}
        for sec in cp.sections():
            if sec not in ("run", "params", "resolution"):
                raise ConfigError(f"unknown section [{sec}]")
            for key, raw in cp.items(sec):
                if key not in types:
                    raise ConfigError(f"unknown key {key!r} in [{sec}]")
                if _SECTIONS[key] != sec:
                    raise ConfigError(f"key {key!r} belongs in [{_SECTIONS[key]}], not [{sec}]")
                kwargs[key] = _parse_value(key, raw)
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_ini(fh.read())


def _format_value(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


_INT_KEYS = {"seed", "n_traj", "grid_points", "n_out", "workers"}
_FLOAT_KEYS = {"omega0", "delta0", "phi_prime", "n_mix", "dt_mc", "dt_pde", "omega_max", "t_max"}


def _parse_value(key, raw):
    raw = raw.strip()
    if raw == "auto":
        if key not in ("nu_over_omega0", "n_traj", "dt_mc", "t_max", "n_out"):
            raise ConfigError(f"{key} has no automatic value")
        return None
    try:
        if key == "nu_over_omega0":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw
