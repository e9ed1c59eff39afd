"""INI run configuration.

Five sections, all optional, every key validated::

    [mesh]    degree, elements, resolutions, domain
    [model]   scenario, g, r, porosity, manning_n, discharge, A_g, d_s, theta_c, rho_f, h_min
    [scheme]  volume, quad_points, surface, dissipation, strict_paper_blend, study_fluctuations
    [time]    method, dt, cfl, t_end, callback_interval, callback_time, timing_calls, warmup_calls
    [output]  directory, prefix, snapshot_interval, timeseries

Command-line overrides use ``section.key=value``.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..dgsem import Semidiscretization, uniform_mesh
from ..errors import ConfigurationError, ParameterError
from ..model import MPM, Grass, SveParams
from ..sbp import lgl_basis
from ..timeint import TimeIntegrationConfig
from .scenarios import SCENARIOS, Scenario


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_float(s: str):
    return None if s.strip().lower() in ("", "none") else float(s)


def _floats(s: str) -> tuple:
    return tuple(float(v) for v in s.replace(",", " ").split())


def _ints(s: str) -> tuple:
    return tuple(int(v) for v in s.replace(",", " ").split())


def _words(s: str) -> tuple:
    return tuple(v for v in s.replace(",", " ").split())


@dataclass(frozen=True)
class MeshConfig:
    degree: int = 4
    elements: int = 128
    resolutions: tuple = ()
    domain: tuple = ()  # empty: the scenario's domain


@dataclass(frozen=True)
class ModelConfig:
    scenario: str = "channel"
    g: float = 9.81
    r: float = 0.3
    porosity: float = 0.4
    manning_n: float = 0.0
    discharge: str = "grass"
    A_g: float = 0.01
    d_s: float = 1e-3
    theta_c: float = 0.047
    rho_f: float = 1.0
    h_min: float = 1e-10


@dataclass(frozen=True)
class SchemeConfig:
    volume: str = "closed_form"
    quad_points: int = 3
    surface: str = "es"
    dissipation: str = "roe_blend"
    strict_paper_blend: bool = False
    study_fluctuations: tuple = ("quadrature:1", "quadrature:2", "quadrature:3", "closed_form")


@dataclass(frozen=True)
class TimeConfig:
    method: str = "ssprk33"
    dt: Optional[float] = None
    cfl: Optional[float] = 0.5
    t_end: float = 1.0
    callback_interval: int = 1
    callback_time: Optional[float] = None
    timing_calls: int = 100
    warmup_calls: int = 10


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "output"
    prefix: str = ""
    snapshot_interval: int = 0  # steps between snapshots; 0 writes only the initial and final states
    timeseries: bool = True


_PARSERS = {
    "int": int,
    "float": float,
    "str": str,
    "bool": _bool,
    "Optional[float]": _opt_float,
}
_TUPLE_PARSERS = {"resolutions": _ints, "domain": _floats, "study_fluctuations": _words}


@dataclass(frozen=True)
class RunConfig:
    mesh: MeshConfig = field(default_factory=MeshConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    source_path: Optional[str] = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_mapping(cls, data: dict[str, dict[str, str]], source_path=None) -> "RunConfig":
        sections = {f.name: f.type for f in dataclasses.fields(cls) if f.name != "source_path"}
        kwargs = {}
        for name, values in data.items():
            if name not in sections:
                raise ConfigurationError(f"unknown section [{name}]")
            sec_cls = _SECTION_TYPES[name]
            known = {f.name: f for f in dataclasses.fields(sec_cls)}
            parsed = {}
            for key, raw in values.items():
                if key not in known:
                    raise ConfigurationError(f"unknown key '{key}' in section [{name}]")
                f = known[key]
                conv = _TUPLE_PARSERS.get(key) or _PARSERS[f.type]
                try:
                    parsed[key] = conv(raw)
                except ValueError as exc:
                    raise ConfigurationError(f"[{name}] {key} = {raw!r}: {exc}") from None
            kwargs[name] = sec_cls(**parsed)
        cfg = cls(**kwargs, source_path=source_path)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path, overrides: list[str] = ()) -> "RunConfig":
        path = Path(path)
        # strict=True rejects duplicate sections and keys
        parser = configparser.ConfigParser(interpolation=None, strict=True)
        parser.optionxform = str  # keys are case-sensitive (A_g)
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file {path}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
        data = {s: dict(parser.items(s)) for s in parser.sections()}
        for item in overrides:
            key, sep, value = item.partition("=")
            sec, dot, name = key.strip().partition(".")
            if not sep or not dot:
                raise ConfigurationError(f"override must look like section.key=value, got {item!r}")
            data.setdefault(sec, {})[name] = value.strip()
        return cls.from_mapping(data, source_path=str(path))

    def validate(self):
        if self.model.scenario not in SCENARIOS:
            raise ConfigurationError(f"[model] scenario must be one of {sorted(SCENARIOS)}")
        if self.model.discharge not in ("grass", "mpm"):
            raise ConfigurationError("[model] discharge must be 'grass' or 'mpm'")
        if self.mesh.domain and len(self.mesh.domain) != 2:
            raise ConfigurationError("[mesh] domain needs exactly two numbers")
        if any(k < 1 for k in self.mesh.resolutions):
            raise ConfigurationError("[mesh] resolutions must be positive")
        for spec in self.scheme.study_fluctuations:
            parse_fluctuation(spec)
        if self.output.snapshot_interval < 0:
            raise ConfigurationError("[output] snapshot_interval must be >= 0")
        if self.time.timing_calls < 1 or self.time.warmup_calls < 0:
            raise ConfigurationError("[time] timing_calls must be >= 1 and warmup_calls >= 0")
        # build the pieces once so that value errors surface here, not mid-run
        try:
            self.params()
            self.semidiscretization()
        except ParameterError as exc:
            raise ConfigurationError(f"[model] {exc}") from None
        self.time_config()

    # -- derived objects --------------------------------------------------

    def params(self) -> SveParams:
        m = self.model
        law = Grass(m.A_g) if m.discharge == "grass" else MPM(m.d_s, m.theta_c)
        return SveParams(
            g=m.g, r=m.r, porosity=m.porosity, manning_n=m.manning_n,
            discharge=law, rho_f=m.rho_f, h_min=m.h_min,
        )

    def scenario(self) -> Scenario:
        return SCENARIOS[self.model.scenario](self.params())

    def semidiscretization(self, elements: int | None = None, volume: str | None = None,
                           quad_points: int | None = None, surface: str | None = None) -> Semidiscretization:
        sc = self.scenario()
        domain = self.mesh.domain or sc.domain
        s = self.scheme
        return Semidiscretization(
            lgl_basis(self.mesh.degree),
            uniform_mesh(domain, elements or self.mesh.elements),
            sc.params,
            volume=volume or s.volume,
            quad_points=quad_points or s.quad_points,
            surface=surface or s.surface,
            dissipation=s.dissipation,
            source=sc.source,
            strict_paper_blend=s.strict_paper_blend,
        )

    def time_config(self) -> TimeIntegrationConfig:
        t = self.time
        # an explicit dt takes precedence over the default CFL factor
        cfl = None if t.dt is not None else t.cfl
        return TimeIntegrationConfig(
            t_end=t.t_end, method=t.method, dt=t.dt, cfl=cfl,
            callback_interval=t.callback_interval, callback_time=t.callback_time,
        )


_SECTION_TYPES = {
    "mesh": MeshConfig,
    "model": ModelConfig,
    "scheme": SchemeConfig,
    "time": TimeConfig,
    "output": OutputConfig,
}


def parse_fluctuation(spec: str) -> tuple[str, int]:
    """``closed_form`` or ``quadrature:<n>`` -> (volume, quad_points)."""
    name, _, n = spec.partition(":")
    if name == "closed_form" and not n:
        return "closed_form", 3
    if name == "quadrature":
        try:
            return "quadrature", int(n or 3)
        except ValueError:
            pass
    raise ConfigurationError(f"unknown fluctuation {spec!r}; use closed_form or quadrature:<n>")
