"""YAML run configuration: schema, unit conversion and default tracking.

See the README for the full grammar. Dimensional values are strings with a
unit suffix; dimensionless values are plain numbers. Unknown keys are
rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Any, Optional

import yaml
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, ValidationError, model_validator

from . import model as m
from .exceptions import ConfigError
from .model import DriveConfig, InteractionParams, ModelConfig, SpeciesParams, off_resonant_scattering
from .pulses import PulseTrain
from .units import (
    fmt_c3,
    fmt_density,
    fmt_frequency,
    fmt_time,
    parse_c3,
    parse_density,
    parse_frequency,
    parse_time,
)

Frequency = Annotated[float, BeforeValidator(parse_frequency), PlainSerializer(fmt_frequency, return_type=str)]
Time = Annotated[float, BeforeValidator(parse_time), PlainSerializer(fmt_time, return_type=str)]
C3 = Annotated[float, BeforeValidator(parse_c3), PlainSerializer(fmt_c3, return_type=str)]
Density = Annotated[float, BeforeValidator(parse_density), PlainSerializer(fmt_density, return_type=str)]
Fraction = Annotated[float, Field(ge=0.0, le=1.0)]

COMMANDS = ("simulate", "fluorescence", "spectrum", "delay-scan", "pulse-scan", "fit-cross", "budget", "tstar")


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PulsesBlock(_Block):
    t_pulse: Optional[Time] = None
    t_dark: Time = 0.0
    delay: Time = 0.0
    n_pulses: int = Field(1, ge=0)
    always_on: bool = False

    @model_validator(mode="after")
    def _need_width(self):
        if not self.always_on and not (self.t_pulse and self.t_pulse > 0):
            raise ValueError("pulsed drive needs t_pulse > 0 (or always_on: true)")
        return self

    def build(self) -> PulseTrain:
        if self.always_on:
            return PulseTrain.continuous()
        return PulseTrain(self.t_pulse, self.t_dark, self.delay, self.n_pulses)


class DriveBlock(_Block):
    omega: Optional[Frequency] = None
    delta: Frequency = 0.0
    omega1: Optional[Frequency] = None
    omega2: Optional[Frequency] = None
    delta_int: Optional[Frequency] = None
    gamma_5p: Frequency = m.GAMMA_5P
    pulses: Optional[PulsesBlock] = None

    @model_validator(mode="after")
    def _rabi(self):
        single = (self.omega1, self.omega2, self.delta_int)
        if self.omega is None and None in single:
            raise ValueError("give omega, or all of omega1, omega2, delta_int")
        if self.delta_int is not None and self.delta_int == 0:
            raise ValueError("delta_int must be nonzero")
        return self


class SpeciesBlock(_Block):
    label: str = "pump"
    gamma0: Frequency = m.GAMMA0
    gamma_np: Optional[Frequency] = None
    b1: Fraction = m.B1
    b2: Fraction = m.B2
    b3: Fraction = m.B3
    gamma_d: Optional[Frequency] = None
    initial_fraction: Optional[Fraction] = None
    drive: DriveBlock

    @model_validator(mode="after")
    def _branching(self):
        if self.b1 + self.b2 > 1.0:
            raise ValueError("b1 + b2 must not exceed 1")
        return self


class InteractionsBlock(_Block):
    c3_self: C3 = m.C3_SELF
    c3_cross: C3 = m.C3_CROSS
    rho0: Density = m.RHO0


class ModelBlock(_Block):
    species: list[SpeciesBlock] = Field(min_length=1, max_length=2)
    interactions: InteractionsBlock = Field(default_factory=InteractionsBlock)
    probe_fraction: Fraction = m.PROBE_FRACTION


class RunBlock(_Block):
    t_end: Optional[Time] = None
    tol: float = Field(1e-9, gt=0)


class SpectrumBlock(_Block):
    points: int = Field(61, ge=7)
    span: Optional[Frequency] = None
    refine: bool = False


class DelayScanBlock(_Block):
    delays: list[Time] = Field(min_length=1)


class PulseScanBlock(_Block):
    t_pulses: list[Time] = Field(min_length=1)
    total_exposure: Time
    t_dark: Optional[Time] = None


class FitCrossBlock(_Block):
    observed: str
    bounds: tuple[C3, C3] = (0.0, 2 * 3.141592653589793 * 20e6)
    xatol: Optional[C3] = None


class BudgetBlock(_Block):
    omega: Frequency
    delta: Frequency
    b_nl: float = Field(gt=0, le=1)
    tau0: Time
    n_atoms: float = Field(ge=1)
    a_factor: float = Field(100.0, ge=1)
    gamma0: Optional[Frequency] = None
    draws: int = Field(100_000, ge=1)


class TStarBlock(_Block):
    table: str
    omega: Frequency
    delta: Frequency
    n_atoms: list[float] = Field(min_length=1)
    tau0_room: Time


class RunConfigFile(_Block):
    model: Optional[ModelBlock] = None
    run: RunBlock = Field(default_factory=RunBlock)
    spectrum: SpectrumBlock = Field(default_factory=SpectrumBlock)
    delay_scan: Optional[DelayScanBlock] = None
    pulse_scan: Optional[PulseScanBlock] = None
    fit_cross: Optional[FitCrossBlock] = None
    budget: Optional[BudgetBlock] = None
    tstar: Optional[TStarBlock] = None
    seed: int = Field(0, ge=0)


@dataclass
class RunConfig:
    """Validated configuration plus the physical model built from it."""

    file: RunConfigFile
    model: ModelConfig | None
    source: Path | None = None
    defaults: dict[str, Any] = field(default_factory=dict)
    derived: dict[str, Any] = field(default_factory=dict)

    def echo(self) -> dict:
        return self.file.model_dump(mode="json")

    def base_dir(self) -> Path:
        return self.source.parent if self.source else Path.cwd()


def _collect_defaults(obj: BaseModel, prefix: str, out: dict):
    for name in type(obj).model_fields:
        value = getattr(obj, name)
        path = f"{prefix}{name}"
        if name not in obj.model_fields_set:
            if isinstance(value, BaseModel):
                out[path] = value.model_dump(mode="json")
            elif value is not None:
                out[path] = type(obj).__pydantic_serializer__.to_python(obj, mode="json", include={name})[name]
            continue
        if isinstance(value, BaseModel):
            _collect_defaults(value, path + ".", out)
        elif isinstance(value, list):
            for i, v in enumerate(value):
                if isinstance(v, BaseModel):
                    _collect_defaults(v, f"{path}[{i}].", out)


def _node_line(root, loc) -> int | None:
    """1-based source line of the YAML node addressed by a pydantic error path."""
    node = root
    line = None
    for key in loc:
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == key:
                    nxt = v
                    line = k.start_mark.line + 1
                    break
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
    if node is not None:
        line = node.start_mark.line + 1
    return line


def build_model(block: ModelBlock, derived: dict) -> ModelConfig:
    n = len(block.species)
    species, drives, fractions = [], [], []
    for i, sb in enumerate(block.species):
        path = f"model.species[{i}]"
        d = sb.drive
        envelope = d.pulses.build() if d.pulses else PulseTrain.continuous()
        if d.omega is None:
            drive = DriveConfig.from_single_photon(d.omega1, d.omega2, d.delta_int, d.delta, envelope)
            derived[f"{path}.drive.omega"] = fmt_frequency(drive.omega)
        else:
            drive = DriveConfig(d.omega, d.delta, envelope, d.omega1, d.omega2, d.delta_int)
        gamma_np = sb.gamma_np
        if gamma_np is None:
            gamma_np = sb.gamma0 / 2.0
            derived[f"{path}.gamma_np"] = fmt_frequency(gamma_np)
        gamma_d = sb.gamma_d
        if gamma_d is None:
            gamma_d = off_resonant_scattering(d.omega1, d.delta_int, d.gamma_5p) if (
                d.omega1 is not None and d.delta_int is not None) else 0.0
            derived[f"{path}.gamma_d"] = fmt_frequency(gamma_d)
        species.append(SpeciesParams(sb.gamma0, gamma_np, sb.b1, sb.b2, sb.b3, gamma_d, sb.label))
        drives.append(drive)
        if sb.initial_fraction is None:
            f = 1.0 if n == 1 else (1.0 - block.probe_fraction if i == 0 else block.probe_fraction)
            derived[f"{path}.initial_fraction"] = f
        else:
            f = sb.initial_fraction
        fractions.append(f)
    ib = block.interactions
    return ModelConfig(tuple(species), tuple(drives), InteractionParams(ib.c3_self, ib.c3_cross, ib.rho0), tuple(fractions))


def parse_config(text: str, source: Path | None = None) -> RunConfig:
    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ConfigError(f"YAML parse error: {exc.problem}", line=mark.line + 1 if mark else None) from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", line=1)
    try:
        cfg = RunConfigFile.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = tuple(err["loc"])
        path = ".".join(f"[{p}]" if isinstance(p, int) else str(p) for p in loc).replace(".[", "[")
        msg = err["msg"]
        if err["type"] == "extra_forbidden":
            msg = f"unknown key {loc[-1]!r}"
        raise ConfigError(msg, field=path or None, line=_node_line(root, loc)) from None

    defaults: dict = {}
    _collect_defaults(cfg, "", defaults)
    derived: dict = {}
    model = build_model(cfg.model, derived) if cfg.model else None
    return RunConfig(cfg, model, source, defaults, derived)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", field=str(path)) from None
    return parse_config(text, path)
