"""Physical parameters and the pointwise broadening/excitation model.

All frequencies and rates are angular (rad/s) internally. Interaction
strengths are in rad/s * um^3 and densities in um^-3, so ``c3 * rho0`` is a
rate in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .exceptions import ConfigError, DomainError
from .pulses import PulseTrain

TWO_PI = 2.0 * math.pi

GAMMA0 = TWO_PI * 45e3
# 20 tau0 ~ 10 / Gamma_nP puts the pollutant lifetime at 2 tau0 = 2 / Gamma0.
GAMMA_NP = GAMMA0 / 2.0
B1 = 0.49
B2 = 0.18
B3 = 0.55
C3_SELF = TWO_PI * 35e6
C3_SELF_ALT = TWO_PI * 34e6
C3_CROSS = TWO_PI * 3.5e6
# one atom per (406 nm)^3 lattice site
RHO0 = 14.9
GAMMA_5P = TWO_PI * 6e6
PROBE_FRACTION = 0.25
LATTICE_SPACING_UM = 0.406


@dataclass(frozen=True)
class SpeciesParams:
    """Decay rates and branching ratios of one ground/Rydberg/pollutant triple."""

    gamma0: float = GAMMA0
    gamma_np: float = GAMMA_NP
    b1: float = B1
    b2: float = B2
    b3: float = B3
    gamma_d: float = 0.0
    label: str = "pump"

    def __post_init__(self):
        for name in ("gamma0", "gamma_np", "gamma_d"):
            if getattr(self, name) < 0:
                raise ConfigError("rate must be >= 0", field=name)
        if not self.gamma0 > 0:
            raise ConfigError("Rydberg linewidth must be > 0", field="gamma0")
        for name in ("b1", "b2", "b3"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"branching ratio {v} outside [0, 1]", field=name)
        if self.b1 + self.b2 > 1.0 + 1e-12:
            raise ConfigError("b1 + b2 exceeds 1", field="b1")


@dataclass(frozen=True)
class InteractionParams:
    c3_self: float = C3_SELF
    c3_cross: float = C3_CROSS
    rho0: float = RHO0

    def __post_init__(self):
        for name in ("c3_self", "c3_cross", "rho0"):
            if getattr(self, name) < 0:
                raise ConfigError("must be >= 0", field=name)


@dataclass(frozen=True)
class DriveConfig:
    """Two-photon drive of one species.

    ``omega1``, ``omega2`` and ``delta_int`` are optional single-photon
    calibration data; when all three are given, ``omega`` must agree with the
    two-photon Rabi frequency they imply.
    """

    omega: float = 0.0
    delta: float = 0.0
    envelope: PulseTrain = field(default_factory=PulseTrain.continuous)
    omega1: float | None = None
    omega2: float | None = None
    delta_int: float | None = None

    def __post_init__(self):
        if self.omega < 0:
            raise ConfigError("Rabi frequency must be >= 0", field="omega")
        if None not in (self.omega1, self.omega2, self.delta_int):
            implied = two_photon_rabi(self.omega1, self.omega2, self.delta_int)
            if abs(implied - self.omega) > 1e-9 * max(abs(implied), abs(self.omega)):
                raise ConfigError(
                    f"omega {self.omega:.9g} inconsistent with omega1*omega2/(2|delta_int|) "
                    f"= {implied:.9g}",
                    field="omega",
                )

    @classmethod
    def from_single_photon(cls, omega1, omega2, delta_int, delta=0.0, envelope=None):
        return cls(
            omega=two_photon_rabi(omega1, omega2, delta_int),
            delta=delta,
            envelope=envelope or PulseTrain.continuous(),
            omega1=omega1,
            omega2=omega2,
            delta_int=delta_int,
        )


@dataclass(frozen=True)
class ModelConfig:
    species: tuple[SpeciesParams, ...]
    drives: tuple[DriveConfig, ...]
    interactions: InteractionParams = field(default_factory=InteractionParams)
    initial_fractions: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "drives", tuple(self.drives))
        object.__setattr__(self, "initial_fractions", tuple(float(f) for f in self.initial_fractions))
        n = len(self.species)
        if n not in (1, 2):
            raise ConfigError(f"species count must be 1 or 2, got {n}", field="species")
        if len(self.drives) != n:
            raise ConfigError("one drive per species required", field="drives")
        if len(self.initial_fractions) != n:
            raise ConfigError("one initial fraction per species required", field="initial_fractions")
        if any(f < 0 for f in self.initial_fractions):
            raise ConfigError("initial fractions must be >= 0", field="initial_fractions")
        if sum(self.initial_fractions) > 1.0 + 1e-12:
            raise ConfigError("initial fractions sum to more than 1", field="initial_fractions")

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.species)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ConfigError(f"no species labelled {label!r}", field="species") from None

    @property
    def probe_index(self) -> int:
        """The species whose ground depletion is the spectroscopic signal."""
        if "probe" in self.labels:
            return self.labels.index("probe")
        return self.n_species - 1

    def with_drive(self, index: int, **changes) -> "ModelConfig":
        drives = list(self.drives)
        drives[index] = replace(drives[index], **changes)
        return replace(self, drives=tuple(drives))

    def with_interactions(self, **changes) -> "ModelConfig":
        return replace(self, interactions=replace(self.interactions, **changes))


def single_species_config(
    omega: float,
    delta: float = 0.0,
    envelope: PulseTrain | None = None,
    species: SpeciesParams | None = None,
    interactions: InteractionParams | None = None,
    fraction: float = 1.0,
) -> ModelConfig:
    """Self-broadening setup with one driven transition."""
    return ModelConfig(
        species=(species or SpeciesParams(label="pump"),),
        drives=(DriveConfig(omega=omega, delta=delta, envelope=envelope or PulseTrain.continuous()),),
        interactions=interactions or InteractionParams(),
        initial_fractions=(fraction,),
    )


def pump_probe_config(
    omega_pump: float,
    omega_probe: float,
    delta_probe: float = 0.0,
    pump_envelope: PulseTrain | None = None,
    probe_envelope: PulseTrain | None = None,
    probe_fraction: float = PROBE_FRACTION,
    interactions: InteractionParams | None = None,
    delta_pump: float = 0.0,
) -> ModelConfig:
    """Cross-broadening setup: a resonant pump and a scanned probe."""
    return ModelConfig(
        species=(SpeciesParams(label="pump"), SpeciesParams(label="probe")),
        drives=(
            DriveConfig(omega=omega_pump, delta=delta_pump, envelope=pump_envelope or PulseTrain.continuous()),
            DriveConfig(omega=omega_probe, delta=delta_probe, envelope=probe_envelope or PulseTrain.continuous()),
        ),
        interactions=interactions or InteractionParams(),
        initial_fractions=(1.0 - probe_fraction, probe_fraction),
    )


def _check_fraction(name, value):
    if value < 0 or value > 1:
        raise DomainError(f"{name} = {value} is not a population fraction")


def dephasing_rate(
    species: SpeciesParams, inter: InteractionParams, nnp_self: float, nnp_other: float = 0.0
) -> float:
    """Mean-field broadened linewidth of a Rydberg transition.

    The pollutant fractions are fractions of the total atom number; the
    other-species term enters through the cross interaction strength.
    """
    _check_fraction("nnp_self", nnp_self)
    _check_fraction("nnp_other", nnp_other)
    return species.gamma0 + inter.rho0 * (inter.c3_self * nnp_self + inter.c3_cross * nnp_other)


def excitation_rate(gamma: float, omega: float, delta: float) -> float:
    """Saturated, broadened excitation rate ``gamma * omega**2 / (4 delta**2 + gamma**2)``."""
    if not gamma > 0:
        raise DomainError(f"linewidth must be > 0, got {gamma}")
    return gamma * omega * omega / (4.0 * delta * delta + gamma * gamma)


def two_photon_rabi(omega1: float, omega2: float, delta_int: float) -> float:
    if delta_int == 0:
        raise DomainError("intermediate detuning must be nonzero")
    return omega1 * omega2 / (2.0 * abs(delta_int))


def off_resonant_scattering(omega1: float, delta_int: float, gamma_5p: float = GAMMA_5P) -> float:
    """Ground-state loss rate from scattering off the intermediate state."""
    if delta_int == 0:
        raise DomainError("intermediate detuning must be nonzero")
    return (omega1 / (2.0 * delta_int)) ** 2 * gamma_5p


def effective_beta(contributions: Iterable[Sequence[float]]) -> float:
    """Effective interaction volume from ``(c3, branching, gamma_np)`` terms.

    Diagnostic only: whether the rad factors of C3 and Gamma_nP cancel
    depends on the caller's convention.
    """
    total = 0.0
    for c3, b, g in contributions:
        if not g > 0:
            raise DomainError(f"pollutant decay rate must be > 0, got {g}")
        total += abs(c3) * b / g
    return total


def steady_state_width(species: SpeciesParams, inter: InteractionParams, omega: float, ground_fraction: float = 1.0) -> float:
    """Steady-state self-broadened width ``omega * sqrt(beta * rho0 * n_g)``.

    ``ground_fraction`` accounts for a driven population that is only a part
    of the total density. Never smaller than ``gamma0``.
    """
    beta = effective_beta([(inter.c3_self, species.b2, species.gamma_np)])
    return max(species.gamma0, omega * math.sqrt(beta * inter.rho0 * ground_fraction))
