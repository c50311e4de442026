"""Coherence budget for stroboscopic dressing and the cryogenic operating point."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import ConfigError, DomainError

T_STAR_XTOL = 0.01


@dataclass(frozen=True)
class DressingScenario:
    """One off-resonant dressing configuration.

    ``omega``, ``delta`` and ``gamma0`` are angular (rad/s); ``tau0`` is the
    Rydberg lifetime in seconds and ``a_factor`` the dark time in units of
    ``tau0``.
    """

    omega: float
    delta: float
    b_nl: float
    tau0: float
    n_atoms: float
    a_factor: float = 100.0
    gamma0: float | None = None

    def __post_init__(self):
        if self.delta == 0:
            raise DomainError("dressing detuning must be nonzero")
        if not 0 < self.b_nl <= 1:
            raise ConfigError("b_nl must lie in (0, 1]", field="b_nl")
        if not self.tau0 > 0:
            raise ConfigError("tau0 must be > 0", field="tau0")
        if not self.n_atoms >= 1:
            raise ConfigError("n_atoms must be >= 1", field="n_atoms")
        if not self.a_factor >= 1:
            raise ConfigError("a_factor must be >= 1", field="a_factor")
        if not self.omega > 0:
            raise ConfigError("omega must be > 0", field="omega")

    @property
    def contamination_rate(self) -> float:
        """Rate (1/s) at which the ensemble produces its first contaminant."""
        return self.n_atoms * (self.omega / (2 * self.delta)) ** 2 * self.b_nl / self.tau0

    @property
    def gamma(self) -> float:
        return self.gamma0 if self.gamma0 is not None else 1.0 / self.tau0


def n_critical(omega: float, delta: float, b_nl: float) -> float:
    """Atom number at which the first-contaminant time equals the lifetime."""
    if delta == 0:
        raise DomainError("dressing detuning must be nonzero")
    if omega == 0 or b_nl <= 0:
        raise DomainError("omega and b_nl must be nonzero")
    # ratio form: exact for delta an integer multiple of omega
    return 4 * (delta / omega) ** 2 / b_nl


def tau_c(s: DressingScenario) -> float:
    """Mean waiting time (s) until the first contaminant atom appears."""
    return s.tau0 * n_critical(s.omega, s.delta, s.b_nl) / s.n_atoms


def dressed_interaction(omega: float, delta: float) -> float:
    """Short-distance dressed interaction ``omega**4 / (8 delta**3)``; the sign follows ``delta``."""
    if delta == 0:
        raise DomainError("dressing detuning must be nonzero")
    return omega**4 / (8 * delta**3)


def stroboscopic_bound(s: DressingScenario) -> float:
    """Time-averaged interaction available when pulsing below ``tau_c``."""
    u = dressed_interaction(s.omega, s.delta)
    ratio = n_critical(s.omega, s.delta, s.b_nl) / s.n_atoms
    return u * ratio / (s.a_factor + ratio)


def duty_cycle_bound(s: DressingScenario) -> float:
    tc = tau_c(s)
    return tc / (tc + s.a_factor * s.tau0)


def fourier_atom_bound(delta: float, gamma0: float, n_crit: float) -> float:
    """Atom-number ceiling ``n_crit * delta / gamma0`` for Fourier-safe pulses."""
    if gamma0 <= 0:
        raise DomainError("gamma0 must be > 0")
    if delta == 0 or n_crit == 0:
        raise DomainError("delta and n_crit must be nonzero")
    return n_crit * abs(delta) / gamma0


class FirstContaminantSample(NamedTuple):
    mean: float
    rate: float
    counts: np.ndarray
    bin_edges: np.ndarray
    draws: np.ndarray


def sample_first_contaminant(s: DressingScenario, draws: int, seed=0, n_shards: int = 1, bins: int = 50) -> FirstContaminantSample:
    """Seeded exponential waiting times for the first contaminant.

    The draw count may be split over ``n_shards`` independent streams spawned
    from ``seed``; the result depends on ``seed`` and ``n_shards`` only.
    Histogram bins cover ``[0, 10 / rate)``.
    """
    if draws < 1:
        raise ConfigError("draws must be >= 1", field="draws")
    rate = s.contamination_rate
    children = np.random.SeedSequence(seed).spawn(n_shards) if n_shards > 1 else [np.random.SeedSequence(seed)]
    sizes = [draws // n_shards + (1 if k < draws % n_shards else 0) for k in range(len(children))]
    parts = [np.random.default_rng(ss).exponential(1.0 / rate, n) for ss, n in zip(children, sizes)]
    x = np.concatenate(parts)
    counts, edges = np.histogram(x, bins=bins, range=(0.0, 10.0 / rate))
    return FirstContaminantSample(float(x.mean()), rate, counts, edges, x)


@dataclass(frozen=True)
class TemperatureTable:
    """Tabulated blackbody-dependent branching ratio and lifetime."""

    temperature: np.ndarray
    b_nl: np.ndarray
    tau0: np.ndarray
    label: str = ""

    def __post_init__(self):
        T = np.asarray(self.temperature, dtype=float)
        b = np.asarray(self.b_nl, dtype=float)
        tau = np.asarray(self.tau0, dtype=float)
        object.__setattr__(self, "temperature", T)
        object.__setattr__(self, "b_nl", b)
        object.__setattr__(self, "tau0", tau)
        if not (T.size == b.size == tau.size):
            raise ConfigError("table columns differ in length", field="temperature")
        if T.size < 3:
            raise ConfigError("temperature table needs at least 3 rows", field="temperature")
        if np.any(np.diff(T) <= 0):
            raise ConfigError("temperatures must be strictly increasing", field="temperature_K")
        if np.any(np.diff(b) < 0):
            raise ConfigError("b_nl must be nondecreasing in temperature", field="b_nl")
        if np.any(np.diff(tau) > 0):
            raise ConfigError("tau0 must be nonincreasing in temperature", field="tau0_s")
        if np.any(b <= 0) or np.any(tau <= 0):
            raise ConfigError("b_nl and tau0 must be positive", field="b_nl")

    def b_nl_at(self, T):
        return np.interp(T, self.temperature, self.b_nl)

    def tau0_at(self, T):
        return np.interp(T, self.temperature, self.tau0)

    @classmethod
    def from_csv(cls, path, label=""):
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            need = {"temperature_K", "b_nl", "tau0_s"}
            if reader.fieldnames is None or not need <= set(reader.fieldnames):
                raise ConfigError(f"temperature table needs columns {sorted(need)}", field=str(path))
            try:
                rows = [(float(r["temperature_K"]), float(r["b_nl"]), float(r["tau0_s"])) for r in reader]
            except ValueError as exc:
                raise ConfigError(f"non-numeric table entry: {exc}", field=str(path)) from None
        T, b, tau = map(np.array, zip(*rows)) if rows else ([], [], [])
        return cls(T, b, tau, label)


class TStar(NamedTuple):
    temperature: float | None
    at_bound: bool


def t_star_residual(table: TemperatureTable, n_atoms: float, tau0_room: float, T):
    """``tau0(T) / (b_nl(T) N) - tau0_room``; positive below the crossover.

    The common factor ``4 delta**2 / omega**2`` of both sides cancels.
    """
    return table.tau0_at(T) / (table.b_nl_at(T) * n_atoms) - tau0_room


def t_star_n(table: TemperatureTable, omega: float, delta: float, n_atoms: float, tau0_room: float,
             xtol: float = T_STAR_XTOL) -> TStar:
    """Temperature at which the first-contaminant time of ``n_atoms`` atoms
    equals the room-temperature single-atom scattering time.

    ``omega`` and ``delta`` are validated but cancel from the condition.
    Returns ``temperature=None`` when even the coldest tabulated point fails,
    and the hottest point with ``at_bound=True`` when every tabulated point
    passes.
    """
    if delta == 0 or omega == 0:
        raise DomainError("omega and delta must be nonzero")
    if tau0_room <= 0:
        raise DomainError("tau0_room must be > 0")
    lo, hi = float(table.temperature[0]), float(table.temperature[-1])
    f = lambda T: float(t_star_residual(table, n_atoms, tau0_room, T))
    if f(lo) < 0:
        return TStar(None, False)
    if f(hi) >= 0:
        return TStar(hi, True)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return TStar(0.5 * (lo + hi), False)


def zero_temperature_threshold(table: TemperatureTable, tau0_room: float) -> float:
    """Atom number above which no tabulated temperature is cold enough."""
    return float(table.tau0[0] / (table.b_nl[0] * tau0_room))


@dataclass(frozen=True)
class MitigationBudget:
    tau_c: float
    n_c: float
    u: float
    u_star: float
    u_ratio: float
    duty_cycle: float
    fourier_ceiling: float
    n_over_ceiling: float
    t_star: TStar | None = None
    small_detuning: bool = False

    def report(self) -> str:
        twopi = 2 * math.pi
        lines = [
            f"tau_c_s = {self.tau_c:.6e}",
            f"N_c = {self.n_c:.6e}",
            f"U_hz = {self.u / twopi:.6e}",
            f"U_star_hz = {self.u_star / twopi:.6e}",
            f"U_star_over_U = {self.u_ratio:.6e}",
            f"duty_cycle_max = {self.duty_cycle:.6e}",
            f"fourier_ceiling_N = {self.fourier_ceiling:.6e}",
            f"N_over_ceiling = {self.n_over_ceiling:.6e}",
        ]
        if self.t_star is not None:
            t = "none" if self.t_star.temperature is None else f"{self.t_star.temperature:.4f}"
            lines.append(f"T_star_K = {t}")
            lines.append(f"T_star_at_bound = {str(self.t_star.at_bound).lower()}")
        lines.append(f"small_detuning_warning = {str(self.small_detuning).lower()}")
        return "\n".join(lines) + "\n"


def mitigation_budget(s: DressingScenario, table: TemperatureTable | None = None,
                      tau0_room: float | None = None) -> MitigationBudget:
    nc = n_critical(s.omega, s.delta, s.b_nl)
    u = dressed_interaction(s.omega, s.delta)
    us = stroboscopic_bound(s)
    ceiling = fourier_atom_bound(s.delta, s.gamma, nc)
    ts = None
    if table is not None:
        ts = t_star_n(table, s.omega, s.delta, s.n_atoms, tau0_room if tau0_room is not None else s.tau0)
    return MitigationBudget(
        tau_c=tau_c(s),
        n_c=nc,
        u=u,
        u_star=us,
        u_ratio=us / u,
        duty_cycle=duty_cycle_bound(s),
        fourier_ceiling=ceiling,
        n_over_ceiling=s.n_atoms / ceiling,
        t_star=ts,
        small_detuning=abs(s.delta) < 2 * s.omega,
    )
