"""Rectangular pulse-train envelopes."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import ConfigError


@dataclass(frozen=True)
class PulseTrain:
    """A periodic on/off gate for one drive.

    Pulse ``k`` (``0 <= k < n_pulses``) is on over the half-open window
    ``[delay + k*period, delay + k*period + t_pulse)``.

    Parameters
    ----------
    t_pulse : float
        Pulse width in seconds.
    t_dark : float
        Dark time between pulses in seconds.
    delay : float
        Offset of the first pulse relative to the global clock, in seconds.
    n_pulses : int
        Number of pulses in the train.
    always_on : bool
        Continuous drive; all other fields are ignored.
    """

    t_pulse: float = 0.0
    t_dark: float = 0.0
    delay: float = 0.0
    n_pulses: int = 0
    always_on: bool = False

    def __post_init__(self):
        if self.always_on:
            return
        if not self.t_pulse > 0:
            raise ConfigError("pulse width must be > 0", field="t_pulse")
        if self.t_dark < 0:
            raise ConfigError("dark time must be >= 0", field="t_dark")
        if self.n_pulses < 0 or int(self.n_pulses) != self.n_pulses:
            raise ConfigError("pulse count must be a non-negative integer", field="n_pulses")

    @classmethod
    def continuous(cls) -> "PulseTrain":
        return cls(always_on=True)

    @property
    def period(self) -> float:
        return self.t_pulse + self.t_dark

    @property
    def end_time(self) -> float:
        """End of the last pulse (``inf`` for a continuous drive)."""
        if self.always_on:
            return math.inf
        if self.n_pulses == 0:
            return self.delay
        return self.delay + (self.n_pulses - 1) * self.period + self.t_pulse

    @property
    def cycle_end(self) -> float:
        """End of the last full period, i.e. the last pulse plus its dark time."""
        if self.always_on:
            return math.inf
        return self.delay + self.n_pulses * self.period

    def shifted(self, dt: float) -> "PulseTrain":
        if self.always_on:
            return self
        return PulseTrain(self.t_pulse, self.t_dark, self.delay + dt, self.n_pulses)

    def edges(self, t_start: float, t_end: float) -> list[float]:
        """Switching times strictly inside ``(t_start, t_end)``."""
        if self.always_on:
            return []
        out = []
        for k in range(self.n_pulses):
            on = self.delay + k * self.period
            if on >= t_end:
                break
            off = on + self.t_pulse
            for e in (on, off):
                if t_start < e < t_end:
                    out.append(e)
        return out


def envelope_at(train: PulseTrain, t: float) -> int:
    """Gate value (0 or 1) of ``train`` at time ``t``."""
    if train.always_on:
        return 1
    x = t - train.delay
    if x < 0:
        return 0
    k = math.floor(x / train.period)
    if k >= train.n_pulses:
        return 0
    return 1 if x - k * train.period < train.t_pulse else 0
