"""Parsing of unit-suffixed quantities.

Files carry ordinary frequencies (``"45 kHz"``); the engine works with
angular rates, so every frequency is multiplied by 2*pi on the way in and
divided on the way out. Bare numbers are rejected for dimensional
quantities.
"""

from __future__ import annotations

import math
import re

TWO_PI = 2.0 * math.pi

_NUM = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"

FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ns": 1e-9}
VOLUME_SUFFIXES = ("um3", "um^3", "µm3", "µm^3", "μm3", "μm^3")
DENSITY_SUFFIXES = ("um-3", "um^-3", "/um3", "/um^3", "µm-3", "μm-3", "µm^-3", "μm^-3")


def _split(text, what):
    if isinstance(text, bool) or not isinstance(text, str):
        raise ValueError(f"{what} needs an explicit unit suffix, got {text!r}")
    m = re.fullmatch(r"\s*" + _NUM + r"\s*(.*?)\s*", text)
    if not m:
        raise ValueError(f"cannot parse {what} {text!r}")
    return float(m.group(1)), m.group(2).replace("*", " ").split()


def parse_frequency(text) -> float:
    """``"45 kHz"`` -> angular rate in rad/s."""
    value, unit = _split(text, "frequency")
    if len(unit) != 1 or unit[0].lower() not in FREQ_UNITS:
        raise ValueError(f"frequency {text!r} needs a unit among hz/khz/mhz/ghz")
    return TWO_PI * value * FREQ_UNITS[unit[0].lower()]


def parse_time(text) -> float:
    """``"30 us"`` -> seconds."""
    value, unit = _split(text, "time")
    if len(unit) != 1 or unit[0].lower() not in TIME_UNITS:
        raise ValueError(f"time {text!r} needs a unit among s/ms/us/ns")
    return value * TIME_UNITS[unit[0].lower()]


def parse_c3(text) -> float:
    """``"35 MHz um3"`` -> rad/s * um^3."""
    value, unit = _split(text, "interaction strength")
    if len(unit) != 2 or unit[0].lower() not in FREQ_UNITS or unit[1].lower() not in VOLUME_SUFFIXES:
        raise ValueError(f"interaction strength {text!r} must look like '35 MHz um3'")
    return TWO_PI * value * FREQ_UNITS[unit[0].lower()]


def parse_density(text) -> float:
    """``"14.9 um-3"`` -> atoms per um^3."""
    value, unit = _split(text, "density")
    if len(unit) != 1 or unit[0].lower() not in DENSITY_SUFFIXES:
        raise ValueError(f"density {text!r} must look like '14.9 um-3'")
    return value


def fmt_frequency(omega: float) -> str:
    return f"{omega / TWO_PI:.12g} Hz"


def fmt_time(t: float) -> str:
    return f"{t:.12g} s"


def fmt_c3(c3: float) -> str:
    return f"{c3 / TWO_PI:.12g} Hz um3"


def fmt_density(rho: float) -> str:
    return f"{rho:.12g} um-3"
