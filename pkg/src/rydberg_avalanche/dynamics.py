"""Mean-field rate equations for one (3 populations) or two (6 populations)
driven species.

State vectors are laid out species by species as ``(n_g, n_18s, n_np)``, each
a fraction of the total atom number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from . import _dopri
from .exceptions import ConfigError, IntegrationError
from .model import ModelConfig
from .pulses import envelope_at

DEFAULT_TOL = 1e-9
DEFAULT_ATOL = 1e-12
SAMPLES_PER_SEGMENT = 24
NEGATIVE_LIMIT = -1e-6
MAX_STEPS = 5_000_000
COMPONENTS = ("ng", "n18s", "nnp")


class PopulationState(NamedTuple):
    ng: float
    n18s: float
    nnp: float


def _kernel(config: ModelConfig, gates):
    """Build ``f(t, y)`` for a fixed set of drive gates.

    Pollutant fractions are clamped at zero inside the linewidth so that
    round-off negatives never produce a linewidth below gamma0.
    """
    inter = config.interactions
    rho_self = inter.c3_self * inter.rho0
    rho_cross = inter.c3_cross * inter.rho0
    sp = config.species
    om = [d.omega * g for d, g in zip(config.drives, gates)]
    de = [d.delta for d in config.drives]

    if config.n_species == 1:
        (s,) = sp
        g0, gnp, b1, b2, b3 = s.gamma0, s.gamma_np, s.b1, s.b2, s.b3
        om2 = om[0] * om[0]
        d4 = 4.0 * de[0] * de[0]

        def f(t, y):
            ng, nr, nn = y
            gam = g0 + rho_self * (nn if nn > 0.0 else 0.0)
            r = gam * om2 / (d4 + gam * gam)
            exc = (ng - nr) * r
            return [
                -exc + g0 * b1 * nr + gnp * b3 * nn,
                exc - g0 * nr,
                b2 * g0 * nr - gnp * nn,
            ]

        return f

    p, q = sp
    pg0, pgnp, pb1, pb2, pb3, pgd = p.gamma0, p.gamma_np, p.b1, p.b2, p.b3, p.gamma_d
    qg0, qgnp, qb1, qb2, qb3, qgd = q.gamma0, q.gamma_np, q.b1, q.b2, q.b3, q.gamma_d
    om2a, om2b = om[0] * om[0], om[1] * om[1]
    d4a, d4b = 4.0 * de[0] * de[0], 4.0 * de[1] * de[1]

    def f(t, y):
        g1, r1, n1, g2, r2, n2 = y
        n1c = n1 if n1 > 0.0 else 0.0
        n2c = n2 if n2 > 0.0 else 0.0
        gam1 = pg0 + rho_self * n1c + rho_cross * n2c
        gam2 = qg0 + rho_self * n2c + rho_cross * n1c
        ra = gam1 * om2a / (d4a + gam1 * gam1)
        rb = gam2 * om2b / (d4b + gam2 * gam2)
        e1 = (g1 - r1) * ra
        e2 = (g2 - r2) * rb
        return [
            -e1 + pb1 * pg0 * r1 + pb3 * pgnp * n1 - pgd * g1,
            e1 - pg0 * r1,
            pb2 * pg0 * r1 - pgnp * n1,
            -e2 + qb1 * qg0 * r2 + qb3 * qgnp * n2 - qgd * g2,
            e2 - qg0 * r2,
            qb2 * qg0 * r2 - qgnp * n2,
        ]

    return f


def _gates(config: ModelConfig, t: float):
    return [envelope_at(d.envelope, t) for d in config.drives]


def rhs_self(state, t: float, config: ModelConfig) -> np.ndarray:
    """Time derivative of the three-population self-broadening model."""
    if config.n_species != 1:
        raise ConfigError("self-broadening model needs exactly one species", field="species")
    return np.asarray(_kernel(config, _gates(config, t))(t, tuple(state)), dtype=float)


def rhs_cross(state, t: float, config: ModelConfig) -> np.ndarray:
    """Time derivative of the six-population cross-broadening model."""
    if config.n_species != 2:
        raise ConfigError("cross-broadening model needs exactly two species", field="species")
    return np.asarray(_kernel(config, _gates(config, t))(t, tuple(state)), dtype=float)


def initial_state(config: ModelConfig) -> np.ndarray:
    y = np.zeros(3 * config.n_species)
    y[0::3] = config.initial_fractions
    return y


def breakpoints(config: ModelConfig, t_start: float, t_end: float) -> list[float]:
    """Segment boundaries: every pulse edge of every drive, plus the ends."""
    pts = {t_start, t_end}
    for d in config.drives:
        pts.update(d.envelope.edges(t_start, t_end))
    pts = sorted(pts)
    scale = max(abs(t_end), abs(t_start), 1e-300)
    out = [pts[0]]
    for p in pts[1:]:
        if p - out[-1] > 1e-12 * scale:
            out.append(p)
    out[-1] = t_end
    return out


@dataclass(frozen=True)
class Trajectory:
    """Sampled populations; ``states[i]`` is the full state at ``times[i]``."""

    times: np.ndarray
    states: np.ndarray
    config: ModelConfig
    min_component: float = 0.0

    @property
    def n_species(self) -> int:
        return self.config.n_species

    def column(self, name: str, species: int = 0) -> np.ndarray:
        return self.states[:, 3 * species + COMPONENTS.index(name)]

    def state(self, i: int) -> tuple[PopulationState, ...]:
        row = self.states[i]
        return tuple(PopulationState(*row[3 * k : 3 * k + 3]) for k in range(self.n_species))

    @property
    def total(self) -> np.ndarray:
        return self.states.sum(axis=1)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def column_names(self) -> list[str]:
        return [f"{lab}_{c}" for lab in self.config.labels for c in COMPONENTS]


def _check_negative(y, t):
    m = float(np.min(y))
    if m < NEGATIVE_LIMIT:
        raise IntegrationError(f"population component fell to {m:.3e}", time=t)
    return m


def _packed(config: ModelConfig):
    """Arrays consumed by the compiled right-hand side."""
    n = config.n_species
    sp = np.array([[s.gamma0, s.gamma_np, s.b1, s.b2, s.b3, s.gamma_d if n == 2 else 0.0]
                   for s in config.species])
    inter = config.interactions
    rho = np.array([inter.c3_self * inter.rho0, inter.c3_cross * inter.rho0])
    d4 = np.array([4.0 * d.delta * d.delta for d in config.drives])
    om2 = np.array([d.omega * d.omega for d in config.drives])
    return sp, rho, om2, d4


def _rk4_segment(f, a, b, y, step):
    n = max(1, math.ceil((b - a) / step - 1e-9))
    h = (b - a) / n
    y = np.array(y, dtype=float)
    t = a
    for _ in range(n):
        k1 = np.asarray(f(t, y))
        k2 = np.asarray(f(t + h / 2, y + h / 2 * k1))
        k3 = np.asarray(f(t + h / 2, y + h / 2 * k2))
        k4 = np.asarray(f(t + h, y + h * k3))
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def integrate(
    config: ModelConfig,
    t_end: float,
    tol: float = DEFAULT_TOL,
    *,
    atol: float = DEFAULT_ATOL,
    method: str = "dopri5",
    step: float | None = None,
    samples_per_segment: int = SAMPLES_PER_SEGMENT,
    t_start: float = 0.0,
    y0=None,
) -> Trajectory:
    """Integrate the rate equations from ``t_start`` to ``t_end``.

    The integrator restarts at every pulse edge so the drive is smooth on
    each segment. ``method`` is ``"dopri5"`` (compiled Dormand-Prince 5(4),
    the default), any explicit scheme accepted by
    :func:`scipy.integrate.solve_ivp` (``"DOP853"``, ``"RK45"``, ...), or
    ``"rk4"`` for a fixed-step classical RK4 with step ``step`` (rounded down
    so segments are hit exactly).

    With ``samples_per_segment == 0`` only the segment end points are kept.
    """
    if not t_end > t_start:
        raise ConfigError("t_end must be after t_start", field="t_end")
    if not tol > 0:
        raise ConfigError("tol must be > 0", field="tol")
    if method == "rk4" and not (step and step > 0):
        raise ConfigError("rk4 needs a positive step", field="step")

    y = initial_state(config) if y0 is None else np.array(y0, dtype=float)
    if method == "dopri5":
        sp, rho, om2_full, d4 = _packed(config)
        h = 0.0
    edges = breakpoints(config, t_start, t_end)
    times = [t_start]
    states = [y.copy()]
    lowest = float(np.min(y))

    for a, b in zip(edges[:-1], edges[1:]):
        gates = _gates(config, 0.5 * (a + b))
        if samples_per_segment > 0:
            t_eval = np.linspace(a, b, samples_per_segment + 2)
        else:
            t_eval = np.array([a, b])

        if method == "dopri5":
            om2 = om2_full * np.array(gates, dtype=float)
            ys, status, t_last, h = _dopri.segment(y, t_eval, sp, rho, om2, d4, tol, atol, h, MAX_STEPS)
            if status != _dopri.OK:
                why = "step size underflow" if status == _dopri.STEP_UNDERFLOW else "step budget exhausted"
                raise IntegrationError(why, time=float(t_last))
            ys = ys[1:]
        elif method == "rk4":
            f = _kernel(config, gates)
            seg = [y]
            for t0, t1 in zip(t_eval[:-1], t_eval[1:]):
                seg.append(_rk4_segment(f, t0, t1, seg[-1], step))
            ys = np.array(seg[1:])
        else:
            f = _kernel(config, gates)
            sol = solve_ivp(f, (a, b), y, method=method, rtol=tol, atol=atol, t_eval=t_eval)
            if sol.status != 0:
                t_fail = float(sol.t[-1]) if sol.t.size else a
                raise IntegrationError(sol.message, time=t_fail)
            ys = sol.y.T[1:]

        lowest = min(lowest, _check_negative(ys, b))
        times.extend(t_eval[1:])
        states.extend(ys)
        y = ys[-1].copy()

    states = np.clip(np.array(states), 0.0, None)
    return Trajectory(np.array(times), states, config, min_component=lowest)


def final_state(config: ModelConfig, t_end: float, tol: float = DEFAULT_TOL, **kw) -> np.ndarray:
    """Clamped state at ``t_end`` without dense sampling."""
    kw.setdefault("samples_per_segment", 0)
    return integrate(config, t_end, tol, **kw).final


def fluorescence_trace(traj: Trajectory) -> np.ndarray:
    """Total Rydberg population, normalised to a unit maximum."""
    total = traj.states[:, 1::3].sum(axis=1)
    peak = total.max() if total.size else 0.0
    if peak <= 0:
        return np.zeros_like(total)
    return total / peak


def drive_window(config: ModelConfig) -> float:
    """Latest pulse end over all pulsed drives (``inf`` if all are continuous)."""
    ends = [d.envelope.end_time for d in config.drives if not d.envelope.always_on]
    return max(ends) if ends else math.inf


def default_t_end(config: ModelConfig) -> float:
    """End of the last full pulse period over all pulsed drives."""
    ends = [d.envelope.cycle_end for d in config.drives if not d.envelope.always_on]
    if not ends:
        raise ConfigError("continuous drive needs an explicit t_end", field="t_end")
    return max(ends)
