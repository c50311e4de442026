"""In-silico depletion spectroscopy: detuning sweeps, line-shape fits,
delay and pulse-width scans, and the outer fit of the cross interaction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import minimize_scalar
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .dynamics import DEFAULT_TOL, default_t_end, final_state
from .exceptions import ConfigError, FitError
from .fitting import ExponentialDecayRegressor, LorentzianDipRegressor, half_depth_width
from .model import TWO_PI, ModelConfig, steady_state_width
from .pulses import PulseTrain

GRID_POINTS = 61
GRID_SPAN_WIDTHS = 5.0
FOURIER_FWHM = 0.886


@dataclass(frozen=True)
class Spectrum:
    """Remaining probe-ground fraction versus probe detuning (rad/s)."""

    detunings: np.ndarray
    signal: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.detunings, dtype=float)
        if d.size > 1 and np.any(np.diff(d) <= 0):
            raise ConfigError("detunings must be strictly increasing", field="detunings")


@dataclass(frozen=True)
class LorentzianFit:
    center: float
    fwhm: float
    amplitude: float
    offset: float
    residual_norm: float
    converged: bool
    errors: dict = field(default_factory=dict)

    @property
    def fwhm_err(self) -> float:
        return self.errors.get("fwhm", math.nan)


@dataclass(frozen=True)
class RateFit:
    rate: float
    rate_err: float
    amplitude: float
    offset: float


@dataclass(frozen=True)
class DelayScanResult:
    delays: np.ndarray
    widths: np.ndarray
    width_errors: np.ndarray
    converged: np.ndarray
    fits: tuple = ()


@dataclass(frozen=True)
class PulseWidthPoint:
    t_pulse: float
    n_pulses: int
    width: float
    width_err: float
    fourier_floor: float
    converged: bool


def _parallel(n_jobs):
    return Parallel(n_jobs=n_jobs) if n_jobs not in (None, 1) else None


def _map(fn, items, n_jobs=1):
    par = _parallel(n_jobs)
    if par is None:
        return [fn(*it) for it in items]
    return par(delayed(fn)(*it) for it in items)


def fourier_floor(t_pulse: float) -> float:
    """FWHM (rad/s) of the sinc^2 power spectrum of a rectangular pulse."""
    return TWO_PI * FOURIER_FWHM / t_pulse


def expected_width(config: ModelConfig) -> float:
    """Steady-state self-broadened width of the probe transition (rad/s)."""
    i = config.probe_index
    return steady_state_width(
        config.species[i], config.interactions, config.drives[i].omega, config.initial_fractions[i]
    )


def default_grid(config: ModelConfig, n_points: int = GRID_POINTS, span: float | None = None) -> np.ndarray:
    """Symmetric detuning grid around the probe detuning."""
    if span is None:
        span = GRID_SPAN_WIDTHS * expected_width(config)
    return np.linspace(-span, span, n_points)


def simulate_depletion(config: ModelConfig, delta_probe: float, t_end: float | None = None, tol: float = DEFAULT_TOL) -> float:
    """Fraction of the probe ground population left at ``t_end``."""
    i = config.probe_index
    n0 = config.initial_fractions[i]
    if n0 <= 0:
        raise ConfigError("probe species has no initial ground population", field="initial_fractions")
    cfg = config.with_drive(i, delta=float(delta_probe))
    if t_end is None:
        t_end = default_t_end(cfg)
    y = final_state(cfg, t_end, tol)
    return float(np.clip(y[3 * i] / n0, 0.0, 1.0))


def sweep_spectrum(
    config: ModelConfig,
    delta_grid=None,
    t_end: float | None = None,
    tol: float = DEFAULT_TOL,
    n_jobs: int = 1,
) -> Spectrum:
    """One independent depletion run per probe detuning."""
    grid = default_grid(config) if delta_grid is None else np.asarray(delta_grid, dtype=float)
    if grid.size < 7:
        raise ConfigError(f"detuning grid needs at least 7 points, got {grid.size}", field="delta_grid")
    signal = _map(simulate_depletion, [(config, d, t_end, tol) for d in grid], n_jobs)
    meta = {"t_end": t_end, "tol": tol, "probe": config.labels[config.probe_index]}
    return Spectrum(grid, np.array(signal, dtype=float), meta)


def fit_lorentzian(spec: Spectrum, **kw) -> LorentzianFit:
    m = LorentzianDipRegressor(**kw).fit(spec.detunings, spec.signal)
    names = ("offset", "amplitude", "center", "fwhm")
    return LorentzianFit(
        center=float(m.center_),
        fwhm=float(m.fwhm_),
        amplitude=float(m.amplitude_),
        offset=float(m.offset_),
        residual_norm=m.residual_norm_,
        converged=m.converged_,
        errors=dict(zip(names, map(float, m.errors_))),
    )


def resonant_rate_fit(times, ground_fractions) -> RateFit:
    """Exponential decay rate (1/s) of a resonant depletion curve."""
    m = ExponentialDecayRegressor().fit(np.asarray(times, dtype=float), np.asarray(ground_fractions, dtype=float))
    return RateFit(float(m.rate_), float(m.rate_err_), float(m.amplitude_), float(m.offset_))


def resonant_rate_from_amplitude(fit: LorentzianFit, t_exposure: float) -> float:
    """Unsaturated resonant rate estimate: depleted fraction per unit exposure."""
    return fit.amplitude / t_exposure


def with_relative_delay(config: ModelConfig, delay: float, pump: int = 0, probe: int | None = None) -> ModelConfig:
    """Place the probe train ``delay`` after the pump train.

    Negative delays are realised by delaying the pump instead, so no train
    starts before ``t = 0``.
    """
    if probe is None:
        probe = config.probe_index
    pe = config.drives[pump].envelope
    qe = config.drives[probe].envelope
    if pe.always_on or qe.always_on:
        raise ConfigError("delay scans need pulsed pump and probe drives", field="envelope")
    d_pump = pe.delay
    d_probe = pe.delay + delay
    shift = -min(d_pump, d_probe, 0.0)
    cfg = config.with_drive(pump, envelope=replace(pe, delay=d_pump + shift))
    return cfg.with_drive(probe, envelope=replace(qe, delay=d_probe + shift))


def _width_at_delay(config, delay, delta_grid, t_end, tol):
    cfg = with_relative_delay(config, delay)
    spec = sweep_spectrum(cfg, delta_grid, t_end, tol)
    return fit_lorentzian(spec)


def delay_scan(
    config: ModelConfig,
    delays,
    delta_grid=None,
    t_end: float | None = None,
    tol: float = DEFAULT_TOL,
    n_jobs: int = 1,
) -> DelayScanResult:
    """Fitted probe width (rad/s) for each pump-probe delay (s)."""
    delays = np.asarray(delays, dtype=float)
    grid = default_grid(config) if delta_grid is None else np.asarray(delta_grid, dtype=float)
    fits = _map(_width_at_delay, [(config, d, grid, t_end, tol) for d in delays], n_jobs)
    return DelayScanResult(
        delays=delays,
        widths=np.array([f.fwhm for f in fits]),
        width_errors=np.array([f.fwhm_err for f in fits]),
        converged=np.array([f.converged for f in fits]),
        fits=tuple(fits),
    )


def refined_grid(config: ModelConfig, t_end=None, tol=DEFAULT_TOL, n_points=GRID_POINTS, passes=4, n_jobs=1) -> np.ndarray:
    """Grid of ``n_points`` spanning five half-depth widths of the actual dip.

    Starts from the steady-state width estimate and narrows or widens from
    coarse sweeps until the dip is resolved.
    """
    span = GRID_SPAN_WIDTHS * expected_width(config)
    for _ in range(passes):
        spec = sweep_spectrum(config, np.linspace(-span, span, 31), t_end, tol, n_jobs)
        w = half_depth_width(spec.detunings, spec.signal)
        step = 2 * span / 30
        new_span = GRID_SPAN_WIDTHS * max(w, step / 4)
        if 0.5 < new_span / span < 2.0:
            span = new_span
            break
        span = new_span
    return np.linspace(-span, span, n_points)


def pulse_width_scan(
    config: ModelConfig,
    t_pulses,
    total_exposure: float,
    t_dark: float | None = None,
    delta_grid=None,
    tol: float = DEFAULT_TOL,
    n_jobs: int = 1,
) -> list[PulseWidthPoint]:
    """Self-broadened width versus pulse width at fixed total exposure.

    ``t_dark`` defaults to 20 Rydberg lifetimes. Without an explicit
    ``delta_grid`` the grid is refined per pulse width.
    """
    if config.n_species != 1:
        raise ConfigError("pulse-width scans use a single species", field="species")
    if t_dark is None:
        t_dark = 20.0 / config.species[0].gamma0
    out = []
    for tp in t_pulses:
        n = max(1, int(round(total_exposure / tp)))
        cfg = config.with_drive(0, envelope=PulseTrain(t_pulse=tp, t_dark=t_dark, n_pulses=n))
        t_end = default_t_end(cfg)
        grid = refined_grid(cfg, t_end, tol, n_jobs=n_jobs) if delta_grid is None else delta_grid
        fit = fit_lorentzian(sweep_spectrum(cfg, grid, t_end, tol, n_jobs))
        out.append(PulseWidthPoint(tp, n, fit.fwhm, fit.fwhm_err, fourier_floor(tp), fit.converged))
    return out


class CrossInteractionEstimator(RegressorMixin, BaseEstimator):
    """Fit the cross interaction strength to an observed delay scan.

    ``fit(delays, widths, sigma)`` minimises the weighted squared width
    mismatch over ``c3_cross`` with bounded Brent minimisation, every
    objective evaluation being a full simulated delay scan. ``predict``
    returns model widths at the fitted value.

    Parameters
    ----------
    config : ModelConfig
        Pump-probe configuration with pulsed drives; every parameter except
        ``c3_cross`` is held fixed.
    bounds : tuple of float
        Search interval for ``c3_cross`` in rad/s * um^3.
    delta_grid : array-like, optional
        Probe detunings for every simulated spectrum.
    xatol : float, optional
        Absolute tolerance on ``c3_cross``; defaults to 1e-4 of the bracket.

    Attributes
    ----------
    c3_cross_ : float
    c3_cross_err_ : float
        Curvature-based one-sigma uncertainty.
    at_bound_ : bool
        True when the minimum sits on an end of ``bounds``.
    chi2_ : float
    n_evaluations_ : int
    """

    def __init__(self, config=None, bounds=(0.0, TWO_PI * 20e6), delta_grid=None, t_end=None,
                 tol=1e-8, xatol=None, n_jobs=1):
        self.config = config
        self.bounds = bounds
        self.delta_grid = delta_grid
        self.t_end = t_end
        self.tol = tol
        self.xatol = xatol
        self.n_jobs = n_jobs

    def _model_widths(self, c3, delays):
        cfg = self.config.with_interactions(c3_cross=float(c3))
        return delay_scan(cfg, delays, self._grid, self.t_end, self.tol, self.n_jobs).widths

    def objective(self, c3, delays, widths, sigma):
        r = (self._model_widths(c3, delays) - widths) / sigma
        val = float(r @ r)
        if not math.isfinite(val):
            raise FitError(f"non-finite objective at c3_cross = {c3:.6g}")
        return val

    def fit(self, X, y, sigma=None):
        if self.config is None:
            raise ConfigError("estimator needs a model configuration", field="config")
        delays = np.asarray(X, dtype=float).reshape(-1)
        widths = np.asarray(y, dtype=float).reshape(-1)
        if delays.size < 4:
            raise FitError(f"need at least 4 delays, got {delays.size}")
        if widths.size != delays.size:
            raise FitError("one width per delay required")
        sigma = np.ones_like(widths) if sigma is None else np.asarray(sigma, dtype=float).reshape(-1)
        if np.any(sigma <= 0):
            raise FitError("width uncertainties must be > 0")
        lo, hi = map(float, self.bounds)
        if not (0 <= lo < hi):
            raise ConfigError("bounds must satisfy 0 <= lo < hi", field="bounds")

        self._grid = default_grid(self.config) if self.delta_grid is None else np.asarray(self.delta_grid, float)
        xatol = self.xatol if self.xatol is not None else 1e-4 * (hi - lo)
        self.n_evaluations_ = 0
        cache = {}

        def chi2(c):
            c = float(c)
            if c not in cache:
                self.n_evaluations_ += 1
                cache[c] = self.objective(c, delays, widths, sigma)
            return cache[c]

        res = minimize_scalar(chi2, bounds=(lo, hi), method="bounded", options={"xatol": xatol})
        c = float(res.x)
        # the bounded Brent search never evaluates the end points themselves
        for edge in (lo, hi):
            if chi2(edge) < chi2(c):
                c = edge
        self.c3_cross_ = c
        self.chi2_ = chi2(c)
        self.at_bound_ = bool(min(c - lo, hi - c) <= 2 * xatol)

        h = max(1e-2 * abs(c), 1e-3 * (hi - lo))
        if c - h >= lo:
            curv = (chi2(c + h) - 2 * self.chi2_ + chi2(c - h)) / h**2
        else:
            curv = (chi2(c + 2 * h) - 2 * chi2(c + h) + self.chi2_) / h**2
        self.c3_cross_err_ = math.sqrt(2.0 / curv) if curv > 0 else math.inf
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "c3_cross_")
        return self._model_widths(self.c3_cross_, np.asarray(X, dtype=float).reshape(-1))


def estimate_c3_cross(observed: DelayScanResult, config: ModelConfig, bounds, **kw) -> CrossInteractionEstimator:
    sigma = observed.width_errors
    if sigma is None or not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
        sigma = None
    return CrossInteractionEstimator(config, bounds, **kw).fit(observed.delays, observed.widths, sigma)
