"""CSV artifacts and the run manifest.

Floats are written with ``repr`` so identical inputs give byte-identical
files. Frequencies are written as ordinary frequencies (Hz).
"""

from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np

from .dynamics import Trajectory, fluorescence_trace
from .exceptions import ConfigError
from .model import TWO_PI
from .spectroscopy import DelayScanResult, LorentzianFit, Spectrum


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_trajectory(path, traj: Trajectory):
    header = ["time_s", *traj.column_names(), "fluorescence"]
    fl = fluorescence_trace(traj)
    rows = (( t, *s, f) for t, s, f in zip(traj.times, traj.states, fl))
    return write_rows(path, header, rows)


def write_fluorescence(path, traj: Trajectory):
    fl = fluorescence_trace(traj)
    return write_rows(path, ["time_s", "fluorescence"], zip(traj.times, fl))


def write_spectrum(path, spec: Spectrum):
    return write_rows(path, ["delta_hz", "remaining_fraction"], zip(spec.detunings / TWO_PI, spec.signal))


def read_spectrum(path) -> Spectrum:
    d, s = _read_columns(path, ["delta_hz", "remaining_fraction"])
    return Spectrum(d * TWO_PI, s)


def write_delay_scan(path, res: DelayScanResult):
    rows = zip(res.delays, res.widths / TWO_PI, res.width_errors / TWO_PI)
    return write_rows(path, ["delay_s", "width_hz", "width_err_hz"], rows)


def read_delay_scan(path) -> DelayScanResult:
    d, w, e = _read_columns(path, ["delay_s", "width_hz", "width_err_hz"])
    return DelayScanResult(d, w * TWO_PI, e * TWO_PI, np.ones(d.size, dtype=bool))


def _read_columns(path, names):
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(names) - set(reader.fieldnames or ())
            if missing:
                raise ConfigError(f"missing columns {sorted(missing)}", field=str(path))
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", field=str(path)) from None
    try:
        return [np.array([float(r[n]) for r in rows]) for n in names]
    except ValueError as exc:
        raise ConfigError(f"non-numeric entry: {exc}", field=str(path)) from None


def lorentzian_report(fit: LorentzianFit) -> str:
    """Parameter/uncertainty pairs in ordinary-frequency units."""
    e = fit.errors
    lines = [
        f"center_hz = {fit.center / TWO_PI:.9e} +- {e.get('center', float('nan')) / TWO_PI:.3e}",
        f"fwhm_hz = {fit.fwhm / TWO_PI:.9e} +- {e.get('fwhm', float('nan')) / TWO_PI:.3e}",
        f"amplitude = {fit.amplitude:.9e} +- {e.get('amplitude', float('nan')):.3e}",
        f"offset = {fit.offset:.9e} +- {e.get('offset', float('nan')):.3e}",
        f"residual_norm = {fit.residual_norm:.6e}",
        f"converged = {str(fit.converged).lower()}",
    ]
    return "\n".join(lines) + "\n"


def write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def versions() -> dict:
    import numba
    import pydantic
    import scipy
    import sklearn

    from . import __version__

    return {
        "rydberg_avalanche": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "numba": numba.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
        "pydantic": pydantic.__version__,
    }


def write_manifest(path, *, command, run_config, seed, wall_time, artifacts, overrides):
    manifest = {
        "command": command,
        "config_path": str(run_config.source) if run_config.source else None,
        "config": run_config.echo(),
        "defaults_injected": run_config.defaults,
        "derived_defaults": run_config.derived,
        "overrides": overrides,
        "seed": seed,
        "versions": versions(),
        "wall_time_s": wall_time,
        "artifacts": [str(Path(a).name) for a in artifacts],
    }
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
