"""Command-line front end.

Usage::

    rydberg-avalanche COMMAND --config PATH [--out DIR] [--seed N] [--threads N] [--tol X]

Exit codes: 0 ok, 2 config, 3 integration, 4 fit, 5 domain.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import dynamics, io, mitigation, spectroscopy
from .config import COMMANDS, RunConfig, load_config
from .exceptions import AvalancheError, ConfigError
from .model import TWO_PI


def _need_model(rc: RunConfig):
    if rc.model is None:
        raise ConfigError("this command needs a 'model' block", field="model")
    return rc.model


def _t_end(rc: RunConfig, model):
    if rc.file.run.t_end is not None:
        return rc.file.run.t_end
    return dynamics.default_t_end(model)


def _grid(rc: RunConfig, model, t_end, tol, n_jobs):
    sb = rc.file.spectrum
    if sb.span is not None:
        return np.linspace(-sb.span, sb.span, sb.points)
    if sb.refine:
        return spectroscopy.refined_grid(model, t_end, tol, sb.points, n_jobs=n_jobs)
    return spectroscopy.default_grid(model, sb.points)


def _resolve(rc: RunConfig, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else rc.base_dir() / p


def cmd_simulate(rc, out, tol, n_jobs, seed):
    model = _need_model(rc)
    traj = dynamics.integrate(model, _t_end(rc, model), tol)
    return [io.write_trajectory(out / "trajectory.csv", traj)]


def cmd_fluorescence(rc, out, tol, n_jobs, seed):
    model = _need_model(rc)
    traj = dynamics.integrate(model, _t_end(rc, model), tol)
    trace = dynamics.fluorescence_trace(traj)
    i = int(np.argmax(trace))
    print(f"peak at t = {traj.times[i]:.6e} s, peak/final = {trace[i] / max(trace[-1], 1e-300):.6g}")
    return [io.write_fluorescence(out / "fluorescence.csv", traj)]


def cmd_spectrum(rc, out, tol, n_jobs, seed):
    model = _need_model(rc)
    t_end = _t_end(rc, model)
    grid = _grid(rc, model, t_end, tol, n_jobs)
    spec = spectroscopy.sweep_spectrum(model, grid, t_end, tol, n_jobs)
    fit = spectroscopy.fit_lorentzian(spec)
    print(f"fwhm = {fit.fwhm / TWO_PI:.6e} Hz (converged: {fit.converged})")
    return [
        io.write_spectrum(out / "spectrum.csv", spec),
        io.write_text(out / "fit_report.txt", io.lorentzian_report(fit)),
    ]


def cmd_delay_scan(rc, out, tol, n_jobs, seed):
    model = _need_model(rc)
    if rc.file.delay_scan is None:
        raise ConfigError("missing 'delay_scan' block", field="delay_scan")
    t_end = rc.file.run.t_end
    grid = _grid(rc, model, t_end, tol, n_jobs)
    res = spectroscopy.delay_scan(model, rc.file.delay_scan.delays, grid, t_end, tol, n_jobs)
    bad = [f"{d:.6e}" for d, ok in zip(res.delays, res.converged) if not ok]
    report = "non_converged_delays_s = " + (", ".join(bad) if bad else "none") + "\n"
    return [
        io.write_delay_scan(out / "delay_scan.csv", res),
        io.write_text(out / "delay_scan_report.txt", report),
    ]


def cmd_pulse_scan(rc, out, tol, n_jobs, seed):
    model = _need_model(rc)
    ps = rc.file.pulse_scan
    if ps is None:
        raise ConfigError("missing 'pulse_scan' block", field="pulse_scan")
    grid = np.linspace(-rc.file.spectrum.span, rc.file.spectrum.span, rc.file.spectrum.points) \
        if rc.file.spectrum.span is not None else None
    pts = spectroscopy.pulse_width_scan(model, ps.t_pulses, ps.total_exposure, ps.t_dark, grid, tol, n_jobs)
    rows = [(p.t_pulse, p.n_pulses, p.width / TWO_PI, p.width_err / TWO_PI, p.fourier_floor / TWO_PI, p.converged)
            for p in pts]
    header = ["t_pulse_s", "n_pulses", "width_hz", "width_err_hz", "fourier_floor_hz", "converged"]
    return [io.write_rows(out / "pulse_scan.csv", header, rows)]


def cmd_fit_cross(rc, out, tol, n_jobs, seed):
    model = _need_model(rc)
    fc = rc.file.fit_cross
    if fc is None:
        raise ConfigError("missing 'fit_cross' block", field="fit_cross")
    observed = io.read_delay_scan(_resolve(rc, fc.observed))
    t_end = rc.file.run.t_end
    grid = _grid(rc, model, t_end, tol, n_jobs)
    est = spectroscopy.estimate_c3_cross(observed, model, fc.bounds, delta_grid=grid, t_end=t_end,
                                         tol=tol, xatol=fc.xatol, n_jobs=n_jobs)
    report = (
        f"c3_cross_hz_um3 = {est.c3_cross_ / TWO_PI:.9e} +- {est.c3_cross_err_ / TWO_PI:.3e}\n"
        f"chi2 = {est.chi2_:.6e}\n"
        f"at_bound = {str(est.at_bound_).lower()}\n"
        f"objective_evaluations = {est.n_evaluations_}\n"
    )
    model_widths = est.predict(observed.delays)
    rows = zip(observed.delays, model_widths / TWO_PI)
    return [
        io.write_text(out / "fit_cross_report.txt", report),
        io.write_rows(out / "fit_cross_model.csv", ["delay_s", "width_hz"], rows),
    ]


def _scenario(b):
    return mitigation.DressingScenario(b.omega, b.delta, b.b_nl, b.tau0, b.n_atoms, b.a_factor, b.gamma0)


def cmd_budget(rc, out, tol, n_jobs, seed):
    b = rc.file.budget
    if b is None:
        raise ConfigError("missing 'budget' block", field="budget")
    s = _scenario(b)
    table = tau0_room = None
    if rc.file.tstar is not None:
        table = mitigation.TemperatureTable.from_csv(_resolve(rc, rc.file.tstar.table))
        tau0_room = rc.file.tstar.tau0_room
    budget = mitigation.mitigation_budget(s, table, tau0_room)
    mc = mitigation.sample_first_contaminant(s, b.draws, seed)
    text = budget.report() + f"monte_carlo_mean_s = {mc.mean:.6e}\nmonte_carlo_draws = {b.draws}\n"
    print(text, end="")
    rows = zip(mc.bin_edges[:-1], mc.bin_edges[1:], mc.counts)
    return [
        io.write_text(out / "budget.txt", text),
        io.write_rows(out / "first_contaminant_hist.csv", ["bin_lo_s", "bin_hi_s", "count"], rows),
    ]


def cmd_tstar(rc, out, tol, n_jobs, seed):
    ts = rc.file.tstar
    if ts is None:
        raise ConfigError("missing 'tstar' block", field="tstar")
    table = mitigation.TemperatureTable.from_csv(_resolve(rc, ts.table))
    rows = []
    for n in ts.n_atoms:
        r = mitigation.t_star_n(table, ts.omega, ts.delta, n, ts.tau0_room)
        rows.append((n, "none" if r.temperature is None else repr(r.temperature), r.at_bound))
    path = out / "tstar.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write("n_atoms,t_star_K,at_bound\n")
        for n, t, b in rows:
            fh.write(f"{n!r},{t},{str(b).lower()}\n")
    return [path]


HANDLERS = {
    "simulate": cmd_simulate,
    "fluorescence": cmd_fluorescence,
    "spectrum": cmd_spectrum,
    "delay-scan": cmd_delay_scan,
    "pulse-scan": cmd_pulse_scan,
    "fit-cross": cmd_fit_cross,
    "budget": cmd_budget,
    "tstar": cmd_tstar,
}
assert set(HANDLERS) == set(COMMANDS)


def build_parser():
    p = argparse.ArgumentParser(prog="rydberg-avalanche", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--threads", type=int, default=1, help="parallel workers, 0 = all cores")
    p.add_argument("--tol", type=float, default=None, help="overrides run.tol")
    return p


def run(command: str, config_path, out="out", seed=None, threads=1, tol=None) -> int:
    """Execute one command; returns the process exit status."""
    t0 = time.perf_counter()
    try:
        if command not in HANDLERS:
            raise ConfigError(f"unknown command {command!r}", field="command")
        rc = load_config(config_path)
        if tol is not None and not tol > 0:
            raise ConfigError("tol must be > 0", field="--tol")
        eff_tol = tol if tol is not None else rc.file.run.tol
        eff_seed = seed if seed is not None else rc.file.seed
        n_jobs = -1 if threads == 0 else threads
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        artifacts = HANDLERS[command](rc, out, eff_tol, n_jobs, eff_seed)
        overrides = {k: v for k, v in {"tol": tol, "seed": seed, "threads": threads}.items() if v is not None}
        io.write_manifest(out / "manifest.json", command=command, run_config=rc, seed=eff_seed,
                          wall_time=time.perf_counter() - t0, artifacts=artifacts, overrides=overrides)
    except AvalancheError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.out, args.seed, args.threads, args.tol)


if __name__ == "__main__":
    sys.exit(main())
