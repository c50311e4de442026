import math

import numpy as np
import pytest

from rydberg_avalanche import dynamics as d
from rydberg_avalanche import model as m
from rydberg_avalanche.exceptions import ConfigError, IntegrationError
from rydberg_avalanche.pulses import PulseTrain

TP = m.TWO_PI
US = 1e-6
SP = m.SpeciesParams()


def single(omega=0.0, delta=0.0, envelope=None, **kw):
    return m.single_species_config(omega, delta, envelope, **kw)


def closed_species():
    # no population leaves the three levels
    return m.SpeciesParams(b1=0.82, b2=0.18, b3=1.0)


class TestRhs:
    def test_ground_state_without_drive_is_stationary(self):
        assert np.all(d.rhs_self((1.0, 0.0, 0.0), 0.0, single()) == 0.0)

    def test_pure_decay_rates(self):
        ng, nr, nn = d.rhs_self((0.0, 1.0, 0.0), 0.0, single())
        assert ng == pytest.approx(SP.gamma0 * SP.b1)
        assert nr == pytest.approx(-SP.gamma0)
        assert nn == pytest.approx(SP.b2 * SP.gamma0)

    def test_conservation_deficit(self):
        state = (0.6, 0.1, 0.05)
        cfg = single(TP * 50e3, TP * 30e3)
        total = d.rhs_self(state, 0.0, cfg).sum()
        expected = SP.gamma0 * state[1] * (SP.b1 + SP.b2 - 1) + SP.gamma_np * state[2] * (SP.b3 - 1)
        assert total == pytest.approx(expected, rel=1e-12)
        assert total < 0

    def test_species_count_checked(self):
        with pytest.raises(ConfigError):
            d.rhs_self((1, 0, 0, 0, 0, 0), 0.0, m.pump_probe_config(1.0, 1.0))
        with pytest.raises(ConfigError):
            d.rhs_cross((1, 0, 0), 0.0, single())

    def test_drive_off_outside_pulse(self):
        cfg = single(TP * 50e3, envelope=PulseTrain(10 * US, 10 * US, 0.0, 1))
        on = d.rhs_self((1.0, 0.0, 0.0), 5 * US, cfg)
        off = d.rhs_self((1.0, 0.0, 0.0), 15 * US, cfg)
        assert on[1] > 0
        assert np.all(off == 0.0)

    def test_decoupled_limit_matches_two_self_models(self):
        inter = m.InteractionParams(c3_cross=0.0)
        cfg = m.pump_probe_config(TP * 20e3, TP * 14e3, TP * 90e3, interactions=inter)
        state = np.array([0.7, 1e-3, 2e-4, 0.2, 4e-4, 1e-4])
        both = d.rhs_cross(state, 0.0, cfg)
        a = d.rhs_self(state[:3], 0.0, single(TP * 20e3, 0.0, interactions=inter, fraction=0.75))
        b = d.rhs_self(state[3:], 0.0, single(TP * 14e3, TP * 90e3, interactions=inter, fraction=0.25))
        np.testing.assert_allclose(both, np.concatenate([a, b]), rtol=1e-14, atol=0)

    def test_pump_pollutants_broaden_probe_exactly(self):
        cfg = m.pump_probe_config(0.0, TP * 14e3)
        nnp_pump = 3e-3
        state = (0.7, 0.0, nnp_pump, 0.25, 0.0, 0.0)
        # on resonance with an empty Rydberg level dN18S/dt = ng * omega^2 / gamma
        rate = d.rhs_cross(state, 0.0, cfg)[4]
        gamma2 = 0.25 * (TP * 14e3) ** 2 / rate
        inter = cfg.interactions
        assert gamma2 - SP.gamma0 == pytest.approx(inter.c3_cross * inter.rho0 * nnp_pump, rel=1e-12)


class TestIntegrate:
    def test_constant_without_drive(self):
        traj = d.integrate(single(), 50 * US)
        np.testing.assert_array_equal(traj.states, np.tile([1.0, 0.0, 0.0], (traj.times.size, 1)))

    def test_pure_decay_is_exponential(self):
        tol = 1e-10
        traj = d.integrate(single(), 40 * US, tol, y0=(0.0, 1.0, 0.0))
        exact = np.exp(-SP.gamma0 * traj.times)
        np.testing.assert_allclose(traj.column("n18s"), exact, rtol=100 * tol, atol=1e-12)

    def test_samples_resolve_every_pulse(self):
        cfg = single(TP * 60e3, envelope=PulseTrain(5 * US, 15 * US, 0.0, 3))
        traj = d.integrate(cfg, d.default_t_end(cfg))
        assert np.all(np.diff(traj.times) > 0)
        for k in range(3):
            inside = (traj.times > k * 20 * US) & (traj.times < k * 20 * US + 5 * US)
            assert inside.sum() >= 20

    def test_resonant_overshoot(self):
        traj = d.integrate(single(TP * 140e3), 30 * US)
        nr = traj.column("n18s")
        i = int(np.argmax(nr))
        assert 0 < i < nr.size - 1
        assert nr[i] > nr[-1] * 1.1
        assert traj.times[i] < 0.2 * 30 * US

    def test_probe_ground_loss_with_only_pump_driven(self):
        gd = m.off_resonant_scattering(TP * 5e6, TP * 240e6)
        probe = m.SpeciesParams(gamma_d=gd, label="probe")
        base = m.pump_probe_config(TP * 20e3, 0.0)
        cfg = m.ModelConfig((base.species[0], probe), base.drives, base.interactions, base.initial_fractions)
        traj = d.integrate(cfg, 200 * US, 1e-10)
        np.testing.assert_allclose(traj.column("ng", 1), 0.25 * np.exp(-gd * traj.times), rtol=1e-8)
        assert np.all(traj.column("n18s", 1) == 0.0)
        assert np.all(traj.column("nnp", 1) == 0.0)

    def test_three_level_form_ignores_gamma_d(self):
        cfg = single(0.0, species=m.SpeciesParams(gamma_d=1e4))
        assert d.final_state(cfg, 100 * US)[0] == 1.0

    @pytest.mark.parametrize(
        "cfg",
        [
            single(TP * 140e3),
            single(TP * 66e3, TP * 200e3, PulseTrain(10 * US, 20 / m.GAMMA0, 0.0, 5)),
            m.pump_probe_config(TP * 20e3, TP * 14e3, TP * 150e3),
            m.pump_probe_config(TP * 20e3, TP * 15e3, 0.0, PulseTrain(30 * US, 90 * US, 0.0, 4),
                                PulseTrain(30 * US, 90 * US, 40 * US, 4)),
        ],
    )
    def test_positivity_and_monotone_total(self, cfg):
        tol = 1e-9
        t_end = 300 * US if cfg.drives[0].envelope.always_on else d.default_t_end(cfg)
        traj = d.integrate(cfg, t_end, tol)
        assert traj.min_component >= -1e-9
        assert np.all(traj.states >= 0)
        assert np.all(np.diff(traj.total) <= 10 * tol)

    def test_matches_independent_scipy_solution(self):
        cfg = m.pump_probe_config(TP * 20e3, TP * 15e3, TP * 60e3, PulseTrain(30 * US, 90 * US, 0.0, 4),
                                  PulseTrain(30 * US, 90 * US, 20 * US, 4))
        t_end = d.default_t_end(cfg)
        a = d.integrate(cfg, t_end, 1e-10, atol=1e-14)
        b = d.integrate(cfg, t_end, 1e-11, atol=1e-15, method="DOP853")
        np.testing.assert_allclose(a.states, b.states, rtol=1e-7, atol=1e-12)

    def test_decoupled_run_matches_independent_runs(self):
        tol = 1e-9
        inter = m.InteractionParams(c3_cross=0.0)
        env = PulseTrain(20 * US, 20 * US, 0.0, 3)
        cfg = m.pump_probe_config(TP * 20e3, TP * 14e3, TP * 80e3, env, env, interactions=inter)
        t_end = d.default_t_end(cfg)
        both = d.integrate(cfg, t_end, tol)
        a = d.integrate(single(TP * 20e3, 0.0, env, interactions=inter, fraction=0.75), t_end, tol)
        b = d.integrate(single(TP * 14e3, TP * 80e3, env, interactions=inter, fraction=0.25), t_end, tol)
        np.testing.assert_allclose(both.states, np.hstack([a.states, b.states]), rtol=0, atol=10 * tol)

    def test_time_translation_by_one_period(self):
        tol = 1e-10
        period = 40 * US
        base = single(TP * 66e3, 0.0, PulseTrain(10 * US, 30 * US, 0.0, 6))
        # start from the state after a few periods, near the periodic response
        y_ps = d.final_state(base, 3 * period, tol)
        cfg_a = single(TP * 66e3, 0.0, PulseTrain(10 * US, 30 * US, 3 * period, 2))
        cfg_b = single(TP * 66e3, 0.0, PulseTrain(10 * US, 30 * US, 4 * period, 2))
        a = d.integrate(cfg_a, 5 * period, tol, t_start=3 * period, y0=y_ps)
        b = d.integrate(cfg_b, 6 * period, tol, t_start=4 * period, y0=y_ps)
        np.testing.assert_allclose(a.times + period, b.times, rtol=1e-12)
        np.testing.assert_allclose(a.states, b.states, rtol=0, atol=10 * tol)

    def test_rk4_fourth_order(self):
        # weakly driven and detuned: smooth, far from the stability edge
        cfg = single(TP * 20e3, TP * 100e3)
        t_end = 20 * US
        ref = d.final_state(cfg, t_end, 1e-12, atol=1e-15)
        errs = []
        for step in (0.2 * US, 0.1 * US):
            y = d.final_state(cfg, t_end, method="rk4", step=step)
            errs.append(np.max(np.abs(y - ref)))
        assert 8 <= errs[0] / errs[1] <= 32

    def test_frozen_linewidth_steady_state(self):
        sp = closed_species()
        omega = TP * 60e3
        cfg = single(omega, species=sp, interactions=m.InteractionParams(c3_self=0.0, c3_cross=0.0))
        # constant R: solve dN18S = 0 and dNnP = 0 with total population 1
        r = m.excitation_rate(sp.gamma0, omega, 0.0)
        ratio_r = r / (r + sp.gamma0)
        ratio_n = sp.b2 * sp.gamma0 * ratio_r / sp.gamma_np
        ng = 1.0 / (1.0 + ratio_r + ratio_n)
        exact = np.array([ng, ng * ratio_r, ng * ratio_n])
        y = d.final_state(cfg, 2e-3, 1e-11, atol=1e-14)
        np.testing.assert_allclose(y, exact, rtol=0, atol=1e-6)

    def test_lossy_frozen_linewidth_drains(self):
        cfg = single(TP * 60e3, interactions=m.InteractionParams(c3_self=0.0, c3_cross=0.0))
        y = d.final_state(cfg, 5e-3)
        assert y.sum() < 1e-6

    def test_step_budget_exhaustion_reports_time(self, monkeypatch):
        monkeypatch.setattr(d, "MAX_STEPS", 5)
        with pytest.raises(IntegrationError) as info:
            d.integrate(single(TP * 140e3), 30 * US)
        assert info.value.time is not None and 0 <= info.value.time < 30 * US
        assert info.value.exit_code == 3

    def test_negative_population_is_a_failure(self):
        with pytest.raises(IntegrationError):
            d.integrate(single(), 1e-3, y0=(0.0, 1.0, 0.0), method="rk4", step=1e-4)

    def test_bad_arguments(self):
        with pytest.raises(ConfigError):
            d.integrate(single(), 0.0)
        with pytest.raises(ConfigError):
            d.integrate(single(), 1.0, tol=0.0)
        with pytest.raises(ConfigError):
            d.integrate(single(), 1.0, method="rk4")
        with pytest.raises(ConfigError):
            d.default_t_end(single())


class TestFluorescence:
    def test_zero_trace(self):
        traj = d.integrate(single(), 10 * US)
        assert np.all(d.fluorescence_trace(traj) == 0.0)

    def test_single_species_is_normalised_rydberg_population(self):
        traj = d.integrate(single(TP * 80e3), 20 * US)
        nr = traj.column("n18s")
        np.testing.assert_allclose(d.fluorescence_trace(traj), nr / nr.max(), rtol=1e-15)
        assert d.fluorescence_trace(traj).max() == 1.0

    def test_peak_early_in_resonant_pulse(self):
        t_pulse = 20 * US
        cfg = single(TP * 140e3, envelope=PulseTrain(t_pulse, 0.0, 0.0, 1))
        traj = d.integrate(cfg, t_pulse)
        trace = d.fluorescence_trace(traj)
        assert traj.times[np.argmax(trace)] < 0.2 * t_pulse


def test_trajectory_helpers():
    cfg = m.pump_probe_config(TP * 20e3, TP * 14e3)
    traj = d.integrate(cfg, 10 * US)
    assert traj.column_names()[:3] == ["pump_ng", "pump_n18s", "pump_nnp"]
    pump, probe = traj.state(0)
    assert pump.ng == 0.75 and probe.ng == 0.25
    assert traj.final.shape == (6,)
    assert math.isclose(traj.total[0], 1.0)
