import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rydberg_avalanche import model as m
from rydberg_avalanche.exceptions import ConfigError, DomainError

TP = m.TWO_PI
SP = m.SpeciesParams()
INTER = m.InteractionParams()


def test_defaults_match_quoted_values():
    assert SP.gamma0 == pytest.approx(TP * 45e3)
    assert 1 / SP.gamma_np == pytest.approx(7.07e-6, rel=1e-3)
    assert (SP.b1, SP.b2, SP.b3) == (0.49, 0.18, 0.55)
    assert INTER.c3_self == pytest.approx(TP * 35e6)
    assert INTER.c3_cross == pytest.approx(TP * 3.5e6)
    assert m.LATTICE_SPACING_UM ** -3 == pytest.approx(INTER.rho0, rel=1e-2)


def test_dephasing_rate_no_pollutants():
    assert m.dephasing_rate(SP, INTER, 0.0, 0.0) == SP.gamma0


def test_dephasing_rate_worked_value():
    gamma = m.dephasing_rate(SP, INTER, 1e-3)
    # 45 kHz + 35 MHz um3 * 14.9 um-3 * 1e-3
    assert gamma / TP == pytest.approx(45e3 + 35e6 * 14.9e-3, rel=1e-12)
    assert gamma / TP == pytest.approx(566.5e3, rel=1e-4)


def test_dephasing_rate_linear_in_self_fraction():
    g1 = m.dephasing_rate(SP, INTER, 2e-4) - SP.gamma0
    g2 = m.dephasing_rate(SP, INTER, 4e-4) - SP.gamma0
    assert g2 == pytest.approx(2 * g1, rel=1e-12)


def test_dephasing_rate_cross_term():
    g = m.dephasing_rate(SP, INTER, 0.0, 1e-2)
    assert g - SP.gamma0 == pytest.approx(INTER.c3_cross * INTER.rho0 * 1e-2, rel=1e-12)


@pytest.mark.parametrize("bad", [(-1e-3, 0.0), (0.0, -1e-9), (1.5, 0.0)])
def test_dephasing_rate_rejects_non_fractions(bad):
    with pytest.raises(DomainError):
        m.dephasing_rate(SP, INTER, *bad)


def test_excitation_rate_resonant_value():
    r = m.excitation_rate(TP * 45e3, TP * 14e3, 0.0)
    assert r == pytest.approx((TP * 14e3) ** 2 / (TP * 45e3), rel=1e-12)
    assert r == pytest.approx(2.74e4, rel=2e-3)


def test_excitation_rate_half_maximum_at_half_width():
    g, om = TP * 450e3, TP * 20e3
    r0 = m.excitation_rate(g, om, 0.0)
    assert m.excitation_rate(g, om, g / 2) == pytest.approx(r0 / 2, rel=1e-12)
    assert m.excitation_rate(g, om, -g / 2) == pytest.approx(r0 / 2, rel=1e-12)


@pytest.mark.parametrize("gamma", [0.0, -1.0])
def test_excitation_rate_rejects_nonpositive_width(gamma):
    with pytest.raises(DomainError):
        m.excitation_rate(gamma, 1.0, 0.0)


@given(
    gamma=st.floats(1e2, 1e8),
    omega=st.floats(0, 1e7),
    delta=st.floats(-1e8, 1e8),
)
def test_excitation_rate_even_and_quadratic(gamma, omega, delta):
    r = m.excitation_rate(gamma, omega, delta)
    assert r == m.excitation_rate(gamma, omega, -delta)
    assert m.excitation_rate(gamma, 2 * omega, delta) == pytest.approx(4 * r, rel=1e-12, abs=1e-300)
    assert r <= m.excitation_rate(gamma, omega, 0.0) * (1 + 1e-12)


@given(
    a=st.floats(0, 0.5),
    b=st.floats(0, 0.5),
    da=st.floats(0, 0.5),
)
def test_dephasing_rate_monotone_and_floored(a, b, da):
    g = m.dephasing_rate(SP, INTER, a, b)
    assert g >= SP.gamma0
    assert m.dephasing_rate(SP, INTER, a + da, b) >= g
    assert m.dephasing_rate(SP, INTER, a, b + da) >= g


def test_two_photon_rabi_calibration_point():
    om = m.two_photon_rabi(TP * 10e6, TP * 25e6, TP * 240e6)
    assert om / TP == pytest.approx(0.52e6, rel=2e-3)
    assert m.two_photon_rabi(0.0, TP * 25e6, TP * 240e6) == 0.0
    assert m.two_photon_rabi(1.0, 1.0, -4.0) == m.two_photon_rabi(1.0, 1.0, 4.0)
    assert m.two_photon_rabi(1.0, 1.0, 8.0) == pytest.approx(m.two_photon_rabi(1.0, 1.0, 4.0) / 2)
    with pytest.raises(DomainError):
        m.two_photon_rabi(1.0, 1.0, 0.0)


def test_off_resonant_scattering():
    gd = m.off_resonant_scattering(TP * 10e6, TP * 240e6, TP * 6e6)
    assert gd / TP == pytest.approx(2.6e3, rel=1e-2)
    assert m.off_resonant_scattering(0.0, TP * 240e6) == 0.0
    assert m.off_resonant_scattering(2.0, 3.0) == pytest.approx(4 * m.off_resonant_scattering(1.0, 3.0))
    with pytest.raises(DomainError):
        m.off_resonant_scattering(1.0, 0.0)


def test_effective_beta():
    assert m.effective_beta([]) == 0.0
    beta = m.effective_beta([(INTER.c3_self, SP.b2, SP.gamma_np)])
    # the 2 pi of C3 and of Gamma_nP cancel: 35e6 * 0.18 / 22.5e3
    assert beta == pytest.approx(280.0, rel=1e-12)
    terms = [(1.0, 0.1, 2.0), (3.0, 0.2, 4.0)]
    assert m.effective_beta(terms) == pytest.approx(sum(m.effective_beta([t]) for t in terms))
    with pytest.raises(DomainError):
        m.effective_beta([(1.0, 0.1, 0.0)])


def test_steady_state_width_scaling():
    w = m.steady_state_width(SP, INTER, TP * 100e3)
    assert w / (TP * 100e3) == pytest.approx(math.sqrt(280 * 14.9), rel=1e-12)
    assert m.steady_state_width(SP, INTER, 0.0) == SP.gamma0


def test_species_invariants():
    with pytest.raises(ConfigError):
        m.SpeciesParams(b1=0.9, b2=0.2)
    with pytest.raises(ConfigError):
        m.SpeciesParams(b3=1.1)
    with pytest.raises(ConfigError):
        m.SpeciesParams(gamma0=-1.0)
    with pytest.raises(ConfigError):
        m.InteractionParams(rho0=-1.0)


def test_drive_consistency_check():
    m.DriveConfig.from_single_photon(TP * 10e6, TP * 25e6, TP * 240e6)
    with pytest.raises(ConfigError):
        m.DriveConfig(omega=TP * 1e6, omega1=TP * 10e6, omega2=TP * 25e6, delta_int=TP * 240e6)
    with pytest.raises(ConfigError):
        m.DriveConfig(omega=-1.0)


def test_model_config_invariants():
    cfg = m.pump_probe_config(1.0, 1.0)
    assert cfg.initial_fractions == (0.75, 0.25)
    assert cfg.probe_index == 1
    assert cfg.labels == ("pump", "probe")
    with pytest.raises(ConfigError):
        m.ModelConfig(cfg.species, cfg.drives, cfg.interactions, (0.8, 0.3))
    with pytest.raises(ConfigError):
        m.ModelConfig(cfg.species, cfg.drives[:1], cfg.interactions, (0.75, 0.25))
    with pytest.raises(ConfigError):
        m.ModelConfig(cfg.species * 2, cfg.drives * 2, cfg.interactions, (0.1,) * 4)


def test_pure_functions_bit_identical():
    args = (SP, INTER, 3.7e-4, 1.1e-3)
    assert m.dephasing_rate(*args) == m.dephasing_rate(*args)
    assert m.excitation_rate(1.234e5, 5.6e4, 7.8e5) == m.excitation_rate(1.234e5, 5.6e4, 7.8e5)
