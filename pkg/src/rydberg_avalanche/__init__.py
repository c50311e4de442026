"""Mean-field simulation and analysis of blackbody-triggered avalanche
dephasing in driven Rydberg ensembles."""

__version__ = "0.1.0"

from .exceptions import AvalancheError, ConfigError, DomainError, FitError, IntegrationError
from .model import (
    DriveConfig,
    InteractionParams,
    ModelConfig,
    SpeciesParams,
    dephasing_rate,
    effective_beta,
    excitation_rate,
    off_resonant_scattering,
    pump_probe_config,
    single_species_config,
    two_photon_rabi,
)
from .pulses import PulseTrain, envelope_at
from .dynamics import Trajectory, fluorescence_trace, integrate, rhs_cross, rhs_self
from .fitting import ExponentialDecayRegressor, LorentzianDipRegressor
from .spectroscopy import (
    CrossInteractionEstimator,
    Spectrum,
    delay_scan,
    estimate_c3_cross,
    fit_lorentzian,
    pulse_width_scan,
    resonant_rate_fit,
    simulate_depletion,
    sweep_spectrum,
)
from .mitigation import (
    DressingScenario,
    TemperatureTable,
    dressed_interaction,
    fourier_atom_bound,
    mitigation_budget,
    n_critical,
    sample_first_contaminant,
    stroboscopic_bound,
    t_star_n,
    tau_c,
)
