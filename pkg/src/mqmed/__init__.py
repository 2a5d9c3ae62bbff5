"""Mode-resolved dissipation for Markovian master equations.

The package computes population-transfer rate constants and, for every
individual bath component, the matching energy-dissipation rate
coefficients, then propagates both to give per-mode dissipation pathways.
Harmonic (general-linear and local), spin, tabulated-J and generic
finite-dimensional baths are supported, with a dense brute-force oracle
for desk-scale validation.
"""

from .model import (
    Bath,
    GenericMode,
    HarmonicMode,
    LocalHarmonicMode,
    SpectralDensityTable,
    SpinMode,
    SubsystemSpec,
    ThermalSpec,
    beta_from_temperature,
    discretize_spectral_density,
    read_spectral_density_table,
    reorganization_energies,
    unit_convert,
    validate_model,
)
from .correlation import (
    assemble_full_trace,
    generic_trace,
    generic_weighted_trace,
    ho_trace,
    ho_weighted_trace,
    line_broadening,
    spectral_profiles,
    spin_bath_profiles,
    spin_trace,
    spin_weighted_trace,
)
from .quadrature import IntegralResult, QuadratureSettings, half_line_integral
from .rates import (
    RateSet,
    compute_rateset,
    dissipation_density,
    dissipation_rate_general,
    dissipation_rate_harmonic,
    dissipative_potential,
    dissipative_spectral_density,
    population_rate,
    read_rate_table,
    spin_rates,
    verify_balance,
    write_rate_table,
)
from .dynamics import Trajectory, energy_ledger, propagate, steady_state, write_trajectory
from .oracle import (
    OracleResult,
    TruncatedSystem,
    build_truncated,
    compare_report,
    exact_propagation,
)

__version__ = "0.1.0"
