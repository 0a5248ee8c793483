"""Outage and symbol-error analysis of two-way AF relaying with relay hardware impairments.

Submodules:
    specfun     scalar special-function kernels (K1, erfc, incomplete gamma, Q)
    model       system configuration and instantaneous SNDR math
    analytic    exact/asymptotic outage probability, SER quadrature, inversions
    montecarlo  reproducible chunked Monte-Carlo estimators
    cli         command-line curve sweeps, validation runs, and inversion queries
"""

from .analytic import (
    MODULATIONS,
    InfeasibleTargetError,
    MismatchedGainError,
    Modulation,
    OutageQuery,
    QuadratureError,
    QuadratureSpec,
    invert_impairment_for_op,
    invert_impairment_for_ser,
    outage_asymptotic,
    outage_probability,
    ser,
    ser_asymptotic,
    ser_floor_quadrature,
)
from .model import (
    Direction,
    DerivedConstants,
    HighPowerRegime,
    ImpairmentPair,
    SystemConfig,
    derived_constants,
    equal_split_kappa,
    optimal_split,
    relaying_gain,
    relaying_gain_asymptotic,
    sndr,
    sndr_asymptotic,
    sndr_ceiling,
    sndr_from_gain,
)
from .montecarlo import (
    McConfig,
    McEstimate,
    SignalRealization,
    mc_outage,
    mc_outage_asymptotic,
    mc_ser_expectation,
    mc_ser_signal_level,
    sample_channel_gains,
    wilson_interval,
)

__version__ = "0.1.0"
