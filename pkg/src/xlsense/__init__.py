"""Sensing SNR scaling laws for radar with extremely large-scale arrays."""

from .geometry import ArrayConfig, DomainError, Scenario, validate_scenario
from .oracle import PowerAllocation, exact_snr_mimo, exact_snr_phased, power_alloc
from .response import LinkBudget, angular_span, norm_sq_closed, norm_sq_exact, rx_steering, tx_steering
from .snr_laws import (
    Mode,
    Model,
    ModeSpec,
    SnrResult,
    psi,
    snr_phased_limit,
    snr_upw_mimo,
    snr_upw_phased,
    snr_xl_mimo,
    snr_xl_mimo_reduced,
    snr_xl_phased_equal,
    snr_xl_phased_optimal,
)

__version__ = "0.1.0"
