"""Exact-summation SNRs and transmit power allocations.

These evaluate the peak-SNR expressions element by element with exactly
rounded sums and serve as ground truth for the closed forms in
:mod:`xlsense.snr_laws`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ArrayConfig, DomainError, Scenario, require_valid
from .response import XL, LinkBudget, SteeringVector, norm_sq_exact, rx_steering, tx_steering
from .snr_laws import Mode, Model, ModeSpec, SnrResult

EQUAL = "equal"
OPTIMAL = "optimal"
CUSTOM = "custom"

CONSTRAINT_RTOL = 1e-9


@dataclass(frozen=True)
class PowerAllocation:
    """Per-element coefficients ``C_m``; element ``m`` radiates ``C_m * beta / r'_m**2``.

    ``probe`` is the ``(range, angle)`` the transmitter steers toward, and
    ``distances`` the element distances ``r'_m`` to that probe.
    """

    coefficients: np.ndarray
    policy: str
    probe: tuple
    distances: np.ndarray
    model: str = XL

    def element_powers(self, beta: float) -> np.ndarray:
        return self.coefficients * beta / self.distances**2

    def total_power(self, beta: float) -> float:
        return math.fsum(self.element_powers(beta).tolist())


def check_allocation(alloc: PowerAllocation, budget: LinkBudget, rtol: float = CONSTRAINT_RTOL):
    """Raise ``ValueError`` unless the allocation is nonnegative and spends exactly ``P``."""
    if np.any(alloc.coefficients < 0):
        raise ValueError("power allocation has negative coefficients")
    lhs = math.fsum((alloc.coefficients / alloc.distances**2).tolist())
    target = budget.power / budget.ref_gain
    if abs(lhs - target) > rtol * target:
        raise ValueError(f"power constraint violated: sum C_m/r_m^2 = {lhs!r}, expected P/beta = {target!r}")


def power_alloc(policy: str, tx: ArrayConfig, scenario: Scenario, budget: LinkBudget,
                probe: tuple | None = None, model: str = XL,
                coefficients=None) -> PowerAllocation:
    """Build an allocation toward ``probe`` (defaults to the true transmit-side target).

    ``equal`` gives every element ``P/M``; ``optimal`` uses a constant
    ``C_m = P / ||a||^2`` so element power falls off as ``1/r_m^2``.
    ``custom`` takes ``coefficients`` as given and only checks them.
    """
    if probe is None:
        probe = (scenario.tx_range, scenario.tx_angle)
    a = tx_steering(tx, budget, probe[0], probe[1], model)
    dist = np.array(a.distances)
    m = tx.elements
    if policy == EQUAL:
        coeffs = budget.power * dist**2 / (m * budget.ref_gain)
    elif policy == OPTIMAL:
        coeffs = np.full(m, budget.power / norm_sq_exact(a))
    elif policy == CUSTOM:
        if coefficients is None:
            raise ValueError("custom policy requires coefficients")
        coeffs = np.asarray(coefficients, dtype=float)
        if coeffs.shape != (m,):
            raise ValueError(f"expected {m} coefficients, got shape {coeffs.shape}")
    else:
        raise ValueError(f"unknown allocation policy {policy!r}")
    alloc = PowerAllocation(coeffs, policy, tuple(probe), dist, model)
    check_allocation(alloc, budget)
    return alloc


def transmit_weights(alloc: PowerAllocation, tx: ArrayConfig, budget: LinkBudget) -> np.ndarray:
    """Per-element complex weights ``sqrt(C_m) * conj(a_m(r', theta'))``."""
    a = tx_steering(tx, budget, alloc.probe[0], alloc.probe[1], alloc.model)
    return np.sqrt(alloc.coefficients) * np.conj(a.entries)


def _steerings(tx, rx, scenario, budget, model):
    a = tx_steering(tx, budget, scenario.tx_range, scenario.tx_angle, model)
    b = rx_steering(rx, budget, scenario.rx_range, scenario.rx_angle, model)
    return a, b


def exact_snr_mimo(tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario, budget: LinkBudget,
                   model: str = XL) -> SnrResult:
    require_valid(scenario, tx, rx)
    a, b = _steerings(tx, rx, scenario, budget, model)
    lin = budget.power * budget.reflect_gain / (budget.noise * tx.elements) * norm_sq_exact(b) * norm_sq_exact(a)
    return SnrResult(lin, f"oracle:{model}_mimo")


def _fsum_complex(z: np.ndarray) -> complex:
    return complex(math.fsum(z.real.tolist()), math.fsum(z.imag.tolist()))


def exact_snr_phased(alloc: PowerAllocation, tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario,
                     budget: LinkBudget, model: str = XL) -> SnrResult:
    """Peak SNR of the phased mode for an arbitrary allocation.

    The transmit gain is ``|sum_m sqrt(C_m) a_m conj(a'_m)|^2``; when the
    probe matches the target this is ``(beta * sum_m sqrt(C_m)/r_m^2)^2``.
    """
    require_valid(scenario, tx, rx)
    check_allocation(alloc, budget)
    a, b = _steerings(tx, rx, scenario, budget, model)
    w = transmit_weights(alloc, tx, budget)
    gain_tx = abs(_fsum_complex(a.entries * w)) ** 2
    lin = budget.reflect_gain * norm_sq_exact(b) * gain_tx / budget.noise
    return SnrResult(lin, f"oracle:{model}_phased_{alloc.policy}")


def oracle_snr(spec: ModeSpec, tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario,
               budget: LinkBudget) -> SnrResult:
    model = spec.model.value
    if spec.mode is Mode.MIMO:
        return exact_snr_mimo(tx, rx, scenario, budget, model)
    policy = EQUAL if spec.mode is Mode.PHASED_EQUAL else OPTIMAL
    alloc = power_alloc(policy, tx, scenario, budget, model=model)
    return exact_snr_phased(alloc, tx, rx, scenario, budget, model)


def _normalized_inner(probe: SteeringVector, truth: SteeringVector) -> complex:
    return _fsum_complex(np.conj(probe.entries) * truth.entries) / math.sqrt(norm_sq_exact(probe))


def beamform_scan(tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario, budget: LinkBudget,
                  probe: tuple, mode: str = "mimo", policy: str = OPTIMAL) -> float:
    """Noise-free beamformer output magnitude for a probe ``(r', theta', l', phi')``.

    Normalised by the output at the true location, so the matched probe
    returns 1 and every other probe returns at most 1.
    """
    rp, tp, lp, pp = probe
    for rng in (rp, lp):
        if not rng > 0:
            raise DomainError(f"probe range must be > 0, got {rng}")
    a, b = _steerings(tx, rx, scenario, budget, XL)
    bp = rx_steering(rx, budget, lp, pp)
    rx_gain = abs(_normalized_inner(bp, b))
    if mode == "mimo":
        ap = tx_steering(tx, budget, rp, tp)
        tx_gain = abs(_normalized_inner(ap, a))
        ref = math.sqrt(norm_sq_exact(a) * norm_sq_exact(b))
    elif mode == "phased":
        alloc = power_alloc(policy, tx, scenario, budget, probe=(rp, tp))
        tx_gain = abs(_fsum_complex(a.entries * transmit_weights(alloc, tx, budget)))
        matched = power_alloc(policy, tx, scenario, budget)
        ref = math.sqrt(norm_sq_exact(b)) * abs(_fsum_complex(a.entries * transmit_weights(matched, tx, budget)))
    else:
        raise ValueError(f"unknown scan mode {mode!r}")
    return rx_gain * tx_gain / ref


def scan_grid(tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario, budget: LinkBudget,
              range_offsets, angle_offsets, mode: str = "mimo", policy: str = OPTIMAL) -> np.ndarray:
    """Scan with the same range/angle offset applied to both sides; shape ``(ranges, angles)``."""
    out = np.empty((len(range_offsets), len(angle_offsets)))
    for i, dr in enumerate(range_offsets):
        for j, da in enumerate(angle_offsets):
            probe = (scenario.tx_range + dr, scenario.tx_angle + da,
                     scenario.rx_range + dr, scenario.rx_angle + da)
            out[i, j] = beamform_scan(tx, rx, scenario, budget, probe, mode, policy)
    return out
