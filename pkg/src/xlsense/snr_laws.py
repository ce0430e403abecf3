"""Closed-form peak sensing SNRs for XL and far-field (UPW) arrays.

All functions take the transmit array, receive array, scenario and link
budget, and return an :class:`SnrResult`. The reduced forms and the
asymptotic limit are exposed separately so sweeps can show where the
conventional model breaks down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .geometry import ArrayConfig, DomainError, Scenario
from .response import LinkBudget, angular_span


class Mode(str, Enum):
    MIMO = "mimo"
    PHASED_EQUAL = "phased_equal"
    PHASED_OPTIMAL = "phased_optimal"


class Model(str, Enum):
    XL = "xl"
    UPW = "upw"


@dataclass(frozen=True)
class ModeSpec:
    mode: Mode
    model: Model

    def canonical(self) -> "ModeSpec":
        # with uniform amplitudes equal allocation already is the optimum
        if self.model is Model.UPW and self.mode is Mode.PHASED_EQUAL:
            return ModeSpec(Mode.PHASED_OPTIMAL, Model.UPW)
        return self

    def __str__(self):
        return f"{self.mode.value}:{self.model.value}"

    @classmethod
    def parse(cls, text: str) -> "ModeSpec":
        mode, _, model = text.strip().partition(":")
        return cls(Mode(mode), Model(model or "xl"))


ALL_MODES = tuple(ModeSpec(mode, model) for mode in Mode for model in Model)


@dataclass(frozen=True)
class SnrResult:
    linear: float
    source: str
    warnings: tuple = ()

    @property
    def db(self) -> float:
        return 10.0 * math.log10(self.linear) if self.linear > 0 else -math.inf


def _cos(angle: float) -> float:
    if not abs(angle) < math.pi / 2:
        raise DomainError(f"|angle| must be < pi/2 (cos must be nonzero), got {angle}")
    return math.cos(angle)


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise DomainError(f"{k} must be > 0, got {v}")


def _upw_checks(sc: Scenario):
    _positive(tx_range=sc.tx_range, rx_range=sc.rx_range)
    _cos(sc.tx_angle)
    _cos(sc.rx_angle)


def _spans(tx: ArrayConfig, rx: ArrayConfig, sc: Scenario):
    return (angular_span(tx.elements, tx.spacing, sc.tx_range, sc.tx_angle),
            angular_span(rx.elements, rx.spacing, sc.rx_range, sc.rx_angle))


def _optimal_phased_linear(tx, rx, sc, budget) -> float:
    span_t, span_r = _spans(tx, rx, sc)
    denom = (tx.spacing * rx.spacing * sc.tx_range * sc.rx_range
             * _cos(sc.tx_angle) * _cos(sc.rx_angle))
    return budget.gain * span_t * span_r / denom


def snr_xl_mimo(tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario, budget: LinkBudget) -> SnrResult:
    """XL-MIMO peak SNR: product of angular spans divided by the power split ``M``."""
    return SnrResult(_optimal_phased_linear(tx, rx, scenario, budget) / tx.elements, "closed_form:xl_mimo")


def snr_upw_mimo(n: int, scenario: Scenario, budget: LinkBudget) -> SnrResult:
    _upw_checks(scenario)
    lin = budget.gain * n / (scenario.tx_range**2 * scenario.rx_range**2)
    return SnrResult(lin, "closed_form:upw_mimo")


def psi(m: int, spacing: float, rng: float, angle: float) -> float:
    """Integral approximation of ``sum_m 1/r_m`` over the transmit array.

    ``ln(p + sqrt(1 + p^2))`` is evaluated as ``asinh(p)``, which stays
    accurate for large negative ``p`` where the log form cancels.
    """
    _positive(range=rng, spacing=spacing)
    c = _cos(angle)
    eps = spacing / rng
    if not eps < 0.1:
        raise DomainError(f"spacing/range must be < 0.1, got {eps}")
    half = m * eps / 2.0
    s = math.sin(angle)
    p1 = (-half - s) / c
    p2 = (half - s) / c
    return (math.asinh(p2) - math.asinh(p1)) / (rng * eps)


def snr_xl_phased_equal(tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario,
                        budget: LinkBudget) -> SnrResult:
    span_r = angular_span(rx.elements, rx.spacing, scenario.rx_range, scenario.rx_angle)
    ps = psi(tx.elements, tx.spacing, scenario.tx_range, scenario.tx_angle)
    lin = (budget.gain * span_r / (tx.elements * rx.spacing * scenario.rx_range * _cos(scenario.rx_angle))
           * ps**2)
    return SnrResult(lin, "closed_form:xl_phased_equal")


def snr_xl_phased_optimal(tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario,
                          budget: LinkBudget) -> SnrResult:
    return SnrResult(_optimal_phased_linear(tx, rx, scenario, budget), "closed_form:xl_phased_optimal")


def snr_upw_phased(m: int, n: int, scenario: Scenario, budget: LinkBudget) -> SnrResult:
    _upw_checks(scenario)
    lin = budget.gain * m * n / (scenario.tx_range**2 * scenario.rx_range**2)
    return SnrResult(lin, "closed_form:upw_phased")


def snr_phased_limit(scenario: Scenario, budget: LinkBudget, tx_spacing: float,
                     rx_spacing: float) -> SnrResult:
    """Saturation value of the optimal phased SNR as both arrays grow without bound."""
    _positive(tx_range=scenario.tx_range, rx_range=scenario.rx_range,
              tx_spacing=tx_spacing, rx_spacing=rx_spacing)
    denom = (tx_spacing * rx_spacing * scenario.tx_range * scenario.rx_range
             * _cos(scenario.tx_angle) * _cos(scenario.rx_angle))
    return SnrResult(budget.gain * math.pi**2 / denom, "closed_form:phased_limit")


def _regime_warning(side: str, rng: float, count: int, spacing: float) -> list[str]:
    half_aperture = count * spacing / 2.0
    if rng < 10.0 * half_aperture:
        return [f"{side} range {rng:g} m is within 10x of half-aperture {half_aperture:g} m; "
                "far-field reduction is inaccurate"]
    return []


def snr_xl_mimo_reduced(case: int, tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario,
                        budget: LinkBudget) -> SnrResult:
    """Far-field reductions of the XL-MIMO SNR.

    ``case=1`` collapses the transmit side, ``case=2`` the receive side and
    ``case=3`` both (identical to :func:`snr_upw_mimo`). The regime is not
    enforced; a warning is attached when it is not comfortably met.
    """
    sc = scenario
    if case == 1:
        span_r = angular_span(rx.elements, rx.spacing, sc.rx_range, sc.rx_angle)
        lin = budget.gain * span_r / (rx.spacing * sc.tx_range**2 * sc.rx_range * _cos(sc.rx_angle))
        warn = _regime_warning("tx", sc.tx_range, tx.elements, tx.spacing)
    elif case == 2:
        span_t = angular_span(tx.elements, tx.spacing, sc.tx_range, sc.tx_angle)
        lin = (budget.gain * rx.elements * span_t
               / (tx.spacing * tx.elements * sc.rx_range**2 * sc.tx_range * _cos(sc.tx_angle)))
        warn = _regime_warning("rx", sc.rx_range, rx.elements, rx.spacing)
    elif case == 3:
        lin = snr_upw_mimo(rx.elements, sc, budget).linear
        warn = (_regime_warning("tx", sc.tx_range, tx.elements, tx.spacing)
                + _regime_warning("rx", sc.rx_range, rx.elements, rx.spacing))
    else:
        raise ValueError(f"reduction case must be 1, 2 or 3, got {case}")
    return SnrResult(lin, f"closed_form:xl_mimo_reduced{case}", tuple(warn))


def closed_form_snr(spec: ModeSpec, tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario,
                    budget: LinkBudget) -> SnrResult:
    spec = spec.canonical()
    if spec.model is Model.UPW:
        if spec.mode is Mode.MIMO:
            return snr_upw_mimo(rx.elements, scenario, budget)
        return snr_upw_phased(tx.elements, rx.elements, scenario, budget)
    fn = {
        Mode.MIMO: snr_xl_mimo,
        Mode.PHASED_EQUAL: snr_xl_phased_equal,
        Mode.PHASED_OPTIMAL: snr_xl_phased_optimal,
    }[spec.mode]
    return fn(tx, rx, scenario, budget)
