"""Array placement, exact element-to-target distances and scenario checks.

Both arrays are uniform linear arrays centred on their own origin, with
element ``m`` at ``(0, m * spacing)`` and the target at
``(range * cos(angle), range * sin(angle))`` in that array's local frame.
The transmit and receive sides are independent frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Upper bound on spacing/range enforced as the model validity region.
EPS_MAX = 0.1
#: Above this spacing/range a validity warning is raised (still legal).
EPS_WARN = 0.01


class DomainError(ValueError):
    """Input outside the domain where a model quantity is defined."""


@dataclass(frozen=True)
class ArrayConfig:
    """One uniform linear array side.

    ``wavelength`` defaults to twice the spacing (half-wavelength array).
    """

    elements: int
    spacing: float
    wavelength: float | None = None

    def __post_init__(self):
        if self.wavelength is None:
            object.__setattr__(self, "wavelength", 2.0 * self.spacing)

    @property
    def half(self) -> int:
        return (self.elements - 1) // 2

    @property
    def aperture(self) -> float:
        return self.elements * self.spacing

    def indices(self) -> np.ndarray:
        """Signed element indices ``-(K-1)/2 .. (K-1)/2``."""
        if self.elements < 1 or self.elements % 2 == 0:
            raise DomainError(f"element count must be a positive odd integer, got {self.elements}")
        return np.arange(-self.half, self.half + 1)


@dataclass(frozen=True)
class Scenario:
    """Target placement; angles in radians measured from each array normal."""

    tx_range: float
    tx_angle: float
    rx_range: float
    rx_angle: float

    @classmethod
    def from_degrees(cls, tx_range, tx_angle_deg, rx_range=None, rx_angle_deg=None) -> "Scenario":
        if rx_range is None:
            rx_range = tx_range
        if rx_angle_deg is None:
            rx_angle_deg = tx_angle_deg
        return cls(float(tx_range), math.radians(tx_angle_deg), float(rx_range), math.radians(rx_angle_deg))


@dataclass(frozen=True)
class Violation:
    invariant: str
    value: float
    message: str

    def __str__(self):
        return f"{self.invariant}: {self.message}"


def _side_distances(rng: float, angle: float, spacing: float, idx) -> np.ndarray:
    eps = spacing / rng
    idx = np.asarray(idx, dtype=float)
    return rng * np.sqrt(1.0 - 2.0 * idx * eps * math.sin(angle) + (idx * eps) ** 2)


def _check_index(array: ArrayConfig, idx):
    bad = np.abs(np.asarray(idx)) > array.half
    if np.any(bad):
        raise DomainError(f"element index out of range for {array.elements}-element array: {idx}")


def tx_element_distance(scenario: Scenario, array: ArrayConfig, m):
    """Distance from the target to transmit element ``m`` (scalar or array of indices)."""
    _check_index(array, m)
    d = _side_distances(scenario.tx_range, scenario.tx_angle, array.spacing, m)
    return float(d) if d.ndim == 0 else d


def rx_element_distance(scenario: Scenario, array: ArrayConfig, n):
    """Distance from the target to receive element ``n``."""
    _check_index(array, n)
    d = _side_distances(scenario.rx_range, scenario.rx_angle, array.spacing, n)
    return float(d) if d.ndim == 0 else d


def side_distances(array: ArrayConfig, rng: float, angle: float) -> np.ndarray:
    """All element distances of one array for a target at ``(rng, angle)``."""
    return _side_distances(rng, angle, array.spacing, array.indices())


def _array_violations(tag: str, array: ArrayConfig) -> list[Violation]:
    out = []
    if not isinstance(array.elements, (int, np.integer)) or array.elements < 1 or array.elements % 2 == 0:
        out.append(Violation(f"{tag}.elements", array.elements, "must be a positive odd integer"))
    if not array.spacing > 0:
        out.append(Violation(f"{tag}.spacing", array.spacing, "must be > 0"))
    if not array.wavelength > 0:
        out.append(Violation(f"{tag}.wavelength", array.wavelength, "must be > 0"))
    return out


def validate_scenario(scenario: Scenario, tx_array: ArrayConfig, rx_array: ArrayConfig,
                      eps_max: float = EPS_MAX) -> list[Violation]:
    """Every violated invariant of the scenario and both arrays; empty when valid."""
    out = _array_violations("tx", tx_array) + _array_violations("rx", rx_array)
    sides = (
        ("tx", scenario.tx_range, scenario.tx_angle, tx_array),
        ("rx", scenario.rx_range, scenario.rx_angle, rx_array),
    )
    for tag, rng, angle, array in sides:
        if not rng > 0:
            out.append(Violation(f"{tag}.range", rng, "must be > 0"))
        if not abs(angle) < math.pi / 2:
            out.append(Violation(f"{tag}.angle", angle,
                                 f"|angle| must be < 90 deg, got {math.degrees(angle):.6g} deg"))
        if rng > 0 and array.spacing > 0:
            eps = array.spacing / rng
            if not eps < eps_max:
                out.append(Violation(f"{tag}.eps", eps, f"spacing/range = {eps:.6g} must be < {eps_max:g}"))
    return out


def validity_warnings(scenario: Scenario, tx_array: ArrayConfig, rx_array: ArrayConfig) -> list[str]:
    """Soft warnings for spacing/range ratios that are legal but above ``EPS_WARN``."""
    out = []
    for tag, rng, array in (("tx", scenario.tx_range, tx_array), ("rx", scenario.rx_range, rx_array)):
        if rng > 0 and array.spacing / rng > EPS_WARN:
            out.append(f"{tag} spacing/range = {array.spacing / rng:.4g} exceeds {EPS_WARN:g}; "
                       "closed forms lose accuracy")
    return out


def require_valid(scenario: Scenario, tx_array: ArrayConfig, rx_array: ArrayConfig):
    violations = validate_scenario(scenario, tx_array, rx_array)
    if violations:
        raise DomainError("; ".join(str(v) for v in violations))
