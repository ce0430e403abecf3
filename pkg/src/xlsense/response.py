"""Spherical-wavefront steering vectors and their norms.

Element ``m`` of a steering vector is ``sqrt(beta)/r_m * exp(-j 2 pi r_m / lambda)``
where ``r_m`` is the exact element distance. ``model="upw"`` gives the
far-field counterpart (common amplitude ``sqrt(beta)/r`` and a linear phase
ramp) used as the conventional baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ArrayConfig, DomainError, side_distances

XL = "xl"
UPW = "upw"


@dataclass(frozen=True)
class LinkBudget:
    power: float  # P, watts
    reflect_gain: float  # |kappa|^2
    ref_gain: float  # beta, channel power gain at 1 m
    noise: float  # sigma^2, watts

    def __post_init__(self):
        for name in ("power", "reflect_gain", "ref_gain", "noise"):
            if not getattr(self, name) > 0:
                raise DomainError(f"LinkBudget.{name} must be > 0, got {getattr(self, name)}")

    @classmethod
    def from_gain_db(cls, gain_db: float, ref_gain: float = 1.0) -> "LinkBudget":
        """Budget whose composite gain ``P |kappa|^2 beta^2 / sigma^2`` equals ``gain_db``."""
        return cls(power=10.0 ** (gain_db / 10.0) / ref_gain**2, reflect_gain=1.0,
                   ref_gain=ref_gain, noise=1.0)

    @property
    def gain(self) -> float:
        return self.power * self.reflect_gain * self.ref_gain**2 / self.noise

    @property
    def kappa(self) -> float:
        # reflection phase is irrelevant to every SNR; take kappa real
        return math.sqrt(self.reflect_gain)


@dataclass(frozen=True)
class SteeringVector:
    entries: np.ndarray
    side: str
    distances: np.ndarray = field(repr=False)
    model: str = XL

    def __post_init__(self):
        self.entries.setflags(write=False)
        self.distances.setflags(write=False)

    def __len__(self):
        return len(self.entries)


def _steering(array: ArrayConfig, budget: LinkBudget, rng: float, angle: float, side: str,
              model: str) -> SteeringVector:
    if not rng > 0:
        raise DomainError(f"range must be > 0, got {rng}")
    if not abs(angle) < math.pi / 2:
        raise DomainError(f"|angle| must be < pi/2, got {angle}")
    k = 2.0 * math.pi / array.wavelength
    if model == XL:
        dist = side_distances(array, rng, angle)
        phase = k * dist
    elif model == UPW:
        idx = array.indices()
        dist = np.full(len(idx), float(rng))
        phase = k * (rng - idx * array.spacing * math.sin(angle))
    else:
        raise ValueError(f"unknown wavefront model {model!r}")
    entries = math.sqrt(budget.ref_gain) / dist * np.exp(-1j * phase)
    return SteeringVector(entries, side, dist, model)


def tx_steering(array: ArrayConfig, budget: LinkBudget, r: float, theta: float,
                model: str = XL) -> SteeringVector:
    """Transmit array response ``a(r, theta)``."""
    return _steering(array, budget, r, theta, "transmit", model)


def rx_steering(array: ArrayConfig, budget: LinkBudget, l: float, phi: float,
                model: str = XL) -> SteeringVector:
    """Receive array response ``b(l, phi)``."""
    return _steering(array, budget, l, phi, "receive", model)


def norm_sq_exact(v: SteeringVector) -> float:
    # fsum is exactly rounded, so M ~ 1e5 terms add no accumulation error
    return math.fsum((v.entries.real**2 + v.entries.imag**2).tolist())


def _check_side(rng, angle):
    if not rng > 0:
        raise DomainError(f"range must be > 0, got {rng}")
    if not abs(angle) < math.pi / 2:
        raise DomainError(f"|angle| must be < pi/2, got {angle}")


def angular_span(count: int, spacing: float, rng: float, angle: float) -> float:
    """Angle subtended at the target by the two array ends, in (0, pi)."""
    _check_side(rng, angle)
    c = math.cos(angle)
    a = count * spacing / (2.0 * rng * c)
    t = math.tan(angle)
    return math.atan(a - t) + math.atan(a + t)


def norm_sq_closed(count: int, spacing: float, rng: float, angle: float, beta: float) -> float:
    """Integral approximation of ``||a||^2`` via the angular span."""
    return beta / (spacing * rng * math.cos(angle)) * angular_span(count, spacing, rng, angle)
