"""Monte Carlo simulation of the sampled radar signal chain.

Each trial synthesises the received samples, adds complex white Gaussian
noise in the sample domain, matched-filters against the transmitted codes
and applies the matched receive beamformer. The empirical SNR is the
noise-free output power over the across-trial variance of the noisy output.

Trials are processed in blocks whose size depends only on the problem
dimensions, block ``i`` drawing from ``SeedSequence(seed, spawn_key=(i,))``.
Results are therefore bit-identical for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import ArrayConfig, Scenario, require_valid
from .oracle import PowerAllocation, check_allocation, transmit_weights
from .response import XL, LinkBudget, rx_steering, tx_steering
from .snr_laws import SnrResult

ORTHOGONAL = "orthogonal"
SINGLE = "single"

BLOCK_TRIALS = 512
BLOCK_SAMPLES = 1 << 21  # complex noise samples per block, bounds memory


@dataclass(frozen=True)
class WaveformBank:
    codes: np.ndarray  # (count, length), unit-energy rows
    kind: str

    @property
    def length(self) -> int:
        return self.codes.shape[1]


@dataclass(frozen=True)
class McConfig:
    trials: int = 10_000
    code_length: int | None = None  # defaults to the number of codes
    seed: int = 0
    noise_on: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class McResult:
    snr: SnrResult
    signal: complex  # noise-free beamformer output
    noise_var: float  # across-trial variance of the noisy output
    trials: int
    seed: int
    lanes: np.ndarray | None = None  # matched-filter noise, (trials, lanes), if requested


def make_orthogonal_codes(m: int, length: int) -> WaveformBank:
    """Harmonic codes ``exp(j 2 pi k n / L) / sqrt(L)``, ``k < m``: exactly orthonormal."""
    if m < 1:
        raise ValueError(f"need at least one code, got {m}")
    if length < m:
        raise ValueError(f"code length {length} is shorter than the number of codes {m}")
    k = np.arange(m)[:, None]
    n = np.arange(length)[None, :]
    codes = np.exp(2j * np.pi * k * n / length) / math.sqrt(length)
    return WaveformBank(codes, ORTHOGONAL if m > 1 else SINGLE)


def _block_sizes(trials: int, per_trial: int):
    size = max(1, min(BLOCK_TRIALS, BLOCK_SAMPLES // per_trial))
    full, rest = divmod(trials, size)
    return [size] * full + ([rest] if rest else [])


def _run_blocks(chain, n_rx: int, length: int, noise: float, mc: McConfig, workers: int):
    """Apply ``chain`` to noise blocks and return (outputs, lanes) concatenated in block order."""
    sizes = _block_sizes(mc.trials, n_rx * length)
    scale = math.sqrt(noise / 2.0)

    def one(i):
        count = sizes[i]
        if mc.noise_on:
            rng = np.random.default_rng(np.random.SeedSequence(mc.seed, spawn_key=(i,)))
            z = rng.standard_normal((count, n_rx, length, 2))
            z = scale * (z[..., 0] + 1j * z[..., 1])
        else:
            z = np.zeros((count, n_rx, length), dtype=complex)
        return chain(z)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(i) for i in range(len(sizes))]
    return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))


def _result(signal: complex, outputs: np.ndarray, lanes, mc: McConfig, source: str,
            keep_lanes: bool) -> McResult:
    if mc.noise_on and len(outputs) > 1:
        dev = outputs - outputs.mean()
        noise_var = float(np.sum(dev.real**2 + dev.imag**2) / (len(outputs) - 1))
    else:
        noise_var = 0.0
    lin = abs(signal) ** 2 / noise_var if noise_var > 0 else math.inf
    snr = SnrResult(lin, f"{source} trials={mc.trials} seed={mc.seed}")
    return McResult(snr, signal, noise_var, mc.trials, mc.seed, lanes if keep_lanes else None)


def simulate_mimo(tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario, budget: LinkBudget,
                  mc: McConfig, workers: int = 1, model: str = XL, keep_lanes: bool = False) -> McResult:
    """Orthogonal-waveform transmission with ``P/M`` per element.

    The ``MN`` matched-filter outputs are stacked receive-major
    (``b kron a``) and combined with the matched unit-norm beamformer.
    """
    require_valid(scenario, tx, rx)
    m, n = tx.elements, rx.elements
    bank = make_orthogonal_codes(m, mc.code_length or m)
    a = tx_steering(tx, budget, scenario.tx_range, scenario.tx_angle, model).entries
    b = rx_steering(rx, budget, scenario.rx_range, scenario.rx_angle, model).entries
    s = bank.codes
    # noise-free received samples, (N, L)
    clean = budget.kappa * math.sqrt(budget.power / m) * np.outer(b, a @ s)
    v = np.kron(b / np.linalg.norm(b), a / np.linalg.norm(a))
    filt = s.conj().T  # (L, M)

    def chain(z):
        y = (clean[None] + z) @ filt  # (B, N, M)
        flat = y.reshape(len(z), n * m)
        lanes = (z @ filt).reshape(len(z), n * m) if keep_lanes else np.empty((len(z), 0))
        return flat @ v.conj(), lanes

    signal = complex((clean @ filt).reshape(n * m) @ v.conj())
    outputs, lanes = _run_blocks(chain, n, bank.length, budget.noise, mc, workers)
    return _result(signal, outputs, lanes, mc, f"montecarlo:{model}_mimo", keep_lanes)


def simulate_phased(tx: ArrayConfig, rx: ArrayConfig, scenario: Scenario, budget: LinkBudget,
                    alloc: PowerAllocation, mc: McConfig, workers: int = 1, model: str = XL,
                    keep_lanes: bool = False) -> McResult:
    """Single-waveform transmission through the allocation's beamforming weights."""
    require_valid(scenario, tx, rx)
    check_allocation(alloc, budget)
    n = rx.elements
    bank = make_orthogonal_codes(1, mc.code_length or 1)
    a = tx_steering(tx, budget, scenario.tx_range, scenario.tx_angle, model).entries
    b = rx_steering(rx, budget, scenario.rx_range, scenario.rx_angle, model).entries
    w = transmit_weights(alloc, tx, budget)
    s = bank.codes[0]
    clean = budget.kappa * np.outer(b, (a @ w) * s)  # (N, L)
    v = b / np.linalg.norm(b)

    def chain(z):
        y = (clean[None] + z) @ s.conj()  # (B, N)
        lanes = z @ s.conj() if keep_lanes else np.empty((len(z), 0))
        return y @ v.conj(), lanes

    signal = complex((clean @ s.conj()) @ v.conj())
    outputs, lanes = _run_blocks(chain, n, bank.length, budget.noise, mc, workers)
    return _result(signal, outputs, lanes, mc, f"montecarlo:{model}_phased_{alloc.policy}", keep_lanes)
