"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""

import itertools
import math
import time

import numpy as np

from xlsense.geometry import ArrayConfig, Scenario, tx_element_distance
from xlsense.oracle import (
    EQUAL,
    OPTIMAL,
    exact_snr_mimo,
    exact_snr_phased,
    power_alloc,
    scan_grid,
)
from xlsense.response import LinkBudget, angular_span, norm_sq_exact, rx_steering, tx_steering
from xlsense.simkit import McConfig, simulate_mimo, simulate_phased
from xlsense.snr_laws import (
    psi,
    snr_phased_limit,
    snr_upw_mimo,
    snr_upw_phased,
    snr_xl_mimo,
    snr_xl_phased_equal,
    snr_xl_phased_optimal,
)
from xlsense.sweeps import figure_preset

D = 0.0628
BUDGET = LinkBudget.from_gain_db(50.0)
SIZES = (65, 257, 1025, 2049)
RANGES = (10.0, 50.0, 200.0)
ANGLES = (0.0, 45.0, 80.0)


def grid():
    for m, n, r, a in itertools.product(SIZES, SIZES, RANGES, ANGLES):
        yield ArrayConfig(m, D), ArrayConfig(n, D), Scenario.from_degrees(r, a)


def rel(a, b):
    return abs(a / b - 1.0)


def db(x):
    return 10.0 * math.log10(x)


def test_c1_closed_forms_match_oracle(verdict):
    t0 = time.perf_counter()
    worst = {"mimo": 0.0, "equal": 0.0, "optimal": 0.0}
    for tx, rx, sc in grid():
        worst["mimo"] = max(worst["mimo"], rel(snr_xl_mimo(tx, rx, sc, BUDGET).linear,
                                               exact_snr_mimo(tx, rx, sc, BUDGET).linear))
        for policy, fn in ((EQUAL, snr_xl_phased_equal), (OPTIMAL, snr_xl_phased_optimal)):
            exact = exact_snr_phased(power_alloc(policy, tx, sc, BUDGET), tx, rx, sc, BUDGET).linear
            worst[policy] = max(worst[policy], rel(fn(tx, rx, sc, BUDGET).linear, exact))
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 0.01 and elapsed < 10.0
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + f", {elapsed:.2f} s"
    verdict("C1 closed forms vs oracle within 1%, runtime < 10 s", ok, detail)


def test_c2_optimal_is_m_times_mimo(verdict):
    worst_cf = worst_ex = 0.0
    for tx, rx, sc in grid():
        m = tx.elements
        worst_cf = max(worst_cf, rel(snr_xl_phased_optimal(tx, rx, sc, BUDGET).linear,
                                     m * snr_xl_mimo(tx, rx, sc, BUDGET).linear))
        opt = exact_snr_phased(power_alloc(OPTIMAL, tx, sc, BUDGET), tx, rx, sc, BUDGET).linear
        worst_ex = max(worst_ex, rel(opt, m * exact_snr_mimo(tx, rx, sc, BUDGET).linear))
    verdict("C2 optimal = M * mimo to 1e-12 (closed form and oracle)",
            worst_cf <= 1e-12 and worst_ex <= 1e-12, f"closed {worst_cf:.1e}, oracle {worst_ex:.1e}")


def test_c3_psi_accuracy(verdict):
    worst = 0.0
    for m, r, a in itertools.product(SIZES, RANGES, ANGLES):
        tx = ArrayConfig(m, D)
        sc = Scenario.from_degrees(r, a)
        exact = math.fsum(1.0 / tx_element_distance(sc, tx, tx.indices()))
        worst = max(worst, rel(psi(m, D, r, math.radians(a)), exact))
    verdict("C3 psi vs sum 1/r_m within 0.5%", worst < 0.005, f"worst {worst:.2e}")


def test_c4_far_field_reduction(verdict):
    worst = 0.0
    for m, n, a in itertools.product(SIZES, SIZES, ANGLES):
        tx, rx = ArrayConfig(m, D), ArrayConfig(n, D)
        sc = Scenario.from_degrees(100 * m * D / 2, a, 100 * n * D / 2, a)
        upw_m = snr_upw_mimo(n, sc, BUDGET).linear
        upw_p = snr_upw_phased(m, n, sc, BUDGET).linear
        worst = max(worst,
                    rel(snr_xl_mimo(tx, rx, sc, BUDGET).linear, upw_m),
                    rel(snr_xl_phased_equal(tx, rx, sc, BUDGET).linear, upw_p),
                    rel(snr_xl_phased_optimal(tx, rx, sc, BUDGET).linear, upw_p))
    verdict("C4 XL reduces to UPW within 1% at 100x half-aperture", worst < 0.01, f"worst {worst:.2e}")


def _fig2_curves(values):
    sc = Scenario.from_degrees(50.0, 0.0)
    out = {k: [] for k in ("mimo", "equal", "optimal", "upw_mimo", "upw_phased")}
    for v in values:
        arr = ArrayConfig(int(v), D)
        out["mimo"].append(snr_xl_mimo(arr, arr, sc, BUDGET).linear)
        out["equal"].append(snr_xl_phased_equal(arr, arr, sc, BUDGET).linear)
        out["optimal"].append(snr_xl_phased_optimal(arr, arr, sc, BUDGET).linear)
        out["upw_mimo"].append(snr_upw_mimo(int(v), sc, BUDGET).linear)
        out["upw_phased"].append(snr_upw_phased(int(v), int(v), sc, BUDGET).linear)
    return {k: np.array(x) for k, x in out.items()}


def test_c5a_fig2_small_arrays_agree(verdict):
    values = [v for v in figure_preset("fig2").values if v <= 33]
    c = _fig2_curves(values)
    gaps = [np.max(np.abs(10 * np.log10(c[xl] / c[upw])))
            for xl, upw in (("mimo", "upw_mimo"), ("equal", "upw_phased"), ("optimal", "upw_phased"))]
    verdict("C5a fig2: XL and UPW within 0.5 dB for M=N<=33", max(gaps) < 0.5, f"max gap {max(gaps):.4f} dB")


def test_c5b_fig2_mimo_interior_peak(verdict):
    values = np.array(figure_preset("fig2").values)
    xl = _fig2_curves(values)["mimo"]
    k = int(np.argmax(xl))
    interior = 0 < k < len(values) - 1
    # refine on the integer odd grid around the coarse peak
    lo, hi = int(values[max(k - 1, 0)]), int(values[min(k + 1, len(values) - 1)])
    dense = np.arange(lo | 1, hi + 1, 2)
    dense_curve = _fig2_curves(dense)["mimo"]
    m_star = int(dense[np.argmax(dense_curve)])
    peak = float(dense_curve.max())
    later = _fig2_curves([4 * m_star + 1])["mimo"][0]
    ok = interior and later < peak
    verdict("C5b fig2: XL-MIMO has interior argmax, lower at 4x argmax", ok,
            f"argmax M={m_star} ({db(peak):.3f} dB), 4x -> {db(later):.3f} dB")


def test_c5c_fig2_optimal_approaches_limit(verdict):
    values = list(figure_preset("fig2").values)
    if values[-1] < 100001:
        values.append(100001)
    opt = _fig2_curves(values)["optimal"]
    limit = snr_phased_limit(Scenario.from_degrees(50.0, 0.0), BUDGET, D, D).linear
    nondecreasing = bool(np.all(np.diff(opt) >= 0))
    below = bool(np.all(opt < limit))
    arr = ArrayConfig(100001, D)
    gap = db(limit) - snr_xl_phased_optimal(arr, arr, Scenario.from_degrees(50.0, 0.0), BUDGET).db
    ok = nondecreasing and below and gap < 0.1 and abs(db(limit) - 50.004) < 1e-3
    verdict("C5c fig2: phased-optimal nondecreasing, below limit, within 0.1 dB at M=N=1e5", ok,
            f"limit {db(limit):.4f} dB, gap {gap:.4f} dB")


def test_c6_fig3_range_sweep(verdict):
    arr = ArrayConfig(1025, D)
    far_gap = 0.0
    near = {}
    for r in figure_preset("fig3").values:
        sc = Scenario.from_degrees(r, 88.0)
        pairs = {
            "mimo": (snr_xl_mimo(arr, arr, sc, BUDGET).db, snr_upw_mimo(1025, sc, BUDGET).db),
            "equal": (snr_xl_phased_equal(arr, arr, sc, BUDGET).db, snr_upw_phased(1025, 1025, sc, BUDGET).db),
            "optimal": (snr_xl_phased_optimal(arr, arr, sc, BUDGET).db,
                        snr_upw_phased(1025, 1025, sc, BUDGET).db),
        }
        if r >= 1e4:
            far_gap = max(far_gap, max(abs(x - u) for x, u in pairs.values()))
        if r == 50.0:
            near = {k: x - u for k, (x, u) in pairs.items()}
    ok = far_gap < 0.5 and near and all(g > 3.0 for g in near.values())
    verdict("C6 fig3: <0.5 dB for r>=1e4, UPW >3 dB below XL at r=50", bool(ok),
            f"far {far_gap:.2e} dB, near " + ", ".join(f"{k} {g:.2f}" for k, g in near.items()))


def _ratio(mode, angle_deg):
    arr = ArrayConfig(1025, D)
    sc = Scenario.from_degrees(50.0, angle_deg)
    if mode == "mimo":
        return snr_xl_mimo(arr, arr, sc, BUDGET).linear / snr_upw_mimo(1025, sc, BUDGET).linear
    fn = snr_xl_phased_equal if mode == "equal" else snr_xl_phased_optimal
    return fn(arr, arr, sc, BUDGET).linear / snr_upw_phased(1025, 1025, sc, BUDGET).linear


def test_c7a_fig4_ratio_shape(verdict):
    angles = figure_preset("fig4").values
    odd = max(rel(_ratio(m, -a), _ratio(m, a)) for m in ("mimo", "equal", "optimal") for a in angles)
    growth = {m: abs(_ratio(m, 85) - 1) > abs(_ratio(m, 0) - 1) for m in ("mimo", "equal", "optimal")}
    ok = odd <= 1e-12 and all(growth.values())
    verdict("C7a fig4: ratio even in angle, deviation larger at 85 deg than at 0", ok,
            f"evenness {odd:.1e}, " + ", ".join(f"{m} {g}" for m, g in growth.items()))


def test_c7b_fig4_mimo_worse_than_equal(verdict):
    mimo, equal = abs(_ratio("mimo", 85) - 1), abs(_ratio("equal", 85) - 1)
    verdict("C7b fig4: MIMO deviation exceeds phased-equal's at 85 deg", mimo > equal * (1 + 1e-12),
            f"mimo {mimo:.4f}, equal {equal:.4f}")


def test_c7c_fig4_mimo_worse_than_optimal(verdict):
    # Both ratios reduce to the same product of span terms, so equal values
    # (to rounding) must not count as "exceeds".
    mimo, opt = abs(_ratio("mimo", 85) - 1), abs(_ratio("optimal", 85) - 1)
    verdict("C7c fig4: MIMO deviation exceeds phased-optimal's at 85 deg", mimo > opt * (1 + 1e-12),
            f"mimo {mimo:.15f}, optimal {opt:.15f}")


def test_c8_monte_carlo(verdict):
    t0 = time.perf_counter()
    tx = rx = ArrayConfig(17, D)
    sc = Scenario.from_degrees(50.0, 0.0)
    mc = McConfig(trials=10_000, seed=2024)
    gaps, amp = {}, {}
    res = simulate_mimo(tx, rx, sc, BUDGET, mc)
    gaps["mimo"] = abs(res.snr.db - exact_snr_mimo(tx, rx, sc, BUDGET).db)
    allocs = {p: power_alloc(p, tx, sc, BUDGET) for p in (EQUAL, OPTIMAL)}
    for p, alloc in allocs.items():
        r = simulate_phased(tx, rx, sc, BUDGET, alloc, mc)
        gaps[p] = abs(r.snr.db - exact_snr_phased(alloc, tx, rx, sc, BUDGET).db)

    quiet = McConfig(trials=2, noise_on=False)
    na = math.sqrt(norm_sq_exact(tx_steering(tx, BUDGET, sc.tx_range, sc.tx_angle)))
    nb = math.sqrt(norm_sq_exact(rx_steering(rx, BUDGET, sc.rx_range, sc.rx_angle)))
    signal = simulate_mimo(tx, rx, sc, BUDGET, quiet).signal
    amp["mimo"] = rel(abs(signal), BUDGET.kappa * math.sqrt(BUDGET.power / 17) * na * nb)
    for p, alloc in allocs.items():
        signal = simulate_phased(tx, rx, sc, BUDGET, alloc, quiet).signal
        # noise-free output power over sigma^2 is the oracle SNR
        exact = exact_snr_phased(alloc, tx, rx, sc, BUDGET).linear
        amp[p] = rel(abs(signal), math.sqrt(exact * BUDGET.noise))
    elapsed = time.perf_counter() - t0
    ok = max(gaps.values()) < 0.3 and max(amp.values()) <= 1e-10 and elapsed < 60.0
    verdict("C8 Monte Carlo within 0.3 dB, noise-free amplitude to 1e-10, runtime < 60 s", ok,
            ", ".join(f"{k} {g:.3f} dB" for k, g in gaps.items())
            + f", amp {max(amp.values()):.1e}, {elapsed:.1f} s")


def test_c9a_angular_span_properties(verdict):
    rng = np.random.default_rng(9)
    even = mono = bound = True
    for _ in range(300):
        k = int(rng.integers(1, 5000))
        r = float(rng.uniform(1.0, 500.0))
        a = float(rng.uniform(-1.5, 1.5))
        s = angular_span(k, D, r, a)
        even &= math.isclose(s, angular_span(k, D, r, -a), rel_tol=1e-14)
        mono &= angular_span(k + 2, D, r, a) > s and angular_span(k, D, r * 1.1, a) < s
        bound &= 0.0 < s < math.pi
    verdict("C9a angular span even, monotone in size and range, below pi", even and mono and bound,
            f"even {even}, monotone {mono}, bound {bound}")


def test_c9b_power_constraint(verdict):
    worst = 0.0
    for tx, _, sc in grid():
        for p in (EQUAL, OPTIMAL):
            alloc = power_alloc(p, tx, sc, BUDGET)
            worst = max(worst, rel(alloc.total_power(BUDGET.ref_gain), BUDGET.power))
    verdict("C9b allocations meet the power constraint to 1e-9", worst <= 1e-9, f"worst {worst:.1e}")


def test_c9c_equal_below_optimal(verdict):
    ok = True
    for tx, rx, sc in grid():
        eq = exact_snr_phased(power_alloc(EQUAL, tx, sc, BUDGET), tx, rx, sc, BUDGET).linear
        op = exact_snr_phased(power_alloc(OPTIMAL, tx, sc, BUDGET), tx, rx, sc, BUDGET).linear
        ok &= eq <= op * (1 + 1e-12)
    verdict("C9c equal allocation never beats optimal", ok)


def test_c9d_scan_peak_at_truth(verdict):
    tx = rx = ArrayConfig(65, D)
    sc = Scenario.from_degrees(8.0, 20.0, 10.0, -15.0)
    dr = np.linspace(-2.0, 2.0, 21)
    da = np.radians(np.linspace(-5.0, 5.0, 21))
    hits = []
    for mode in ("mimo", "phased"):
        g = scan_grid(tx, rx, sc, BUDGET, dr, da, mode=mode)
        hits.append(np.unravel_index(np.argmax(g), g.shape) == (10, 10) and math.isclose(g[10, 10], 1.0))
    verdict("C9d 21x21 beam scan peaks at the matched probe", all(hits), f"mimo {hits[0]}, phased {hits[1]}")


def test_c9e_monte_carlo_determinism(verdict):
    tx = rx = ArrayConfig(9, D)
    sc = Scenario.from_degrees(20.0, 30.0)
    mc = McConfig(trials=3000, seed=5)
    alloc = power_alloc(EQUAL, tx, sc, BUDGET)
    mimo = {w: simulate_mimo(tx, rx, sc, BUDGET, mc, workers=w).snr.linear for w in (1, 2, 4, 8)}
    ph = {w: simulate_phased(tx, rx, sc, BUDGET, alloc, mc, workers=w).snr.linear for w in (1, 2, 4, 8)}
    ok = len(set(mimo.values())) == 1 and len(set(ph.values())) == 1
    verdict("C9e seeded Monte Carlo bit-identical across worker counts", ok)
