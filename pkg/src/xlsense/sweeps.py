"""Parameter sweeps, figure presets, config files and CSV output.

Sweep values are in external units: metres for ranges and spacings,
degrees for angles, plain counts for element numbers.
"""

from __future__ import annotations

import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .geometry import ArrayConfig, DomainError, Scenario
from .oracle import EQUAL, OPTIMAL, oracle_snr, power_alloc
from .response import LinkBudget
from .simkit import McConfig, simulate_mimo, simulate_phased
from .snr_laws import ALL_MODES, Mode, Model, ModeSpec, closed_form_snr

CSV_HEADER = ("variable", "value", "mode", "model", "estimator", "snr_linear", "snr_db", "provenance")
RATIO_MODEL = "xl/upw"

# shared defaults of the published simulation setup
PUBLISHED_RANGE = 50.0
PUBLISHED_SPACING = 0.0628
PUBLISHED_GAIN_DB = 50.0


class Estimator(str, Enum):
    CLOSED_FORM = "closed_form"
    ORACLE = "oracle"
    MONTE_CARLO = "montecarlo"


class ConfigError(ValueError):
    """Malformed sweep configuration or unknown preset (a usage error)."""


# variable name -> the fields it drives
VARIABLES = {
    "elements": ("tx_elements", "rx_elements"),
    "range": ("tx_range", "rx_range"),
    "angle": ("tx_angle", "rx_angle"),
    "tx_elements": ("tx_elements",),
    "rx_elements": ("rx_elements",),
    "tx_range": ("tx_range",),
    "rx_range": ("rx_range",),
    "tx_angle": ("tx_angle",),
    "rx_angle": ("rx_angle",),
}


@dataclass(frozen=True)
class Point:
    """A fully specified evaluation point."""

    tx: ArrayConfig
    rx: ArrayConfig
    scenario: Scenario
    budget: LinkBudget


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    base: Point
    modes: tuple = ALL_MODES
    estimators: tuple = (Estimator.CLOSED_FORM, Estimator.ORACLE)
    ratio: bool = False  # emit XL/UPW ratios instead of SNRs
    mc: McConfig = field(default_factory=McConfig)
    mc_max_elements: int | None = 257
    name: str = "custom"

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ConfigError(f"unknown sweep variable {self.variable!r}; choose from {sorted(VARIABLES)}")
        if not self.values:
            raise ConfigError("sweep values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("sweep values must be strictly increasing")
        if self.variable.endswith("elements"):
            if any(int(v) != v or v < 1 or int(v) % 2 == 0 for v in self.values):
                raise ConfigError("element counts must be positive odd integers")
        if not self.modes or not self.estimators:
            raise ConfigError("at least one mode and one estimator are required")


@dataclass(frozen=True)
class SweepRow:
    variable: str
    value: float
    mode: str
    model: str
    estimator: str
    snr_linear: float
    snr_db: float
    provenance: str
    status: str = "ok"  # ok | error | skipped


def apply_value(point: Point, variable: str, value) -> Point:
    tx, rx, sc = point.tx, point.rx, point.scenario
    for target in VARIABLES[variable]:
        if target == "tx_elements":
            tx = replace(tx, elements=int(value))
        elif target == "rx_elements":
            rx = replace(rx, elements=int(value))
        elif target.endswith("angle"):
            sc = replace(sc, **{target: math.radians(value)})
        else:
            sc = replace(sc, **{target: float(value)})
    return Point(tx, rx, sc, point.budget)


def odd_grid(start: float, stop: float, count: int, log: bool = True) -> tuple:
    """Strictly increasing odd integers approximately spanning ``[start, stop]``."""
    raw = np.geomspace(start, stop, count) if log else np.linspace(start, stop, count)
    odd = {int(2 * math.floor(x / 2) + 1) for x in raw}
    return tuple(sorted(odd))


def _published_point(elements: int, rng: float, angle_deg: float) -> Point:
    arr = ArrayConfig(elements, PUBLISHED_SPACING)
    return Point(arr, arr, Scenario.from_degrees(rng, angle_deg), LinkBudget.from_gain_db(PUBLISHED_GAIN_DB))


def figure_preset(name: str) -> SweepSpec:
    """Sweep reproducing one of the published figures (``fig2``, ``fig3``, ``fig4``)."""
    if name == "fig2":
        # 1..33 densely so the small-array agreement is visible, then log-spaced to 1e5
        values = tuple(sorted(set(range(1, 34, 2)) | set(odd_grid(1, 100_001, 60))))
        return SweepSpec("elements", values, _published_point(1, PUBLISHED_RANGE, 0.0), name="fig2")
    if name == "fig3":
        # 1024 elements in the source setup; odd counts keep the array centred
        values = tuple(sorted(set(np.round(np.geomspace(10.0, 1e5, 41), 6).tolist()) | {50.0}))
        return SweepSpec("range", values, _published_point(1025, PUBLISHED_RANGE, 88.0), name="fig3")
    if name == "fig4":
        values = tuple(float(v) for v in range(-89, 90))
        modes = tuple(ModeSpec(m, Model.XL) for m in Mode)
        return SweepSpec("angle", values, _published_point(1025, PUBLISHED_RANGE, 0.0), modes=modes,
                         ratio=True, name="fig4")
    raise ConfigError(f"unknown figure preset {name!r}; choose fig2, fig3 or fig4")


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])


def evaluate(spec: ModeSpec, estimator: Estimator, p: Point, mc: McConfig | None = None,
             workers: int = 1):
    """Single SNR for one mode/model under one estimator."""
    if estimator is Estimator.CLOSED_FORM:
        return closed_form_snr(spec, p.tx, p.rx, p.scenario, p.budget)
    if estimator is Estimator.ORACLE:
        return oracle_snr(spec, p.tx, p.rx, p.scenario, p.budget)
    mc = mc or McConfig()
    model = spec.model.value
    if spec.mode is Mode.MIMO:
        return simulate_mimo(p.tx, p.rx, p.scenario, p.budget, mc, workers, model).snr
    policy = EQUAL if spec.mode is Mode.PHASED_EQUAL else OPTIMAL
    alloc = power_alloc(policy, p.tx, p.scenario, p.budget, model=model)
    return simulate_phased(p.tx, p.rx, p.scenario, p.budget, alloc, mc, workers, model).snr


def _fmt_db(lin: float) -> float:
    return 10.0 * math.log10(lin) if lin > 0 else -math.inf


def _evaluate_row(sweep: SweepSpec, index: int, value, mode: ModeSpec, est: Estimator) -> SweepRow:
    p = apply_value(sweep.base, sweep.variable, value)
    model = RATIO_MODEL if sweep.ratio else mode.model.value
    head = dict(variable=sweep.variable, value=value, mode=mode.mode.value, model=model, estimator=est.value)
    mc = None
    if est is Estimator.MONTE_CARLO:
        largest = max(p.tx.elements, p.rx.elements)
        if sweep.mc_max_elements is not None and largest > sweep.mc_max_elements:
            return SweepRow(**head, snr_linear=math.nan, snr_db=math.nan,
                            provenance=f"skipped: montecarlo limited to {sweep.mc_max_elements} elements",
                            status="skipped")
        mc = replace(sweep.mc, seed=_point_seed(sweep.mc.seed, index))
    try:
        if sweep.ratio:
            xl = evaluate(ModeSpec(mode.mode, Model.XL), est, p, mc)
            upw = evaluate(ModeSpec(mode.mode, Model.UPW), est, p, mc)
            lin = xl.linear / upw.linear
            prov = f"ratio {xl.source} / {upw.source}"
        else:
            res = evaluate(mode, est, p, mc)
            lin, prov = res.linear, res.source
    except DomainError as exc:
        return SweepRow(**head, snr_linear=math.nan, snr_db=math.nan, provenance=f"error: {exc}",
                        status="error")
    return SweepRow(**head, snr_linear=lin, snr_db=_fmt_db(lin), provenance=prov)


def run_sweep(sweep: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Evaluate every (value, mode, estimator) combination, in that nesting order."""
    jobs = [(v, m, e) for v in sweep.values for m in sweep.modes for e in sweep.estimators]

    def one(i):
        return _evaluate_row(sweep, i, *jobs[i])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(len(jobs))))
    return [one(i) for i in range(len(jobs))]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _value_fmt(variable: str, value) -> str:
    if variable.endswith("elements"):
        return str(int(value))
    return _fmt(float(value))


def format_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow((r.variable, _value_fmt(r.variable, r.value), r.mode, r.model, r.estimator,
                    _fmt(r.snr_linear), _fmt(r.snr_db), r.provenance))
    return buf.getvalue()


def emit_csv(rows, destination) -> int:
    """Write rows as UTF-8 CSV to a path, a text stream, or ``"-"`` (stdout); return bytes written."""
    data = format_csv(rows)
    nbytes = len(data.encode("utf-8"))
    if destination == "-":
        sys.stdout.write(data)
        sys.stdout.flush()
    elif hasattr(destination, "write"):
        destination.write(data)
    else:
        try:
            with open(destination, "w", encoding="utf-8", newline="") as fh:
                fh.write(data)
        except OSError as exc:
            raise OSError(f"cannot write CSV to {destination}: {exc.strerror or exc}") from exc
    return nbytes


# ---------------------------------------------------------------------------
# config files: flat key=value, '#' comments

CONFIG_KEYS = {
    "variable", "values", "start", "stop", "count", "grid",
    "elements", "tx_elements", "rx_elements",
    "spacing", "tx_spacing", "rx_spacing", "wavelength",
    "range", "tx_range", "rx_range", "angle", "tx_angle", "rx_angle",
    "gain_db", "power", "reflect_gain", "ref_gain", "noise",
    "modes", "estimators", "ratio", "trials", "seed", "code_length", "mc_max_elements", "name",
}


def parse_config(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _num(cfg, key, default, cast=float):
    if key not in cfg:
        return default
    try:
        return cast(cfg[key])
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {cfg[key]!r} as {cast.__name__}") from None


def parse_modes(text: str) -> tuple:
    if text.strip() == "all":
        return ALL_MODES
    try:
        return tuple(ModeSpec.parse(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"bad mode list {text!r}: {exc}") from None


def parse_estimators(text: str) -> tuple:
    try:
        return tuple(Estimator(t.strip()) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"bad estimator list {text!r}: {exc}") from None


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def build_point(cfg: dict) -> Point:
    """Base evaluation point from config keys; unspecified values use the published setup."""
    elements = _num(cfg, "elements", 65, int)
    spacing = _num(cfg, "spacing", PUBLISHED_SPACING)
    wavelength = _num(cfg, "wavelength", None)
    tx = ArrayConfig(_num(cfg, "tx_elements", elements, int), _num(cfg, "tx_spacing", spacing), wavelength)
    rx = ArrayConfig(_num(cfg, "rx_elements", elements, int), _num(cfg, "rx_spacing", spacing), wavelength)
    rng = _num(cfg, "range", PUBLISHED_RANGE)
    angle = _num(cfg, "angle", 0.0)
    sc = Scenario.from_degrees(_num(cfg, "tx_range", rng), _num(cfg, "tx_angle", angle),
                               _num(cfg, "rx_range", rng), _num(cfg, "rx_angle", angle))
    explicit = {"power", "reflect_gain", "ref_gain", "noise"} & cfg.keys()
    try:
        if explicit:
            if "gain_db" in cfg:
                raise ConfigError("give either gain_db or explicit power/reflect_gain/ref_gain/noise, not both")
            budget = LinkBudget(_num(cfg, "power", 1.0), _num(cfg, "reflect_gain", 1.0),
                                _num(cfg, "ref_gain", 1.0), _num(cfg, "noise", 1.0))
        else:
            budget = LinkBudget.from_gain_db(_num(cfg, "gain_db", PUBLISHED_GAIN_DB))
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    return Point(tx, rx, sc, budget)


def spec_from_config(cfg: dict) -> SweepSpec:
    if "variable" not in cfg:
        raise ConfigError("missing required key 'variable'")
    variable = cfg["variable"]
    if variable not in VARIABLES:
        raise ConfigError(f"unknown sweep variable {variable!r}")
    is_count = variable.endswith("elements")
    if "values" in cfg:
        if {"start", "stop", "count"} & cfg.keys():
            raise ConfigError("give either values or start/stop/count, not both")
        try:
            values = tuple(float(v) for v in cfg["values"].split(",") if v.strip())
        except ValueError:
            raise ConfigError(f"values: cannot parse {cfg['values']!r}") from None
        if is_count:
            values = tuple(int(v) if v == int(v) else v for v in values)
    elif {"start", "stop", "count"} <= cfg.keys():
        start, stop, count = _num(cfg, "start", 0.0), _num(cfg, "stop", 0.0), _num(cfg, "count", 0, int)
        grid = cfg.get("grid", "linear")
        if grid not in ("linear", "log"):
            raise ConfigError(f"grid must be linear or log, got {grid!r}")
        if count < 1:
            raise ConfigError("count must be >= 1")
        if is_count:
            values = odd_grid(start, stop, count, log=grid == "log")
        else:
            pts = np.geomspace(start, stop, count) if grid == "log" else np.linspace(start, stop, count)
            values = tuple(float(v) for v in pts)
    else:
        raise ConfigError("sweep needs values=... or start/stop/count")
    mc = McConfig(trials=_num(cfg, "trials", 10_000, int), code_length=_num(cfg, "code_length", None, int),
                  seed=_num(cfg, "seed", 0, int))
    limit = cfg.get("mc_max_elements")
    if limit is not None and limit.strip().lower() == "none":
        mc_max = None
    else:
        mc_max = _num(cfg, "mc_max_elements", 257, int)
    return SweepSpec(
        variable=variable,
        values=values,
        base=build_point(cfg),
        modes=parse_modes(cfg.get("modes", "all")),
        estimators=parse_estimators(cfg.get("estimators", "closed_form,oracle")),
        ratio=_bool(cfg.get("ratio", "false")),
        mc=mc,
        mc_max_elements=mc_max,
        name=cfg.get("name", "custom"),
    )


def load_config(path) -> SweepSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return spec_from_config(parse_config(text))
