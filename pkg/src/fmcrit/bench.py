"""Success-rate and criteria experiments, CSV I/O and aggregation.

Every (level, rep) draws from its own rng substream seeded by
(seed, experiment id, level index, rep index, ...), so results do not
depend on execution order.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field, fields
from typing import Iterable, Literal

import numpy as np

from .criteria import KanataniConfig, hartley_sturm_correct, kanatani_correct, sampson_sq, sed_sq
from .errors import GenerationError, GeometryError, NumericalFailure, SchemaMismatch
from .geometry import fm_from_cameras
from .recg import RecgConfig, generate
from .scenegen import SceneGenConfig, random_camera_pair

log = logging.getLogger(__name__)

Variant = Literal["gp", "parametric"]

SUCCESS_EXPERIMENT = 1
CRITERIA_EXPERIMENT = 2
MAX_ATTEMPTS = 10

SUCCESS_HEADER = ("re_level", "variant", "rep", "trials", "succeeded")
CRITERIA_HEADER = (
    "re_level", "rep", "re_sq", "sed_sq", "re1_sq", "rek_sq", "ds", "d1", "dk",
    "te_ns", "ts_ns", "t1_ns", "tk_ns", "ik",
)
TIMING_COLUMNS = ("te_ns", "ts_ns", "t1_ns", "tk_ns")

_SEED_MODE = {"gp": "generate_project", "parametric": "parametric"}


@dataclass(frozen=True)
class BenchConfig:
    scene: SceneGenConfig = field(default_factory=SceneGenConfig)
    max_trials: int = 200
    kanatani: KanataniConfig = field(default_factory=KanataniConfig)
    variants: tuple[Variant, ...] = ("gp", "parametric")
    # seed mode of the generator feeding the criteria experiment
    criteria_variant: Variant = "gp"

    def __post_init__(self):
        if self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")
        if not self.variants or any(v not in _SEED_MODE for v in self.variants):
            raise ValueError(f"variants must be a non-empty subset of {tuple(_SEED_MODE)}")
        if self.criteria_variant not in _SEED_MODE:
            raise ValueError(f"unknown criteria_variant {self.criteria_variant!r}")


@dataclass(frozen=True)
class SuccessRateRecord:
    re_level: float
    variant: str
    rep: int
    trials: int
    succeeded: bool


@dataclass(frozen=True)
class MeasurementRecord:
    re_level: float
    rep: int
    re_sq: float
    sed_sq: float
    re1_sq: float
    rek_sq: float
    ds: float
    d1: float
    dk: float
    te_ns: int
    ts_ns: int
    t1_ns: int
    tk_ns: int
    ik: int
    rek_converged: bool = True  # not serialized


@dataclass(frozen=True)
class AggregateRow:
    re_level: float
    key: str
    mean: float
    std: float
    n: int


def relative_differences(re_sq: float, sed: float, re1: float, rek: float) -> tuple[float, float, float]:
    """(DS, D1, DK) in percent."""
    return (
        (0.5 * sed - re_sq) / re_sq * 100.0,
        (re1 - re_sq) / re_sq * 100.0,
        (rek - re_sq) / re_sq * 100.0,
    )


def parse_levels(text: str) -> list[float]:
    """Comma list of values, or ``decades:lo:hi`` for 10**k with lo <= k <= hi."""
    text = text.strip()
    if text.startswith("decades:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected decades:lo:hi, got {text!r}")
        lo, hi = int(parts[1]), int(parts[2])
        if lo > hi:
            raise ValueError("decades: lo must not exceed hi")
        return [float(10.0 ** k) for k in range(lo, hi + 1)]
    levels = [float(x) for x in text.split(",") if x.strip()]
    if not levels:
        raise ValueError("no levels given")
    if any(not (math.isfinite(x) and x > 0) for x in levels):
        raise ValueError("levels must be positive and finite")
    return levels


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(list(key))


def _check_run(levels, reps):
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if not levels:
        raise ValueError("no levels given")


# -- experiment 1 ------------------------------------------------------------

def run_success_rate(levels: Iterable[float], reps: int, cfg: BenchConfig, seed: int) -> list[SuccessRateRecord]:
    """Trials needed by each generator variant, per level and rep.

    Generation errors count as failures at the trial cap.
    """
    levels = list(levels)
    _check_run(levels, reps)
    records = []
    for li, level in enumerate(levels):
        for rep in range(reps):
            cams = random_camera_pair(cfg.scene, _rng(seed, SUCCESS_EXPERIMENT, li, rep, 0))
            try:
                F = fm_from_cameras(*cams)
            except GeometryError:
                F = None
            for vi, variant in enumerate(("gp", "parametric")):
                if variant not in cfg.variants:
                    continue
                rcfg = RecgConfig(level, max_trials=cfg.max_trials, seed_mode=_SEED_MODE[variant])
                rng = _rng(seed, SUCCESS_EXPERIMENT, li, rep, vi + 1)
                try:
                    if F is None:
                        raise GenerationError("degenerate camera pair")
                    trials, ok = generate(F, rcfg, rng, cams).trials_used, True
                except (GenerationError, GeometryError, NumericalFailure) as exc:
                    log.debug("level %g rep %d %s: %s", level, rep, variant, exc)
                    trials, ok = cfg.max_trials, False
                records.append(SuccessRateRecord(level, variant, rep, trials, ok))
    return records


# -- experiment 2 ------------------------------------------------------------

def _timed(fn, *args):
    fn(*args)  # warm-up, discarded
    start = time.perf_counter_ns()
    out = fn(*args)
    return out, time.perf_counter_ns() - start


def _measure(level: float, rep: int, cfg: BenchConfig, rng) -> MeasurementRecord:
    cams = random_camera_pair(cfg.scene, rng)
    F = fm_from_cameras(*cams)
    rcfg = RecgConfig(level, max_trials=cfg.max_trials, seed_mode=_SEED_MODE[cfg.criteria_variant])
    B = generate(F, rcfg, rng, cams).correspondence
    hs, te = _timed(hartley_sturm_correct, F, B)
    sed, ts = _timed(sed_sq, F, B)
    re1, t1 = _timed(sampson_sq, F, B)
    kan, tk = _timed(kanatani_correct, F, B, cfg.kanatani)
    ds, d1, dk = relative_differences(hs.e_sq, sed, re1, kan.e_sq)
    return MeasurementRecord(
        level, rep, hs.e_sq, sed, re1, kan.e_sq, ds, d1, dk, te, ts, t1, tk, kan.iterations, kan.converged
    )


def run_criteria(levels: Iterable[float], reps: int, cfg: BenchConfig, seed: int) -> list[MeasurementRecord]:
    """Evaluate RE, SED, RE1 and REK on one generated correspondence per (level, rep).

    A rep whose draw fails is retried with fresh cameras up to
    ``MAX_ATTEMPTS`` times and otherwise left out (and logged).
    """
    levels = list(levels)
    _check_run(levels, reps)
    records = []
    missing = 0
    for li, level in enumerate(levels):
        for rep in range(reps):
            for attempt in range(MAX_ATTEMPTS):
                try:
                    records.append(_measure(level, rep, cfg, _rng(seed, CRITERIA_EXPERIMENT, li, rep, attempt)))
                    break
                except (GenerationError, GeometryError, NumericalFailure) as exc:
                    log.info("level %g rep %d attempt %d failed: %s", level, rep, attempt, exc)
            else:
                missing += 1
                log.warning("level %g rep %d missing after %d attempts", level, rep, MAX_ATTEMPTS)
    if missing:
        log.warning("%d reps missing from the criteria experiment", missing)
    return records


# -- aggregation -------------------------------------------------------------

def aggregate(records, keys: Iterable[str], group_by: str | None = None) -> list[AggregateRow]:
    """Sample mean and std (n - 1) of each field in ``keys`` per re_level.

    ``group_by`` names a further grouping field (e.g. "variant"); its value is
    prefixed to the key as ``value:field``.
    """
    keys = list(keys)
    groups: dict[tuple[float, str], list[float]] = defaultdict(list)
    order = []
    for r in records:
        prefix = f"{getattr(r, group_by)}:" if group_by else ""
        for k in keys:
            gk = (r.re_level, prefix + k)
            if gk not in groups:
                order.append(gk)
            groups[gk].append(float(getattr(r, k)))
    if not groups:
        raise ValueError("nothing to aggregate")
    rows = []
    for level, key in sorted(order, key=lambda g: (g[0], order.index(g))):
        vals = np.array(groups[(level, key)])
        std = float(vals.std(ddof=1)) if vals.size > 1 else math.nan
        rows.append(AggregateRow(level, key, float(vals.mean()), std, int(vals.size)))
    return rows


# -- CSV -----------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _bool(s: str) -> bool:
    if s not in ("0", "1"):
        raise ValueError(f"expected 0 or 1, got {s!r}")
    return s == "1"


_LAYOUTS = {
    SUCCESS_HEADER: (SuccessRateRecord, (float, str, int, int, _bool)),
    CRITERIA_HEADER: (MeasurementRecord, (float, int) + (float,) * 7 + (int,) * 5),
    ("re_level", "key", "mean", "std", "n"): (AggregateRow, (float, str, float, float, int)),
}


def _header_of(records) -> tuple[str, ...]:
    for header, (cls, _) in _LAYOUTS.items():
        if all(isinstance(r, cls) for r in records):
            return header
    raise TypeError("records must all be of one record type")


def write_csv(records, path, header: tuple[str, ...] | None = None) -> None:
    """Write records with the header matching their type.

    An empty list needs an explicit ``header``.
    """
    records = list(records)
    if header is None:
        if not records:
            raise ValueError("empty record list: pass header explicitly")
        header = _header_of(records)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in records:
            w.writerow([_fmt(getattr(r, name)) for name in header])


def read_csv(path) -> list:
    """Read a file written by :func:`write_csv`; the header selects the record type."""
    with open(path, newline="") as f:
        rows = csv.reader(f)
        try:
            header = tuple(next(rows))
        except StopIteration:
            raise SchemaMismatch(1, "empty file") from None
        if header not in _LAYOUTS:
            raise SchemaMismatch(1, f"unknown header {','.join(header)}")
        cls, parsers = _LAYOUTS[header]
        out = []
        for lineno, row in enumerate(rows, start=2):
            if len(row) != len(header):
                raise SchemaMismatch(lineno, f"expected {len(header)} fields, got {len(row)}")
            try:
                values = [p(v) for p, v in zip(parsers, row)]
            except ValueError as exc:
                raise SchemaMismatch(lineno, str(exc)) from None
            out.append(cls(*values))
    return out


def strip_timing(path) -> str:
    """CSV text with the timing columns removed (for determinism checks)."""
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        return ""
    keep = [i for i, name in enumerate(rows[0]) if name not in TIMING_COLUMNS]
    return "\n".join(",".join(row[i] for i in keep) for row in rows) + "\n"


def record_fields(cls) -> list[str]:
    return [f.name for f in fields(cls)]
