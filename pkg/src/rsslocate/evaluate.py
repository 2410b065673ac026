"""Batch evaluation: error metrics, method comparisons, segmentation studies.

Every run is fully determined by its config (scenario, methods, seeds,
grid sizes), so repeated invocations emit byte-identical CSV files. Rows
are sorted by (method, m, seed) before export regardless of the order
they were produced in.
"""

from __future__ import annotations

import csv
import re
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from .core import FingerprintDatabase, InvalidInputError
from .estimators import KnnLocalizer, RbfLocalizer, ThreeNNFLocalizer
from .geometry import euclid
from .segmentation import SegmentationParams, partition_manual, segment_auto
from .simulate import PRESETS, Scenario, load_scenario, query_at, survey, test_points

SEG_AUTO = "auto"
SEG_MANUAL = "manual"
SEG_NONE = "none"

OUTCOME_OK = "ok"
OUTCOME_SEG_FAILED = "segmentation-failed"

_METHOD_RE = re.compile(r"^(3NNF|RBF|KNN(?:\((\d+)\))?)$", re.IGNORECASE)


def parse_method(spec: str) -> tuple[str, int | None]:
    """Canonical (label, k) for a method spec like '3NNF' or 'KNN(2)'."""
    m = _METHOD_RE.match(spec.strip())
    if not m:
        raise InvalidInputError(f"unknown method {spec!r} (expected 3NNF, KNN(k) or RBF)")
    name = m.group(1).upper()
    if name.startswith("KNN"):
        k = int(m.group(2)) if m.group(2) else 2
        if k < 1:
            raise InvalidInputError("KNN needs k >= 1")
        return f"KNN({k})", k
    return name, None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one evaluation run."""

    scenario: str = "office"
    methods: tuple[str, ...] = ("3NNF",)
    segmentation: str = SEG_MANUAL
    seeds: tuple[int, ...] = (0,)
    m_values: tuple[int | None, ...] = (None,)  # None = scenario default
    n_test: int = 25
    seg_params: SegmentationParams = field(default_factory=SegmentationParams)

    def __post_init__(self):
        if not self.methods:
            raise InvalidInputError("config needs at least one method")
        if not self.seeds:
            raise InvalidInputError("config needs at least one seed")
        if not self.m_values:
            raise InvalidInputError("config needs at least one m value")
        if self.segmentation not in (SEG_AUTO, SEG_MANUAL, SEG_NONE):
            raise InvalidInputError(
                f"segmentation mode must be {SEG_AUTO}, {SEG_MANUAL} or {SEG_NONE}"
            )
        if self.n_test < 1:
            raise InvalidInputError("n_test must be at least 1")
        for m in self.methods:
            parse_method(m)

    def resolve_scenario(self) -> Scenario:
        return load_scenario(self.scenario)


@dataclass(frozen=True)
class MetricsRow:
    """Per (method, m, seed) evaluation outcome."""

    method: str
    m: int
    seed: int
    outcome: str = OUTCOME_OK
    mean_error: float | None = None
    median_error: float | None = None
    max_error: float | None = None
    errors: tuple[float, ...] = ()
    subarea_hit_rate: float | None = None
    candidate_mean: float | None = None

    def __post_init__(self):
        if self.errors:
            if not all(e >= 0 and e == e and e != float("inf") for e in self.errors):
                raise InvalidInputError("per-point errors must be finite and non-negative")
            if not (0 <= self.median_error <= self.max_error):
                raise InvalidInputError("expected 0 <= median <= max")


_SORT_KEY = lambda r: (r.method, r.m, r.seed)  # noqa: E731  (merge order contract)


def _build_estimator(label: str, k: int | None):
    if label == "3NNF":
        return ThreeNNFLocalizer()
    if label == "RBF":
        return RbfLocalizer()
    return KnnLocalizer(k=k)


def _segment(db: FingerprintDatabase, scenario: Scenario, config: ExperimentConfig, seed: int):
    """Apply the configured segmentation; returns None on auto failure."""
    if config.segmentation == SEG_AUTO:
        report = segment_auto(db, config.seg_params, seed=seed)
        return report if report.success else None
    if config.segmentation == SEG_MANUAL:
        if not scenario.regions:
            raise InvalidInputError(
                f"scenario {scenario.name!r} has no regions for manual segmentation"
            )
        partition_manual(db, scenario.regions)
    return True


def _eval_points(scenario: Scenario, db: FingerprintDatabase, count: int, seed: int):
    """Test positions paired with their observed vectors.

    Positions falling exactly on a reference coordinate are redrawn so
    queries never trivially coincide with the survey grid.
    """
    taken = {rp.position for rp in db.reference_points}
    points = []
    extra = 0
    for i, p in enumerate(test_points(scenario, count, seed)):
        while p in taken:
            extra += 1
            p = test_points(scenario, count + extra, seed)[-1]
        points.append((p, query_at(scenario, p, seed, i)))
    return points


def run_experiment(config: ExperimentConfig) -> list[MetricsRow]:
    """Survey, segment and estimate for every (seed, m, method) combination."""
    scenario = config.resolve_scenario()
    rows = []
    for seed in config.seeds:
        for m in config.m_values:
            db = survey(scenario, m, seed)
            actual_m = len(db.reference_points)
            segmented = _segment(db, scenario, config, seed)
            if segmented is None:
                rows.extend(
                    MetricsRow(method=parse_method(spec)[0], m=actual_m, seed=seed,
                               outcome=OUTCOME_SEG_FAILED)
                    for spec in config.methods
                )
                continue
            queries = _eval_points(scenario, db, config.n_test, seed)
            for spec in config.methods:
                label, k = parse_method(spec)
                estimator = _build_estimator(label, k).fit(db)
                errors = []
                hits = 0
                for true_pos, v in queries:
                    result = estimator.locate(v)
                    errors.append(euclid(true_pos, result.position))
                    if result.subarea is not None:
                        region = db.get_subarea(result.subarea).region
                        hits += region.contains(true_pos)
                rows.append(
                    MetricsRow(
                        method=label,
                        m=actual_m,
                        seed=seed,
                        mean_error=statistics.fmean(errors),
                        median_error=statistics.median(errors),
                        max_error=max(errors),
                        errors=tuple(errors),
                        subarea_hit_rate=hits / len(queries) if label == "3NNF" else None,
                    )
                )
    return sorted(rows, key=_SORT_KEY)


def sweep_reference_points(config: ExperimentConfig) -> list[MetricsRow]:
    """run_experiment over a grid-size axis; needs at least two m values."""
    if len(set(config.m_values)) < 2:
        raise InvalidInputError("sweep needs at least two distinct m values")
    return run_experiment(config)


def _band(values) -> str:
    return f"{min(values):.1f}-{max(values):.1f}"


def compare_methods(rows: list[MetricsRow], area_size: str) -> str:
    """Plain-text method table: per-seed median error band per (method, m)."""
    groups: dict[tuple[str, int], list[float]] = {}
    for r in rows:
        if r.outcome == OUTCOME_OK:
            groups.setdefault((r.method, r.m), []).append(r.median_error)
    header = f"{'method':<10} {'area':<16} {'m':>4}  error band (m)"
    lines = [header, "-" * len(header)]
    for (method, m), medians in sorted(groups.items()):
        lines.append(f"{method:<10} {area_size:<16} {m:>4}  {_band(medians)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SegmentationOutcome:
    scenario: str
    seed: int
    m: int
    success: bool
    subarea_count: int
    failure_reasons: tuple[str, ...] = ()


@dataclass(frozen=True)
class RangeRow:
    scenario: str
    seed: int
    subarea: str
    beacon: str
    lo: float
    hi: float


def segmentation_study(
    seeds: tuple[int, ...] = tuple(range(20)),
    scenarios: tuple[str, ...] = tuple(sorted(PRESETS)),
    params: SegmentationParams | None = None,
) -> tuple[list[SegmentationOutcome], list[RangeRow]]:
    """Auto-segmentation outcomes plus per-subarea per-beacon ranges."""
    params = params or SegmentationParams()
    outcomes, ranges = [], []
    for name in scenarios:
        scenario = load_scenario(name)
        for seed in seeds:
            db = survey(scenario, None, seed)
            report = segment_auto(db, params, seed=seed)
            reasons = tuple(sorted({reason for _, reason in report.failures}))
            outcomes.append(
                SegmentationOutcome(
                    scenario=name,
                    seed=seed,
                    m=len(db.reference_points),
                    success=report.success,
                    subarea_count=len(db.subareas),
                    failure_reasons=reasons,
                )
            )
            for sub in db.subareas:
                for bid in sorted(sub.feature.ranges):
                    lo, hi = sub.feature.ranges[bid]
                    ranges.append(RangeRow(name, seed, sub.id, bid, lo, hi))
    return outcomes, ranges


# -- CSV export --------------------------------------------------------

METRICS_COLUMNS = (
    "method",
    "m",
    "seed",
    "outcome",
    "mean_error",
    "median_error",
    "max_error",
    "subarea_hit_rate",
    "candidate_mean",
    "errors",
)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export_csv(rows: list[MetricsRow], path: str | Path) -> None:
    """Stable-column CSV; floats use repr so reads round-trip exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        for r in sorted(rows, key=_SORT_KEY):
            writer.writerow(
                [
                    r.method,
                    r.m,
                    r.seed,
                    r.outcome,
                    _cell(r.mean_error),
                    _cell(r.median_error),
                    _cell(r.max_error),
                    _cell(r.subarea_hit_rate),
                    _cell(r.candidate_mean),
                    ";".join(repr(e) for e in r.errors),
                ]
            )


def read_metrics_csv(path: str | Path) -> list[MetricsRow]:
    """Inverse of export_csv."""
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                MetricsRow(
                    method=rec["method"],
                    m=int(rec["m"]),
                    seed=int(rec["seed"]),
                    outcome=rec["outcome"],
                    mean_error=float(rec["mean_error"]) if rec["mean_error"] else None,
                    median_error=float(rec["median_error"]) if rec["median_error"] else None,
                    max_error=float(rec["max_error"]) if rec["max_error"] else None,
                    errors=tuple(float(v) for v in rec["errors"].split(";") if v),
                    subarea_hit_rate=(
                        float(rec["subarea_hit_rate"]) if rec["subarea_hit_rate"] else None
                    ),
                    candidate_mean=float(rec["candidate_mean"]) if rec["candidate_mean"] else None,
                )
            )
    return rows


def export_outcomes_csv(outcomes: list[SegmentationOutcome], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("scenario", "seed", "m", "success", "subarea_count", "failure_reasons"))
        for o in sorted(outcomes, key=lambda o: (o.scenario, o.seed)):
            writer.writerow(
                [o.scenario, o.seed, o.m, int(o.success), o.subarea_count,
                 ";".join(o.failure_reasons)]
            )


def export_ranges_csv(ranges: list[RangeRow], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("scenario", "seed", "subarea", "beacon", "lo", "hi"))
        for r in sorted(ranges, key=lambda r: (r.scenario, r.seed, r.subarea, r.beacon)):
            writer.writerow([r.scenario, r.seed, r.subarea, r.beacon, repr(r.lo), repr(r.hi)])
