"""Subarea construction: per-beacon feature ranges and floor division.

A subarea's feature is one closed RSS interval per beacon, spanning the
readings of its member reference points. A candidate region is accepted
when it has enough points, its ranges are narrow (cohesion), and at least
one beacon separates it from every accepted subarea (distinctness).

Division runs in two modes: a manual check-then-commit workflow driven by
operator-drawn rectangles, and an autonomous recursive bisection with
seeded split jitter.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    ConflictError,
    FeatureSet,
    FingerprintDatabase,
    InvalidInputError,
    NoOverlapError,
    RawSampleBatch,
    ReferencePoint,
    RssVector,
    StaleStateError,
    Subarea,
)
from .geometry import Rect
from .simulate import NS_SEGMENT, substream

REASON_OK = "ok"
REASON_NOT_COHESIVE = "not-cohesive"
REASON_TOO_FEW = "too-few-points"
REASON_BUDGET = "budget-exhausted"
REASON_NOT_DISTINCT = "not-distinct"


@dataclass(frozen=True)
class SegmentationParams:
    """Thresholds governing both segmentation modes.

    margin is the slack applied by the online matching phase; cohesion
    and distinctness checks here always use raw intervals.
    """

    margin: float = 2.0
    max_range_width: float = 15.0
    min_cell_size: float = 2.0
    max_iterations: int = 256
    min_points_per_subarea: int = 3

    def __post_init__(self):
        if not (self.margin > 0 and self.max_range_width > 0 and self.min_cell_size > 0):
            raise InvalidInputError("margin, max_range_width, min_cell_size must be > 0")
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")
        if self.min_points_per_subarea < 1:
            raise InvalidInputError("min_points_per_subarea must be >= 1")


@dataclass(frozen=True)
class SegmentationVerdict:
    """Outcome of checking one candidate region; reason is ok iff accepted."""

    accepted: bool
    reason: str
    feature: FeatureSet | None = None
    point_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if self.accepted != (self.reason == REASON_OK):
            raise InvalidInputError("verdict accepted flag must agree with reason")


@dataclass(frozen=True)
class SegmentationReport:
    """Result of an autonomous run: subareas on success, leaves at fault otherwise."""

    success: bool
    subareas: tuple[Subarea, ...] = ()
    failures: tuple[tuple[Rect, str], ...] = ()
    iterations: int = 0

    def to_document(self) -> dict:
        return {
            "success": self.success,
            "iterations": self.iterations,
            "subareas": [
                {
                    "id": s.id,
                    "rect": list(s.region.as_tuple()),
                    "feature": {bid: [lo, hi] for bid, (lo, hi) in s.feature.ranges.items()},
                }
                for s in self.subareas
            ],
            "failures": [
                {"rect": list(rect.as_tuple()), "reason": reason} for rect, reason in self.failures
            ],
        }


# -- feature algebra ---------------------------------------------------


def feature_of(points: Sequence[ReferencePoint]) -> FeatureSet:
    """[min, max] per beacon over the readings of points that observed it."""
    if not points:
        raise InvalidInputError("cannot build a feature from zero points")
    ranges: dict[str, tuple[float, float]] = {}
    for rp in points:
        for bid, value in rp.vector.readings.items():
            lo, hi = ranges.get(bid, (value, value))
            ranges[bid] = (min(lo, value), max(hi, value))
    return FeatureSet(ranges)


def matches_feature(v: RssVector, f: FeatureSet, margin: float) -> bool:
    """True iff every shared beacon's reading is inside the inflated range.

    Vacuously false when v and f share no beacon.
    """
    shared = set(v.readings) & set(f.ranges)
    if not shared:
        return False
    return all(
        f.ranges[bid][0] - margin <= v.readings[bid] <= f.ranges[bid][1] + margin
        for bid in shared
    )


def box_distance(v: RssVector, f: FeatureSet) -> float:
    """Euclidean distance from v to the feature box over shared beacons."""
    shared = set(v.readings) & set(f.ranges)
    if not shared:
        raise NoOverlapError("vector and feature share no beacon")
    total = 0.0
    for bid in shared:
        lo, hi = f.ranges[bid]
        x = v.readings[bid]
        violation = lo - x if x < lo else (x - hi if x > hi else 0.0)
        total += violation * violation
    return total**0.5


def is_distinct(a: FeatureSet, b: FeatureSet, margin: float = 0.0) -> bool:
    """True iff some shared beacon has disjoint margin-inflated intervals."""
    for bid in set(a.ranges) & set(b.ranges):
        alo, ahi = a.ranges[bid]
        blo, bhi = b.ranges[bid]
        if ahi + margin < blo - margin or bhi + margin < alo - margin:
            return True
    return False


def _range_width_ok(f: FeatureSet, max_width: float) -> bool:
    return all(hi - lo <= max_width for lo, hi in f.ranges.values())


# -- manual mode -------------------------------------------------------


def _unassigned_in(db: FingerprintDatabase, region: Rect) -> list[ReferencePoint]:
    # only points not yet claimed by a subarea are eligible for a new one
    return [
        rp
        for rp in db.reference_points
        if rp.subarea is None and region.contains(rp.position)
    ]


def segment_manual_check(
    db: FingerprintDatabase, region: Rect, params: SegmentationParams | None = None
) -> SegmentationVerdict:
    """Judge an operator-drawn rectangle without mutating anything."""
    params = params or SegmentationParams()
    if db.bounds is not None and not region.intersects(db.bounds):
        raise InvalidInputError("region does not intersect the floor bounds")
    points = _unassigned_in(db, region)
    if len(points) < params.min_points_per_subarea:
        return SegmentationVerdict(False, REASON_TOO_FEW)
    feature = feature_of(points)
    ids = tuple(rp.id for rp in points)
    if not _range_width_ok(feature, params.max_range_width):
        return SegmentationVerdict(False, REASON_NOT_COHESIVE, feature, ids)
    for s in db.subareas:
        if not is_distinct(feature, s.feature):
            return SegmentationVerdict(False, f"not-distinct-from:{s.id}", feature, ids)
    return SegmentationVerdict(True, REASON_OK, feature, ids)


def _next_subarea_id(db: FingerprintDatabase) -> str:
    n = 0
    while True:
        n += 1
        candidate = f"A{n}"
        if not db.has_subarea(candidate):
            return candidate


def commit_subarea(
    db: FingerprintDatabase,
    region: Rect,
    feature: FeatureSet,
    subarea_id: str | None = None,
) -> str:
    """Store a checked region; member points get the new subarea id.

    The feature is recomputed against current state; any difference from
    the checked feature means the database moved on, which is a conflict.
    """
    points = _unassigned_in(db, region)
    if not points or feature_of(points) != feature:
        raise ConflictError("stale verdict: reference points changed since the check")
    sid = subarea_id if subarea_id is not None else _next_subarea_id(db)
    if db.has_subarea(sid):
        raise ConflictError(f"subarea id {sid!r} already exists")
    db.subareas.append(Subarea(sid, region, feature))
    for rp in points:
        rp.subarea = sid
    return sid


def partition_manual(db: FingerprintDatabase, regions: Iterable[Rect]) -> list[str]:
    """Commit an operator-supplied partition without cohesion gating.

    Regions with no eligible points are skipped. This mirrors an operator
    accepting a floor layout wholesale instead of drawing one rectangle
    at a time.
    """
    ids = []
    for region in regions:
        points = _unassigned_in(db, region)
        if not points:
            continue
        ids.append(commit_subarea(db, region, feature_of(points)))
    return ids


# -- autonomous mode ---------------------------------------------------


def _choose_split(
    rect: Rect, points: Sequence[ReferencePoint], min_cell: float, min_points: int, rng
) -> tuple[str, float] | None:
    """Pick (axis, position) jittered within the middle third, or None.

    The longer axis is preferred. A valid position keeps both children at
    least min_cell wide and leaves neither child with fewer than
    min_points points; the seeded draw is snapped to the nearest such
    position (a midpoint between adjacent point coordinates).
    """
    axes = ["x", "y"] if rect.width >= rect.height else ["y", "x"]
    for axis in axes:
        lo, hi = (rect.x0, rect.x1) if axis == "x" else (rect.y0, rect.y1)
        a = max(lo + (hi - lo) / 3.0, lo + min_cell)
        b = min(hi - (hi - lo) / 3.0, hi - min_cell)
        if a > b:
            continue
        idx = 0 if axis == "x" else 1
        all_coords = sorted(rp.position[idx] for rp in points)
        distinct = sorted(set(all_coords))
        valid = []
        for c1, c2 in zip(distinct, distinct[1:]):
            gap = (c1 + c2) / 2.0
            low_count = bisect.bisect_right(all_coords, c1)
            if a <= gap <= b and low_count >= min_points and len(points) - low_count >= min_points:
                valid.append(gap)
        if valid:
            draw = float(rng.uniform(a, b))
            return axis, min(valid, key=lambda g: (abs(g - draw), g))
    return None


class _AutoState:
    def __init__(self, params: SegmentationParams, rng):
        self.params = params
        self.rng = rng
        self.leaves: list[tuple[Rect, list[ReferencePoint], FeatureSet]] = []
        self.failures: list[tuple[Rect, str]] = []
        self.iterations = 0

    @property
    def budget_left(self) -> bool:
        return self.iterations < self.params.max_iterations

    def attempt(self, rect: Rect, points) -> list[tuple[Rect, list]] | None:
        """One division of (rect, points), or None when stuck or out of budget."""
        if not self.budget_left:
            return None
        choice = _choose_split(
            rect, points, self.params.min_cell_size, self.params.min_points_per_subarea, self.rng
        )
        if choice is None:
            return None
        self.iterations += 1
        axis, pos = choice
        low_rect, high_rect = rect.split(0 if axis == "x" else 1, pos)
        coord = (lambda p: p[0]) if axis == "x" else (lambda p: p[1])
        low = [rp for rp in points if coord(rp.position) <= pos]
        high = [rp for rp in points if coord(rp.position) > pos]
        return [(low_rect, low), (high_rect, high)]

    def process(self, rect: Rect, points: list[ReferencePoint]) -> None:
        """Drive (rect, points) down to cohesive leaves or failure records."""
        stack = [(rect, points)]
        while stack:
            rect, points = stack.pop()
            if not points:
                continue  # uncovered floor space carries no fingerprints
            if len(points) < self.params.min_points_per_subarea:
                self.failures.append((rect, REASON_TOO_FEW))
                continue
            feature = feature_of(points)
            if _range_width_ok(feature, self.params.max_range_width):
                self.leaves.append((rect, points, feature))
                continue
            reason = REASON_NOT_COHESIVE if self.budget_left else REASON_BUDGET
            children = self.attempt(rect, points)
            if children is None:
                self.failures.append((rect, reason))
            else:
                stack.extend(reversed(children))


def segment_auto(
    db: FingerprintDatabase,
    params: SegmentationParams | None = None,
    seed: int = 0,
) -> SegmentationReport:
    """Divide the whole floor by recursive seeded bisection.

    Splits continue until every occupied leaf is cohesive; a global pass
    then re-splits leaves that are not pairwise distinct. On success all
    subareas are committed atomically; on failure nothing is committed
    and the offending leaves are reported. Deterministic per seed.
    """
    params = params or SegmentationParams()
    if db.subareas:
        raise ConflictError("database already has subareas; segment a fresh copy instead")
    if len(db.reference_points) < params.min_points_per_subarea:
        raise InvalidInputError("too few reference points to form a single subarea")
    root = db.bounds if db.bounds is not None else Rect.bounding(
        [rp.position for rp in db.reference_points]
    )
    state = _AutoState(params, substream(seed, NS_SEGMENT))
    state.process(root, list(db.reference_points))

    # distinctness pass: re-split a member of any indistinct pair,
    # preferring the one with more points, until no pair clashes
    while not state.failures:
        clash = None
        for i in range(len(state.leaves)):
            for j in range(i + 1, len(state.leaves)):
                if not is_distinct(state.leaves[i][2], state.leaves[j][2]):
                    clash = (i, j)
                    break
            if clash:
                break
        if clash is None:
            break
        order = sorted(
            clash,
            key=lambda k: (-len(state.leaves[k][1]), -state.leaves[k][0].area, k),
        )
        for target in order:
            rect, points, _ = state.leaves[target]
            children = state.attempt(rect, points)
            if children is not None:
                state.leaves.pop(target)
                for r, pts in children:
                    state.process(r, pts)
                break
        else:
            reason = REASON_NOT_DISTINCT if state.budget_left else REASON_BUDGET
            state.failures.append((state.leaves[clash[0]][0], reason))

    if state.failures:
        return SegmentationReport(False, (), tuple(state.failures), state.iterations)

    state.leaves.sort(key=lambda leaf: (leaf[0].y0, leaf[0].x0))
    subareas = []
    for n, (rect, points, feature) in enumerate(state.leaves, start=1):
        sid = f"A{n}"
        subareas.append(Subarea(sid, rect, feature))
        for rp in points:
            rp.subarea = sid
    db.subareas.extend(subareas)
    return SegmentationReport(True, tuple(subareas), (), state.iterations)


# -- recovery ----------------------------------------------------------


def resegment_subarea(
    db: FingerprintDatabase, subarea_id: str, batches: Sequence[RawSampleBatch]
) -> Subarea:
    """Replace one subarea's member points with freshly collected ones.

    Only the target subarea's members and feature change; every other
    subarea (and its members) keeps its exact serialized form.
    """
    try:
        index = next(i for i, s in enumerate(db.subareas) if s.id == subarea_id)
    except StopIteration:
        raise StaleStateError(f"subarea {subarea_id!r} does not exist") from None
    old = db.subareas[index]
    if not batches:
        raise InvalidInputError("need at least one fresh sample batch")
    known = db.beacon_ids()
    for batch in batches:
        if not old.region.contains(batch.point):
            raise InvalidInputError(f"fresh point {batch.point} lies outside the subarea region")
        unknown = set(batch.samples) - known
        if unknown:
            raise InvalidInputError(f"fresh batch references unknown beacons {sorted(unknown)}")

    db.reference_points = [rp for rp in db.reference_points if rp.subarea != subarea_id]
    members = []
    for batch in batches:
        rp_id = db.add_reference_point(batch.point, batch)
        rp = db.get_reference_point(rp_id)
        rp.subarea = subarea_id
        members.append(rp)
    updated = Subarea(subarea_id, old.region, feature_of(members))
    db.subareas[index] = updated
    return updated
