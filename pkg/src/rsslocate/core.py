"""Core domain model for RSS fingerprint localization.

RSS readings are dimensionless non-negative link-quality magnitudes where
larger means stronger. Sources reporting dBm must be mapped onto this scale
at the ingestion boundary. A beacon that is out of range is simply absent
from a vector; there is no sentinel value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping, Sequence

from .geometry import Point, Rect, is_finite_point

FORMAT_VERSION = 1


class LocalizationError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(LocalizationError, ValueError):
    """An argument violates a documented precondition."""


class NoOverlapError(LocalizationError):
    """Two RSS vectors (or a vector and a feature) share no beacon."""


class ConflictError(LocalizationError):
    """A mutation clashes with existing database state."""


class StaleStateError(ConflictError):
    """A caller-held reference (subarea, revision) no longer exists."""


class UnlocatableError(LocalizationError):
    """A query vector cannot be related to any subarea feature."""


class DatabaseFormatError(LocalizationError, ValueError):
    """A persisted document cannot be parsed; message carries diagnostics."""


class VersionError(DatabaseFormatError):
    """A persisted document declares an unsupported format version."""


class NumericalError(LocalizationError):
    """A numerical solve failed; the message suggests a remedy."""


def _check_reading(beacon_id: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise InvalidInputError(
            f"reading for beacon {beacon_id!r} must be finite and >= 0, got {value!r}"
        )
    return value


@dataclass(frozen=True)
class BeaconNode:
    """Fixed transmitter of known planar position."""

    id: str
    position: Point
    tx_label: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise InvalidInputError("beacon id must be non-empty")
        if not is_finite_point(self.position):
            raise InvalidInputError(f"beacon {self.id!r} position not finite")
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))


@dataclass(frozen=True)
class RssVector:
    """Per-beacon averaged signal strength observed at one physical point."""

    readings: Mapping[str, float]

    def __post_init__(self) -> None:
        if not self.readings:
            raise InvalidInputError("an RSS vector needs at least one reading")
        clean = {bid: _check_reading(bid, v) for bid, v in self.readings.items()}
        object.__setattr__(self, "readings", clean)

    @property
    def beacons(self) -> frozenset[str]:
        return frozenset(self.readings)

    def __getitem__(self, beacon_id: str) -> float:
        return self.readings[beacon_id]

    def __contains__(self, beacon_id: str) -> bool:
        return beacon_id in self.readings

    def __len__(self) -> int:
        return len(self.readings)


@dataclass(frozen=True)
class RawSampleBatch:
    """Individual (pre-averaging) RSS readings collected at one point."""

    point: Point
    samples: Mapping[str, tuple[float, ...]]

    def __post_init__(self) -> None:
        if not is_finite_point(self.point):
            raise InvalidInputError("sample batch point not finite")
        clean: dict[str, tuple[float, ...]] = {}
        for bid, values in self.samples.items():
            values = tuple(float(v) for v in values)
            if not values:
                raise InvalidInputError(f"beacon {bid!r} has an empty sample list")
            for v in values:
                _check_reading(bid, v)
            clean[bid] = values
        object.__setattr__(self, "samples", clean)
        object.__setattr__(self, "point", (float(self.point[0]), float(self.point[1])))


@dataclass
class ReferencePoint:
    """Surveyed coordinate with its averaged vector and subarea assignment."""

    id: str
    position: Point
    vector: RssVector
    subarea: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise InvalidInputError("reference point id must be non-empty")
        if not is_finite_point(self.position):
            raise InvalidInputError(f"reference point {self.id!r} position not finite")
        self.position = (float(self.position[0]), float(self.position[1]))


@dataclass(frozen=True)
class FeatureSet:
    """Per-beacon closed RSS intervals characterizing one subarea."""

    ranges: Mapping[str, tuple[float, float]]

    def __post_init__(self) -> None:
        clean: dict[str, tuple[float, float]] = {}
        for bid, (lo, hi) in self.ranges.items():
            lo, hi = float(lo), float(hi)
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise InvalidInputError(f"feature range for {bid!r} invalid: [{lo}, {hi}]")
            clean[bid] = (lo, hi)
        object.__setattr__(self, "ranges", clean)

    @property
    def beacons(self) -> frozenset[str]:
        return frozenset(self.ranges)


@dataclass(frozen=True)
class Subarea:
    """Rectangular portion of the floor carrying a distinguishing feature."""

    id: str
    region: Rect
    feature: FeatureSet

    def __post_init__(self) -> None:
        if not self.id:
            raise InvalidInputError("subarea id must be non-empty")
        if self.region.area <= 0:
            raise InvalidInputError(f"subarea {self.id!r} region has no area")


@dataclass
class DatabaseMeta:
    scenario: str = ""
    created: str = ""
    version: int = FORMAT_VERSION


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class FingerprintDatabase:
    """Offline-phase product: beacons, reference points, and subareas.

    The container is mutable under a single-writer discipline: concurrent
    readers must work on a snapshot(). All held objects are value objects.
    """

    def __init__(
        self,
        beacons: Iterable[BeaconNode] = (),
        reference_points: Iterable[ReferencePoint] = (),
        subareas: Iterable[Subarea] = (),
        meta: DatabaseMeta | None = None,
        bounds: Rect | None = None,
    ) -> None:
        self.beacons: list[BeaconNode] = list(beacons)
        self.reference_points: list[ReferencePoint] = list(reference_points)
        self.subareas: list[Subarea] = list(subareas)
        self.meta = meta if meta is not None else DatabaseMeta(created=utc_timestamp())
        self.bounds = bounds
        self._id_counter = 0

    # -- lookups -------------------------------------------------------

    def beacon_ids(self) -> set[str]:
        return {b.id for b in self.beacons}

    def get_beacon(self, beacon_id: str) -> BeaconNode:
        for b in self.beacons:
            if b.id == beacon_id:
                return b
        raise KeyError(beacon_id)

    def get_reference_point(self, rp_id: str) -> ReferencePoint:
        for rp in self.reference_points:
            if rp.id == rp_id:
                return rp
        raise KeyError(rp_id)

    def get_subarea(self, subarea_id: str) -> Subarea:
        for s in self.subareas:
            if s.id == subarea_id:
                return s
        raise KeyError(subarea_id)

    def has_subarea(self, subarea_id: str) -> bool:
        return any(s.id == subarea_id for s in self.subareas)

    def members_of(self, subarea_id: str) -> list[ReferencePoint]:
        return [rp for rp in self.reference_points if rp.subarea == subarea_id]

    # -- mutation ------------------------------------------------------

    def next_point_id(self) -> str:
        existing = {rp.id for rp in self.reference_points}
        while True:
            self._id_counter += 1
            candidate = f"r{self._id_counter}"
            if candidate not in existing:
                return candidate

    def add_reference_point(self, position: Point, batch: RawSampleBatch) -> str:
        """Average a raw batch and store it as a new reference point.

        Raises ConflictError for a duplicate position and InvalidInputError
        when the position falls outside attached floor bounds.
        """
        if not is_finite_point(position):
            raise InvalidInputError("reference point position not finite")
        position = (float(position[0]), float(position[1]))
        if self.bounds is not None and not self.bounds.contains(position):
            raise InvalidInputError(
                f"position {position} outside floor bounds {self.bounds.as_tuple()}"
            )
        for rp in self.reference_points:
            if rp.position == position:
                raise ConflictError(f"a reference point already exists at {position}")
        vector = average_samples(batch)
        rp_id = self.next_point_id()
        self.reference_points.append(ReferencePoint(rp_id, position, vector))
        return rp_id

    # -- consistency ---------------------------------------------------

    def validate(self) -> None:
        """Raise InvalidInputError on any referential-integrity violation."""
        bids = [b.id for b in self.beacons]
        if len(bids) != len(set(bids)):
            raise InvalidInputError("duplicate beacon ids")
        rids = [rp.id for rp in self.reference_points]
        if len(rids) != len(set(rids)):
            raise InvalidInputError("duplicate reference point ids")
        sids = [s.id for s in self.subareas]
        if len(sids) != len(set(sids)):
            raise InvalidInputError("duplicate subarea ids")
        positions = [rp.position for rp in self.reference_points]
        if len(positions) != len(set(positions)):
            raise InvalidInputError("reference point positions must be pairwise distinct")
        known_beacons = set(bids)
        known_subareas = set(sids)
        if self.bounds is not None:
            for b in self.beacons:
                if not self.bounds.contains(b.position):
                    raise InvalidInputError(f"beacon {b.id!r} outside floor bounds")
        for rp in self.reference_points:
            unknown = rp.vector.beacons - known_beacons
            if unknown:
                raise InvalidInputError(f"point {rp.id!r} references unknown beacons {sorted(unknown)}")
            if rp.subarea is not None and rp.subarea not in known_subareas:
                raise InvalidInputError(f"point {rp.id!r} references unknown subarea {rp.subarea!r}")
        for s in self.subareas:
            unknown = s.feature.beacons - known_beacons
            if unknown:
                raise InvalidInputError(f"subarea {s.id!r} references unknown beacons {sorted(unknown)}")
            for rp in self.members_of(s.id):
                if not s.region.contains(rp.position):
                    raise InvalidInputError(
                        f"point {rp.id!r} assigned to subarea {s.id!r} lies outside its region"
                    )

    def snapshot(self) -> "FingerprintDatabase":
        """Value copy safe to hand to concurrent readers."""
        db = FingerprintDatabase(
            beacons=self.beacons,
            reference_points=[
                ReferencePoint(rp.id, rp.position, rp.vector, rp.subarea)
                for rp in self.reference_points
            ],
            subareas=self.subareas,
            meta=DatabaseMeta(self.meta.scenario, self.meta.created, self.meta.version),
            bounds=self.bounds,
        )
        db._id_counter = self._id_counter
        return db

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FingerprintDatabase):
            return NotImplemented
        return (
            self.beacons == other.beacons
            and self.reference_points == other.reference_points
            and self.subareas == other.subareas
            and self.meta == other.meta
            and self.bounds == other.bounds
        )


# -- operations --------------------------------------------------------


def _mean(values: tuple[float, ...]) -> float:
    # identical draws must average to the identical value bit for bit,
    # or noise-free surveys drift an ulp away from noise-free queries
    if min(values) == max(values):
        return values[0]
    return sum(values) / len(values)


def average_samples(batch: RawSampleBatch) -> RssVector:
    """Arithmetic mean of each beacon's sample list; no outlier rejection."""
    if not batch.samples:
        raise InvalidInputError("cannot average an empty sample batch")
    return RssVector({bid: _mean(vs) for bid, vs in batch.samples.items()})


def common_beacons(a: RssVector, b: RssVector) -> set[str]:
    """Beacons observed in both vectors; the summation set of the metric."""
    return set(a.readings) & set(b.readings)


def rss_distance(a: RssVector, b: RssVector) -> float:
    """Euclidean distance over the beacons common to both vectors.

    Raises NoOverlapError when the vectors share no beacon; the caller
    decides the fallback.
    """
    shared = common_beacons(a, b)
    if not shared:
        raise NoOverlapError("vectors share no beacon")
    return math.sqrt(sum((a.readings[bid] - b.readings[bid]) ** 2 for bid in shared))
