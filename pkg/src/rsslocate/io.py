"""Persistence: the fingerprint database document and line-oriented formats.

The database file is a single JSON text document with sorted keys, so a
given database always serializes to the same bytes. Floats go through
Python's shortest round-trip repr.

Raw sample ingestion is line oriented, one reading per line:

    x y beacon_id rss

with `#` starting a comment. Walk traces use the same shape prefixed by a
step index: `t x y beacon_id rss`.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

from .core import (
    BeaconNode,
    DatabaseFormatError,
    DatabaseMeta,
    FORMAT_VERSION,
    FeatureSet,
    FingerprintDatabase,
    RawSampleBatch,
    ReferencePoint,
    RssVector,
    Subarea,
    VersionError,
)
from .geometry import Point, Rect


def _database_document(db: FingerprintDatabase) -> dict:
    return {
        "version": db.meta.version,
        "meta": {"scenario": db.meta.scenario, "created": db.meta.created},
        "bounds": list(db.bounds.as_tuple()) if db.bounds is not None else None,
        "beacons": [
            {"id": b.id, "x": b.position[0], "y": b.position[1], "tx_label": b.tx_label}
            for b in db.beacons
        ],
        "reference_points": [
            {
                "id": rp.id,
                "x": rp.position[0],
                "y": rp.position[1],
                "readings": dict(rp.vector.readings),
                "subarea": rp.subarea,
            }
            for rp in db.reference_points
        ],
        "subareas": [
            {
                "id": s.id,
                "rect": list(s.region.as_tuple()),
                "feature": {bid: [lo, hi] for bid, (lo, hi) in s.feature.ranges.items()},
            }
            for s in db.subareas
        ],
    }


def dumps_database(db: FingerprintDatabase) -> str:
    """Serialize to the canonical text form (deterministic bytes)."""
    return json.dumps(_database_document(db), sort_keys=True, indent=2) + "\n"


def save_database(db: FingerprintDatabase, destination: str | Path) -> None:
    Path(destination).write_text(dumps_database(db), encoding="utf-8")


def _field(obj: dict, key: str, context: str):
    if key not in obj:
        raise DatabaseFormatError(f"{context}: missing field {key!r}")
    return obj[key]


def _number(value, context: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise DatabaseFormatError(f"{context}: expected a number, got {value!r}")
    return float(value)


def loads_database(text: str) -> FingerprintDatabase:
    """Parse the canonical text form; diagnostics name the offending field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatabaseFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise DatabaseFormatError("top level: expected an object")
    version = _field(doc, "version", "top level")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported database format version {version!r} (expected {FORMAT_VERSION})")

    meta_doc = doc.get("meta", {})
    if not isinstance(meta_doc, dict):
        raise DatabaseFormatError("meta: expected an object")
    meta = DatabaseMeta(
        scenario=str(meta_doc.get("scenario", "")),
        created=str(meta_doc.get("created", "")),
        version=FORMAT_VERSION,
    )

    bounds_doc = doc.get("bounds")
    bounds = None
    if bounds_doc is not None:
        if not isinstance(bounds_doc, list) or len(bounds_doc) != 4:
            raise DatabaseFormatError("bounds: expected [x0, y0, x1, y1]")
        bounds = Rect(*(_number(v, "bounds") for v in bounds_doc))

    beacons = []
    for i, b in enumerate(_field(doc, "beacons", "top level")):
        ctx = f"beacons[{i}]"
        if not isinstance(b, dict):
            raise DatabaseFormatError(f"{ctx}: expected an object")
        beacons.append(
            BeaconNode(
                id=str(_field(b, "id", ctx)),
                position=(_number(_field(b, "x", ctx), ctx), _number(_field(b, "y", ctx), ctx)),
                tx_label=str(b.get("tx_label", "")),
            )
        )

    points = []
    for i, p in enumerate(_field(doc, "reference_points", "top level")):
        ctx = f"reference_points[{i}]"
        if not isinstance(p, dict):
            raise DatabaseFormatError(f"{ctx}: expected an object")
        readings_doc = _field(p, "readings", ctx)
        if not isinstance(readings_doc, dict) or not readings_doc:
            raise DatabaseFormatError(f"{ctx}.readings: expected a non-empty object")
        readings = {
            str(bid): _number(v, f"{ctx}.readings.{bid}") for bid, v in readings_doc.items()
        }
        subarea = p.get("subarea")
        points.append(
            ReferencePoint(
                id=str(_field(p, "id", ctx)),
                position=(_number(_field(p, "x", ctx), ctx), _number(_field(p, "y", ctx), ctx)),
                vector=RssVector(readings),
                subarea=None if subarea is None else str(subarea),
            )
        )

    subareas = []
    for i, s in enumerate(_field(doc, "subareas", "top level")):
        ctx = f"subareas[{i}]"
        if not isinstance(s, dict):
            raise DatabaseFormatError(f"{ctx}: expected an object")
        rect_doc = _field(s, "rect", ctx)
        if not isinstance(rect_doc, list) or len(rect_doc) != 4:
            raise DatabaseFormatError(f"{ctx}.rect: expected [x0, y0, x1, y1]")
        feature_doc = _field(s, "feature", ctx)
        if not isinstance(feature_doc, dict):
            raise DatabaseFormatError(f"{ctx}.feature: expected an object")
        ranges = {}
        for bid, pair in feature_doc.items():
            if not isinstance(pair, list) or len(pair) != 2:
                raise DatabaseFormatError(f"{ctx}.feature.{bid}: expected [lo, hi]")
            ranges[str(bid)] = (
                _number(pair[0], f"{ctx}.feature.{bid}"),
                _number(pair[1], f"{ctx}.feature.{bid}"),
            )
        subareas.append(
            Subarea(
                id=str(_field(s, "id", ctx)),
                region=Rect(*(_number(v, f"{ctx}.rect") for v in rect_doc)),
                feature=FeatureSet(ranges),
            )
        )

    db = FingerprintDatabase(beacons, points, subareas, meta=meta, bounds=bounds)
    try:
        db.validate()
    except Exception as exc:
        raise DatabaseFormatError(f"inconsistent database: {exc}") from exc
    return db


def load_database(source: str | Path) -> FingerprintDatabase:
    return loads_database(Path(source).read_text(encoding="utf-8"))


# -- raw sample lines --------------------------------------------------


def parse_sample_lines(text: str) -> list[RawSampleBatch]:
    """Group `x y beacon_id rss` lines into one batch per distinct point.

    Points keep first-seen order; malformed lines raise DatabaseFormatError
    with their line number.
    """
    grouped: dict[Point, dict[str, list[float]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise DatabaseFormatError(f"line {lineno}: expected `x y beacon_id rss`, got {raw!r}")
        try:
            x, y, rss = float(parts[0]), float(parts[1]), float(parts[3])
        except ValueError as exc:
            raise DatabaseFormatError(f"line {lineno}: {exc}") from exc
        grouped.setdefault((x, y), {}).setdefault(parts[2], []).append(rss)
    try:
        return [
            RawSampleBatch(point, {bid: tuple(vs) for bid, vs in per_beacon.items()})
            for point, per_beacon in grouped.items()
        ]
    except Exception as exc:
        raise DatabaseFormatError(str(exc)) from exc


def read_sample_file(source: str | Path) -> list[RawSampleBatch]:
    return parse_sample_lines(Path(source).read_text(encoding="utf-8"))


# -- walk traces -------------------------------------------------------


def format_walk_trace(steps: Sequence[tuple[Point, RssVector]]) -> str:
    """One `t x y beacon_id rss` line per reading, in step order."""
    lines = []
    for t, (pos, vector) in enumerate(steps):
        for bid in sorted(vector.readings):
            lines.append(f"{t} {pos[0]!r} {pos[1]!r} {bid} {vector.readings[bid]!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_walk_trace(steps: Sequence[tuple[Point, RssVector]], destination: str | Path) -> None:
    Path(destination).write_text(format_walk_trace(steps), encoding="utf-8")
