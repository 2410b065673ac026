"""Deterministic radio environment for exercising the workbench offline.

Signal strength is modelled on a non-negative magnitude scale (larger is
stronger): a log-distance decay from the transmitter, minus a fixed loss
for every wall the direct path crosses, plus Gaussian shadowing noise,
clamped below at a floor that stands for "no usable signal".

All randomness flows through numpy's PCG64 seeded with explicit spawn
keys, so every (seed, purpose, point, beacon) tuple names one stream and
results are reproducible across runs and platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    BeaconNode,
    DatabaseFormatError,
    DatabaseMeta,
    FingerprintDatabase,
    InvalidInputError,
    RawSampleBatch,
    RssVector,
    average_samples,
    utc_timestamp,
)
from .geometry import Point, Rect, euclid, segments_cross

# Stream namespaces: first spawn-key element, one per purpose.
NS_SURVEY = 0
NS_WALK = 1
NS_TEST = 2
NS_SEGMENT = 3


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for one purpose; same path, same stream."""
    key = tuple(int(p) for p in path)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


@dataclass(frozen=True)
class Wall:
    """Straight attenuating segment; loss applies per crossing."""

    p1: Point
    p2: Point
    loss_db: float

    def __post_init__(self):
        if self.p1 == self.p2:
            raise InvalidInputError("wall endpoints must differ")
        if not self.loss_db >= 0:
            raise InvalidInputError("wall loss must be non-negative")


@dataclass(frozen=True)
class Floorplan:
    bounds: Rect
    walls: tuple[Wall, ...] = ()

    def path_loss(self, a: Point, b: Point) -> float:
        """Summed wall losses along the open segment from a to b."""
        return sum(w.loss_db for w in self.walls if segments_cross(a, b, w.p1, w.p2))


@dataclass(frozen=True)
class PropagationParams:
    """Log-distance decay with additive wall losses and Gaussian shadowing."""

    rss_at_d0: float = 90.0  # magnitude at 1 m, free space
    path_loss_exponent: float = 2.0
    shadowing_sigma: float = 2.0
    floor_value: float = 0.0
    samples_per_reading: int = 10  # draws averaged per survey reading
    query_samples: int = 1  # draws averaged per online reading

    def __post_init__(self):
        if self.path_loss_exponent <= 0:
            raise InvalidInputError("path_loss_exponent must be positive")
        if self.shadowing_sigma < 0:
            raise InvalidInputError("shadowing_sigma must be non-negative")
        if self.samples_per_reading < 1 or self.query_samples < 1:
            raise InvalidInputError("sample counts must be at least 1")


@dataclass(frozen=True)
class Scenario:
    """A named floorplan plus transmitters and propagation constants.

    `regions` is an operator-drawn partition of the floor suitable for
    manual segmentation; `waypoints` is the route used by walks.
    """

    name: str
    floorplan: Floorplan
    beacons: tuple[BeaconNode, ...]
    propagation: PropagationParams
    default_m: int
    regions: tuple[Rect, ...] = ()
    waypoints: tuple[Point, ...] = ()
    grid_rows: int | None = None  # fixed survey row count, None = derive from aspect

    def __post_init__(self):
        if not self.beacons:
            raise InvalidInputError("scenario needs at least one beacon")
        for b in self.beacons:
            if not self.floorplan.bounds.contains(b.position):
                raise InvalidInputError(f"beacon {b.id} outside floorplan bounds")


def mean_rss(scenario: Scenario, beacon: BeaconNode, position: Point) -> float:
    """Noise-free magnitude at `position`, clamped at the floor."""
    p = scenario.propagation
    d = max(euclid(beacon.position, position), 0.1)
    value = (
        p.rss_at_d0
        - 10.0 * p.path_loss_exponent * math.log10(d)
        - scenario.floorplan.path_loss(beacon.position, position)
    )
    return max(value, p.floor_value)


def draw_samples(
    scenario: Scenario, beacon: BeaconNode, position: Point, rng: np.random.Generator, n: int
) -> np.ndarray:
    """n noisy draws at `position`, each clamped at the floor."""
    p = scenario.propagation
    mean = mean_rss(scenario, beacon, position)
    return np.maximum(mean + p.shadowing_sigma * rng.standard_normal(n), p.floor_value)


def sample_rss(
    scenario: Scenario, beacon: BeaconNode, position: Point, rng: np.random.Generator, n: int
) -> float:
    """Average of n noisy draws."""
    return float(draw_samples(scenario, beacon, position, rng, n).mean())


def sample_batch(
    scenario: Scenario, position: Point, seed: int, namespace: int, index: int, n: int
) -> RawSampleBatch:
    """Raw pre-averaging draws at `position`; beacons at the floor are absent.

    The stream for beacon j of observation `index` is keyed
    (seed, namespace, index, j), so every reading is reproducible alone.
    """
    p = scenario.propagation
    samples = {}
    for j, beacon in enumerate(scenario.beacons):
        if mean_rss(scenario, beacon, position) <= p.floor_value:
            continue
        rng = substream(seed, namespace, index, j)
        samples[beacon.id] = tuple(
            float(v) for v in draw_samples(scenario, beacon, position, rng, n)
        )
    if not samples:
        raise InvalidInputError(f"no beacon audible at {position}")
    return RawSampleBatch(position, samples)


def observe(
    scenario: Scenario, position: Point, seed: int, namespace: int, index: int, n: int
) -> RssVector:
    """One averaged vector at `position`; beacons at the floor are absent."""
    return average_samples(sample_batch(scenario, position, seed, namespace, index, n))


def grid_points(bounds: Rect, m: int, rows: int | None = None) -> list[Point]:
    """About m survey positions on a centered grid, row-major from the bottom.

    With `rows` fixed, the column count is m/rows rounded, so the total may
    differ slightly from m when m is not a multiple. Otherwise the split is
    the factor pair of m whose aspect ratio is closest (log scale) to the
    bounds aspect ratio.
    """
    if m < 1:
        raise InvalidInputError("m must be at least 1")
    if rows is not None:
        if rows < 1:
            raise InvalidInputError("rows must be at least 1")
        cols = max(1, round(m / rows))
    else:
        target = math.log(bounds.width / bounds.height)
        best = None
        for cols in range(1, m + 1):
            if m % cols:
                continue
            score = abs(math.log(cols / (m // cols)) - target)
            if best is None or score < best[0]:
                best = (score, cols)
        _, cols = best
        rows = m // cols
    dx, dy = bounds.width / cols, bounds.height / rows
    return [
        (bounds.x0 + (i + 0.5) * dx, bounds.y0 + (j + 0.5) * dy)
        for j in range(rows)
        for i in range(cols)
    ]


def survey(scenario: Scenario, m: int | None = None, seed: int = 0) -> FingerprintDatabase:
    """Build a fresh fingerprint database from a grid survey.

    Each grid position gets `samples_per_reading` noisy draws per audible
    beacon, averaged into one stored vector.
    """
    m = scenario.default_m if m is None else m
    db = FingerprintDatabase(
        beacons=list(scenario.beacons),
        meta=DatabaseMeta(scenario=scenario.name, created=utc_timestamp()),
        bounds=scenario.floorplan.bounds,
    )
    p = scenario.propagation
    for i, pos in enumerate(grid_points(scenario.floorplan.bounds, m, scenario.grid_rows)):
        db.add_reference_point(pos, sample_batch(scenario, pos, seed, NS_SURVEY, i, p.samples_per_reading))
    return db


def test_points(scenario: Scenario, count: int, seed: int) -> list[Point]:
    """Uniformly random evaluation positions inside the bounds."""
    rng = substream(seed, NS_TEST, 0)
    b = scenario.floorplan.bounds
    xs = rng.uniform(b.x0, b.x1, count)
    ys = rng.uniform(b.y0, b.y1, count)
    return [(float(x), float(y)) for x, y in zip(xs, ys)]


def query_at(scenario: Scenario, position: Point, seed: int, index: int) -> RssVector:
    """Online observation for the index-th query of a test run."""
    return observe(
        scenario, position, seed, NS_TEST, index + 1, scenario.propagation.query_samples
    )


def walk_positions(
    scenario: Scenario, waypoints: tuple[Point, ...] | None = None, step: float = 1.0
) -> list[Point]:
    """Route positions along the waypoints, about `step` apart.

    Defaults to the scenario's own route. A single waypoint yields that one
    position.
    """
    waypoints = scenario.waypoints if waypoints is None else tuple(waypoints)
    if not waypoints:
        raise InvalidInputError("waypoints must not be empty")
    if step <= 0:
        raise InvalidInputError("step must be positive")
    for p in waypoints:
        if not scenario.floorplan.bounds.contains(p):
            raise InvalidInputError(f"waypoint {p} outside floorplan bounds")
    positions = [waypoints[0]]
    for a, b in zip(waypoints, waypoints[1:]):
        length = euclid(a, b)
        n = max(1, math.ceil(length / step))
        for i in range(1, n + 1):
            t = i / n
            positions.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    return positions


def walk(
    scenario: Scenario,
    waypoints: tuple[Point, ...] | None = None,
    step: float = 1.0,
    seed: int = 0,
) -> list[tuple[Point, RssVector]]:
    """Simulated walk along the route: one observation per step."""
    return [
        (pos, observe(scenario, pos, seed, NS_WALK, t, scenario.propagation.query_samples))
        for t, pos in enumerate(walk_positions(scenario, waypoints, step))
    ]


# -- presets -----------------------------------------------------------


def preset_office() -> Scenario:
    """Partitioned floor: central corridor, rooms on both sides.

    Three beacons sit in the corridor and two inside rooms on opposite
    sides, so positions mirrored across the corridor always differ by at
    least one extra pair of wall crossings. Room divider walls are
    staggered north versus south for the same reason.

    Surveys always use five rows so one row runs down the corridor at any
    m. Transmit power is low enough that the far end of the floor drops
    below the reporting floor, leaving each room hearing its own beacon
    subset.
    """
    bounds = Rect(0.0, 0.0, 41.5, 11.3)
    walls = [
        Wall((0.0, 4.9), (41.5, 4.9), 12.0),
        Wall((0.0, 6.5), (41.5, 6.5), 12.0),
    ]
    for x in (5.93, 14.82, 23.71, 32.60):
        walls.append(Wall((x, 0.0), (x, 4.9), 10.0))
    for x in (8.89, 17.78, 26.67, 35.56):
        walls.append(Wall((x, 6.5), (x, 11.3), 10.0))
    beacons = tuple(
        BeaconNode(f"b{k + 1}", pos, tx_label=f"node-{k + 1}")
        for k, pos in enumerate(
            [(4.0, 5.2), (13.3, 9.18), (22.0, 5.2), (28.4, 2.12), (38.0, 5.2)]
        )
    )
    south = [0.0, 5.93, 14.82, 23.71, 32.60, 41.5]
    north = [0.0, 8.89, 17.78, 26.67, 35.56, 41.5]
    regions = (
        [Rect(a, 0.0, b, 4.9) for a, b in zip(south, south[1:])]
        + [Rect(0.0, 4.9, 41.5, 6.5)]
        + [Rect(a, 6.5, b, 11.3) for a, b in zip(north, north[1:])]
    )
    return Scenario(
        name="office",
        floorplan=Floorplan(bounds, tuple(walls)),
        beacons=beacons,
        propagation=PropagationParams(rss_at_d0=79.0, path_loss_exponent=3.0),
        default_m=70,
        regions=tuple(regions),
        waypoints=((2.0, 5.7), (39.5, 5.7), (2.0, 5.7)),
        grid_rows=5,
    )


def preset_hall() -> Scenario:
    """Single open space, no interior walls, gentler distance decay.

    Four corner beacons plus one center beacon; the center one is offset
    vertically so the left/right halves differ.
    """
    bounds = Rect(0.0, 0.0, 30.5, 11.3)
    beacons = tuple(
        BeaconNode(f"b{k + 1}", pos, tx_label=f"node-{k + 1}")
        for k, pos in enumerate(
            [(2.54, 2.26), (27.96, 2.26), (2.54, 9.04), (27.96, 9.04), (15.25, 6.78)]
        )
    )
    regions = (
        Rect(0.0, 0.0, 15.25, 6.0),
        Rect(15.25, 0.0, 30.5, 6.0),
        Rect(0.0, 6.0, 15.25, 11.3),
        Rect(15.25, 6.0, 30.5, 11.3),
    )
    return Scenario(
        name="hall",
        floorplan=Floorplan(bounds),
        beacons=beacons,
        propagation=PropagationParams(path_loss_exponent=2.0),
        default_m=60,
        regions=regions,
        waypoints=((3.0, 3.0), (27.0, 3.0), (27.0, 9.0), (3.0, 9.0), (3.0, 3.0)),
    )


PRESETS = {"office": preset_office, "hall": preset_hall}


# -- scenario documents ------------------------------------------------


def scenario_to_document(s: Scenario) -> dict:
    return {
        "name": s.name,
        "bounds": list(s.floorplan.bounds.as_tuple()),
        "walls": [[*w.p1, *w.p2, w.loss_db] for w in s.floorplan.walls],
        "beacons": [
            {"id": b.id, "x": b.position[0], "y": b.position[1], "tx_label": b.tx_label}
            for b in s.beacons
        ],
        "propagation": {
            "rss_at_d0": s.propagation.rss_at_d0,
            "path_loss_exponent": s.propagation.path_loss_exponent,
            "shadowing_sigma": s.propagation.shadowing_sigma,
            "floor_value": s.propagation.floor_value,
            "samples_per_reading": s.propagation.samples_per_reading,
            "query_samples": s.propagation.query_samples,
        },
        "default_m": s.default_m,
        "regions": [list(r.as_tuple()) for r in s.regions],
        "waypoints": [list(p) for p in s.waypoints],
        "grid_rows": s.grid_rows,
    }


def scenario_from_document(doc: dict) -> Scenario:
    try:
        prop = doc.get("propagation", {})
        return Scenario(
            name=str(doc["name"]),
            floorplan=Floorplan(
                Rect(*(float(v) for v in doc["bounds"])),
                tuple(
                    Wall((float(w[0]), float(w[1])), (float(w[2]), float(w[3])), float(w[4]))
                    for w in doc.get("walls", [])
                ),
            ),
            beacons=tuple(
                BeaconNode(str(b["id"]), (float(b["x"]), float(b["y"])), str(b.get("tx_label", "")))
                for b in doc["beacons"]
            ),
            propagation=PropagationParams(**{k: v for k, v in prop.items()}),
            default_m=int(doc.get("default_m", 60)),
            regions=tuple(Rect(*(float(v) for v in r)) for r in doc.get("regions", [])),
            waypoints=tuple((float(p[0]), float(p[1])) for p in doc.get("waypoints", [])),
            grid_rows=None if doc.get("grid_rows") is None else int(doc["grid_rows"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DatabaseFormatError(f"bad scenario document: {exc}") from exc


def load_scenario(name_or_path: str) -> Scenario:
    """Resolve a preset name, else read a scenario JSON file."""
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]()
    path = Path(name_or_path)
    if not path.exists():
        raise InvalidInputError(
            f"unknown scenario {name_or_path!r} (presets: {', '.join(sorted(PRESETS))})"
        )
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatabaseFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return scenario_from_document(doc)


def save_scenario(s: Scenario, destination: str | Path) -> None:
    Path(destination).write_text(
        json.dumps(scenario_to_document(s), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
