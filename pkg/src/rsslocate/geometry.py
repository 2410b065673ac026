"""Planar geometry primitives: axis-aligned rectangles and segment crossing.

Coordinates are meters, x to the right and y up, origin at the bottom-left
corner of the floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Point = tuple[float, float]


def is_finite_point(p: Point) -> bool:
    return len(p) == 2 and math.isfinite(p[0]) and math.isfinite(p[1])


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle given by opposite corners (x0,y0) <= (x1,y1)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        for v in (self.x0, self.y0, self.x1, self.y1):
            if not math.isfinite(v):
                raise ValueError(f"rectangle coordinate not finite: {v!r}")
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ValueError(f"rectangle corners out of order: {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Point:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def contains(self, p: Point) -> bool:
        """Closed containment test."""
        return self.x0 <= p[0] <= self.x1 and self.y0 <= p[1] <= self.y1

    def intersects(self, other: "Rect") -> bool:
        return not (
            other.x1 < self.x0
            or self.x1 < other.x0
            or other.y1 < self.y0
            or self.y1 < other.y0
        )

    def shares_edge(self, other: "Rect") -> bool:
        """True when the closed intersection is a segment of positive length.

        Corner-only contact does not count.
        """
        ix = min(self.x1, other.x1) - max(self.x0, other.x0)
        iy = min(self.y1, other.y1) - max(self.y0, other.y0)
        if ix < 0 or iy < 0:
            return False
        return (ix == 0) != (iy == 0) and max(ix, iy) > 0

    def split(self, axis: int, at: float) -> tuple["Rect", "Rect"]:
        """Split into (low, high) halves at coordinate `at` along axis 0=x, 1=y."""
        if axis == 0:
            if not (self.x0 < at < self.x1):
                raise ValueError(f"split position {at} outside {self}")
            return Rect(self.x0, self.y0, at, self.y1), Rect(at, self.y0, self.x1, self.y1)
        if not (self.y0 < at < self.y1):
            raise ValueError(f"split position {at} outside {self}")
        return Rect(self.x0, self.y0, self.x1, at), Rect(self.x0, at, self.x1, self.y1)

    def clamp(self, p: Point) -> Point:
        return (min(max(p[0], self.x0), self.x1), min(max(p[1], self.y0), self.y1))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)

    @classmethod
    def bounding(cls, points: "list[Point] | tuple[Point, ...]") -> "Rect":
        if not points:
            raise ValueError("cannot bound an empty point set")
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        return cls(min(xs), min(ys), max(xs), max(ys))


def _orient(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """Strict proper crossing of open segments p1-p2 and q1-q2.

    Touching an endpoint or grazing collinearly counts as no crossing, so a
    ray ending exactly on a wall is not attenuated and wall junctions are not
    double-counted.
    """
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if 0.0 in (d1, d2, d3, d4):
        return False
    return (d1 > 0) != (d2 > 0) and (d3 > 0) != (d4 > 0)


def euclid(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])
