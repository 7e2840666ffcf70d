"""
geom.py - Exact planar predicates and generalized disks

Every decision (orientation, incircle, halfplane side, diametral disk) is
made exactly: a floating-point evaluation is accepted only when its
magnitude clears a forward error bound (Shewchuk's static filters), and
otherwise the same determinant is re-evaluated in Python integers. Every
finite double is an integer multiple of 2^-1074, so scaling all inputs by
a common power of two makes the arithmetic exact. Circles with explicit
centers are classified with fractions.Fraction.

Scalar predicates take Point-like objects (anything with .x and .y).
The *_signs functions are numpy batch versions used by the oracle and the
counting module; they return int8 sign arrays with the same guarantees.

Boundary always counts as inside: disks and halfplanes are closed.
"""

from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass
from enum import Enum, IntEnum
from fractions import Fraction
from typing import Iterator, Protocol, Sequence, Union

import numpy as np

from .errors import DegenerateGeometryError

logger = logging.getLogger(__name__)

# Shewchuk's epsilon is 2^-53, half of the machine epsilon
_EPS = sys.float_info.epsilon / 2
CCW_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS
ICC_ERRBOUND = (10.0 + 96.0 * _EPS) * _EPS


class Coordinates(Protocol):
    x: float
    y: float


@dataclass(frozen=True, slots=True)
class Point:
    """A planar point with integer multiplicity and a stable id"""

    x: float
    y: float
    weight: int = 1
    id: int = -1

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")
        if self.weight < 1:
            raise ValueError(f"weight must be >= 1, got {self.weight}")

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)

    def __repr__(self):
        return f"Point(id={self.id}, x={self.x!r}, y={self.y!r}, weight={self.weight})"


class Orientation(IntEnum):
    CW = -1
    COLLINEAR = 0
    CCW = 1


class Location(Enum):
    INSIDE = 'inside'
    BOUNDARY = 'boundary'
    OUTSIDE = 'outside'

    @property
    def in_closed(self) -> bool:
        return self is not Location.OUTSIDE


class Side(Enum):
    LEFT = 'left'
    RIGHT = 'right'


def _location_from_sign(sign: int) -> Location:
    if sign > 0:
        return Location.INSIDE
    if sign < 0:
        return Location.OUTSIDE
    return Location.BOUNDARY


# ============================================================================
# Scalar predicates
# ============================================================================

_SHIFT = 1100


def _fixed(v: float) -> int:
    """v * 2^_SHIFT as an exact integer"""
    n, d = float(v).as_integer_ratio()
    return n << (_SHIFT - d.bit_length() + 1)


def _exact_orient_sign(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = (_fixed(v) for v in (ax, ay, bx, by, cx, cy))
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (det > 0) - (det < 0)


def orient_sign(ax: float, ay: float, bx: float, by: float,
                cx: float, cy: float) -> int:
    """Sign of the orientation determinant of (a, b, c): +1 ccw, -1 cw, 0 collinear"""
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    bound = CCW_ERRBOUND * (abs(detleft) + abs(detright))
    if det > bound:
        return 1
    if det < -bound:
        return -1
    return _exact_orient_sign(ax, ay, bx, by, cx, cy)


def _exact_incircle_sign(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    ax, ay, bx, by, cx, cy, dx, dy = (
        _fixed(v) for v in (ax, ay, bx, by, cx, cy, dx, dy)
    )
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    det = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
           + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
           + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return (det > 0) - (det < 0)


def incircle_sign(ax: float, ay: float, bx: float, by: float,
                  cx: float, cy: float, dx: float, dy: float) -> int:
    """
    Sign of the incircle determinant.

    Positive when d lies inside the circle through a, b, c and (a, b, c) is
    counterclockwise; the sign flips for clockwise support.
    """
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady

    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy

    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = (alift * (bdxcdy - cdxbdy)
           + blift * (cdxady - adxcdy)
           + clift * (adxbdy - bdxady))
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * alift
                 + (abs(cdxady) + abs(adxcdy)) * blift
                 + (abs(adxbdy) + abs(bdxady)) * clift)
    bound = ICC_ERRBOUND * permanent
    if det > bound:
        return 1
    if det < -bound:
        return -1
    return _exact_incircle_sign(ax, ay, bx, by, cx, cy, dx, dy)


def _exact_diametral_sign(ax, ay, bx, by, dx, dy) -> int:
    ax, ay, bx, by, dx, dy = (_fixed(v) for v in (ax, ay, bx, by, dx, dy))
    dot = (dx - ax) * (dx - bx) + (dy - ay) * (dy - by)
    return (dot > 0) - (dot < 0)


def diametral_sign(ax: float, ay: float, bx: float, by: float,
                   dx: float, dy: float) -> int:
    """Sign of (d - a).(d - b); d is in the closed diametral disk of a, b iff <= 0"""
    t1 = (dx - ax) * (dx - bx)
    t2 = (dy - ay) * (dy - by)
    dot = t1 + t2
    bound = CCW_ERRBOUND * (abs(t1) + abs(t2))
    if dot > bound:
        return 1
    if dot < -bound:
        return -1
    return _exact_diametral_sign(ax, ay, bx, by, dx, dy)


def orient(a: Coordinates, b: Coordinates, c: Coordinates) -> Orientation:
    """
    Orientation of the triple (a, b, c).

    Returns:
        Orientation.CCW, Orientation.CW or Orientation.COLLINEAR

    Example:
        orient(Point(0, 0), Point(1, 0), Point(0, 1))  # Orientation.CCW
    """
    return Orientation(orient_sign(a.x, a.y, b.x, b.y, c.x, c.y))


def in_circumdisk(a: Coordinates, b: Coordinates, c: Coordinates,
                  q: Coordinates) -> Location:
    """
    Classify q against the closed disk through a, b and c.

    The result does not depend on the cyclic order of the support points.

    Raises:
        DegenerateGeometryError: a, b, c are collinear
    """
    o = orient_sign(a.x, a.y, b.x, b.y, c.x, c.y)
    if o == 0:
        raise DegenerateGeometryError("degenerate circumdisk")
    s = incircle_sign(a.x, a.y, b.x, b.y, c.x, c.y, q.x, q.y)
    return _location_from_sign(s * o)


def in_halfplane(a: Coordinates, b: Coordinates, side: Side,
                 q: Coordinates) -> Location:
    """
    Classify q against the closed halfplane left or right of the line a->b.

    Raises:
        DegenerateGeometryError: a and b coincide
    """
    if a.x == b.x and a.y == b.y:
        raise DegenerateGeometryError("halfplane anchors coincide")
    o = orient_sign(a.x, a.y, b.x, b.y, q.x, q.y)
    if side is Side.RIGHT:
        o = -o
    return _location_from_sign(o)


def circumdisk(a: Coordinates, b: Coordinates, c: Coordinates) -> Circle:
    """
    Center and squared radius of the disk through a, b, c.

    For reporting only; membership decisions use in_circumdisk.

    Raises:
        DegenerateGeometryError: a, b, c are collinear
    """
    if orient_sign(a.x, a.y, b.x, b.y, c.x, c.y) == 0:
        raise DegenerateGeometryError("degenerate circumdisk")
    bx, by = b.x - a.x, b.y - a.y
    cx, cy = c.x - a.x, c.y - a.y
    d = 2.0 * (bx * cy - by * cx)
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return Circle((a.x + ux, a.y + uy), ux * ux + uy * uy)


# ============================================================================
# Generalized disks
# ============================================================================

@dataclass(frozen=True)
class Circle:
    """Closed disk given by center and squared radius (floats or Fractions)"""

    center: tuple
    squared_radius: float | Fraction

    def __post_init__(self):
        if self.squared_radius < 0:
            raise ValueError("squared_radius must be >= 0")

    def classify(self, q: Coordinates) -> Location:
        dx = Fraction(q.x) - Fraction(self.center[0])
        dy = Fraction(q.y) - Fraction(self.center[1])
        diff = Fraction(self.squared_radius) - (dx * dx + dy * dy)
        return _location_from_sign((diff > 0) - (diff < 0))

    def contains(self, q: Coordinates) -> bool:
        return self.classify(q).in_closed

    def describe(self) -> dict:
        return {
            'variant': 'circle',
            'center': [float(self.center[0]), float(self.center[1])],
            'squared_radius': float(self.squared_radius),
        }

    @classmethod
    def diametral(cls, a: Coordinates, b: Coordinates) -> Circle:
        """Smallest disk with a and b on its boundary, kept exact"""
        cx = (Fraction(a.x) + Fraction(b.x)) / 2
        cy = (Fraction(a.y) + Fraction(b.y)) / 2
        dx = Fraction(a.x) - cx
        dy = Fraction(a.y) - cy
        return cls((cx, cy), dx * dx + dy * dy)

    @classmethod
    def point(cls, a: Coordinates) -> Circle:
        return cls((a.x, a.y), 0)


@dataclass(frozen=True)
class Halfplane:
    """Closed halfplane left or right of the directed line a->b"""

    a: Coordinates
    b: Coordinates
    side: Side

    def __post_init__(self):
        if self.a.x == self.b.x and self.a.y == self.b.y:
            raise DegenerateGeometryError("halfplane anchors coincide")

    def classify(self, q: Coordinates) -> Location:
        return in_halfplane(self.a, self.b, self.side, q)

    def contains(self, q: Coordinates) -> bool:
        return self.classify(q).in_closed

    def describe(self) -> dict:
        return {
            'variant': 'halfplane',
            'a': [self.a.x, self.a.y],
            'b': [self.b.x, self.b.y],
            'side': self.side.value,
        }


@dataclass(frozen=True)
class CircleBySupport:
    """Closed disk through three non-collinear points, decided by incircle"""

    p: Coordinates
    q: Coordinates
    r: Coordinates

    def __post_init__(self):
        if orient_sign(self.p.x, self.p.y, self.q.x, self.q.y,
                       self.r.x, self.r.y) == 0:
            raise DegenerateGeometryError("degenerate circumdisk")

    def classify(self, q: Coordinates) -> Location:
        return in_circumdisk(self.p, self.q, self.r, q)

    def contains(self, q: Coordinates) -> bool:
        return self.classify(q).in_closed

    def describe(self) -> dict:
        circle = circumdisk(self.p, self.q, self.r)
        return {
            'variant': 'circle_by_support',
            'support': [[s.x, s.y] for s in (self.p, self.q, self.r)],
            'center': [float(circle.center[0]), float(circle.center[1])],
            'squared_radius': float(circle.squared_radius),
        }


GeneralizedDisk = Union[Circle, Halfplane, CircleBySupport]


# ============================================================================
# Batch predicates (numpy)
# ============================================================================

def _resolve(signs: np.ndarray, uncertain: np.ndarray,
             known: np.ndarray | None, exact, args) -> np.ndarray:
    if known is not None:
        uncertain &= ~known
    for idx in zip(*np.nonzero(uncertain)):
        signs[idx] = exact(*(float(a[idx]) if isinstance(a, np.ndarray) else a
                             for a in args))
    return signs


def orient_signs(ax: float, ay: float, bx: float, by: float,
                 cx, cy, known: np.ndarray | None = None) -> np.ndarray:
    """
    Exact orientation signs of (a, b, c_k) for every c_k.

    Entries flagged in `known` skip the exact fallback; the caller
    overwrites them.
    """
    cx = np.asarray(cx, dtype=float)
    cy = np.asarray(cy, dtype=float)
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    bound = CCW_ERRBOUND * (np.abs(detleft) + np.abs(detright))
    signs = np.sign(det).astype(np.int8)
    uncertain = np.abs(det) <= bound
    return _resolve(signs, uncertain, known, _exact_orient_sign,
                    (ax, ay, bx, by, cx, cy))


def incircle_signs(ax: float, ay: float, bx: float, by: float,
                   cx, cy, dx, dy, known: np.ndarray | None = None) -> np.ndarray:
    """
    Exact incircle signs for supports (a, b, c_k) and queries d_l.

    Returns a (len(c), len(d)) int8 array, same sign convention as
    incircle_sign (multiply by the support orientation to get inside > 0).
    """
    cx = np.asarray(cx, dtype=float)[:, None]
    cy = np.asarray(cy, dtype=float)[:, None]
    dx = np.asarray(dx, dtype=float)[None, :]
    dy = np.asarray(dy, dtype=float)[None, :]
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady

    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy

    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = (alift * (bdxcdy - cdxbdy)
           + blift * (cdxady - adxcdy)
           + clift * (adxbdy - bdxady))
    permanent = ((np.abs(bdxcdy) + np.abs(cdxbdy)) * alift
                 + (np.abs(cdxady) + np.abs(adxcdy)) * blift
                 + (np.abs(adxbdy) + np.abs(bdxady)) * clift)
    signs = np.sign(det).astype(np.int8)
    uncertain = np.abs(det) <= ICC_ERRBOUND * permanent
    shape = signs.shape
    return _resolve(signs, uncertain, known, _exact_incircle_sign,
                    (ax, ay, bx, by,
                     np.broadcast_to(cx, shape), np.broadcast_to(cy, shape),
                     np.broadcast_to(dx, shape), np.broadcast_to(dy, shape)))


def diametral_signs(ax: float, ay: float, bx: float, by: float,
                    dx, dy, known: np.ndarray | None = None) -> np.ndarray:
    """Exact signs of (d - a).(d - b); <= 0 means inside the diametral disk"""
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    t1 = (dx - ax) * (dx - bx)
    t2 = (dy - ay) * (dy - by)
    dot = t1 + t2
    bound = CCW_ERRBOUND * (np.abs(t1) + np.abs(t2))
    signs = np.sign(dot).astype(np.int8)
    uncertain = np.abs(dot) <= bound
    return _resolve(signs, uncertain, known, _exact_diametral_sign,
                    (ax, ay, bx, by, dx, dy))


def point_arrays(points: Sequence[Point]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coordinates and weights of a point sequence as numpy arrays"""
    xs = np.fromiter((p.x for p in points), dtype=float, count=len(points))
    ys = np.fromiter((p.y for p in points), dtype=float, count=len(points))
    ws = np.fromiter((p.weight for p in points), dtype=np.int64, count=len(points))
    return xs, ys, ws


def collinear_line(points: Sequence[Point]) -> tuple[Point, Point] | None:
    """
    Two distinct points spanning the line through all of `points`.

    Returns None when the points are not collinear. A set with fewer than
    two distinct points returns (p, p).
    """
    if not points:
        return None
    first = points[0]
    second = next((p for p in points if p.x != first.x or p.y != first.y), None)
    if second is None:
        return (first, first)
    xs, ys, _ = point_arrays(points)
    signs = orient_signs(first.x, first.y, second.x, second.y, xs, ys)
    if np.any(signs != 0):
        return None
    return (first, second)


def is_collinear(points: Sequence[Point]) -> bool:
    return collinear_line(points) is not None


def hilbert_order(xs: np.ndarray, ys: np.ndarray, bits: int = 16) -> np.ndarray:
    """Indices sorting the points along a Hilbert curve, ties by index"""
    n = len(xs)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    xmin, ymin = float(xs.min()), float(ys.min())
    span = max(float(xs.max()) - xmin, float(ys.max()) - ymin) or 1.0
    side = 1 << bits
    ix = np.minimum(((xs - xmin) / span * (side - 1)).astype(np.int64), side - 1)
    iy = np.minimum(((ys - ymin) / span * (side - 1)).astype(np.int64), side - 1)
    d = np.zeros(n, dtype=np.int64)
    s = side >> 1
    while s > 0:
        rx = (ix & s) > 0
        ry = (iy & s) > 0
        d += s * s * ((3 * rx.astype(np.int64)) ^ ry.astype(np.int64))
        flip = ~ry & rx
        ix = np.where(flip, side - 1 - ix, ix)
        iy = np.where(flip, side - 1 - iy, iy)
        swap = ~ry
        ix, iy = np.where(swap, iy, ix), np.where(swap, ix, iy)
        s >>= 1
    return np.lexsort((np.arange(n), d))


# ============================================================================
# Quadrant partition
# ============================================================================

@dataclass(frozen=True)
class Line:
    """Line through two anchor coordinates"""

    a: tuple[float, float]
    b: tuple[float, float]


@dataclass(frozen=True)
class QuadrantPartition:
    """
    Two lines crossing at q: a vertical line1 and a non-vertical line2.

    Quadrants are numbered counterclockwise from the upper right
    (0 right/above, 1 left/above, 2 left/below, 3 right/below), so
    quadrant k is opposite quadrant (k + 2) % 4.
    """

    q: tuple[Fraction, Fraction]
    line1: Line
    line2: Line

    def quadrants_of(self, p: Coordinates) -> frozenset[int]:
        """Closed quadrants containing p"""
        xm = self.line1.a[0]
        right, left = p.x >= xm, p.x <= xm
        (lx, ly), (rx, ry) = self.line2.a, self.line2.b
        o = orient_sign(lx, ly, rx, ry, p.x, p.y)
        above, below = o >= 0, o <= 0
        found = set()
        if right and above:
            found.add(0)
        if left and above:
            found.add(1)
        if left and below:
            found.add(2)
        if right and below:
            found.add(3)
        return frozenset(found)

    def counts(self, points: Sequence[Coordinates]) -> list[int]:
        totals = [0, 0, 0, 0]
        for p in points:
            for k in self.quadrants_of(p):
                totals[k] += 1
        return totals


def _median(values: np.ndarray) -> float:
    ordered = np.sort(values)
    n = len(ordered)
    if n % 2:
        return float(ordered[n // 2])
    return float((ordered[n // 2 - 1] + ordered[n // 2]) / 2)


def iter_quadrant_partitions(points: Sequence[Point]) -> Iterator[QuadrantPartition]:
    """
    Yield every candidate partition whose closed quadrants each hold at
    least floor(n/4) points, in a fixed order.

    line1 is the vertical median line. line2 is tried first as the
    horizontal median line, then as the line through one point on each
    side of line1 (index order).

    Raises:
        DegenerateGeometryError: fewer than 4 points
    """
    n = len(points)
    if n < 4:
        raise DegenerateGeometryError("quadrant partition needs at least 4 points")
    xs, ys, _ = point_arrays(points)
    need = n // 4
    xm = _median(xs)
    left = xs <= xm
    right = xs >= xm
    line1 = Line((xm, 0.0), (xm, 1.0))

    def candidate(l, r):
        (lx, ly), (rx, ry) = l, r
        signs = orient_signs(lx, ly, rx, ry, xs, ys)
        above, below = signs >= 0, signs <= 0
        counts = (np.count_nonzero(right & above), np.count_nonzero(left & above),
                  np.count_nonzero(left & below), np.count_nonzero(right & below))
        if min(counts) < need:
            return None
        qy = (Fraction(ly) + (Fraction(xm) - Fraction(lx))
              * (Fraction(ry) - Fraction(ly)) / (Fraction(rx) - Fraction(lx)))
        return QuadrantPartition((Fraction(xm), qy), line1, Line(l, r))

    ym = _median(ys)
    horizontal = candidate((xm - 1.0, ym), (xm + 1.0, ym)) if xm - 1.0 < xm + 1.0 else None
    if horizontal is not None:
        yield horizontal

    left_idx = np.nonzero(left)[0]
    right_idx = np.nonzero(right)[0]
    for i in left_idx:
        for j in right_idx:
            if xs[i] >= xs[j]:
                continue
            part = candidate((float(xs[i]), float(ys[i])), (float(xs[j]), float(ys[j])))
            if part is not None:
                yield part


def quadrant_partition(points: Sequence[Point]) -> QuadrantPartition:
    """
    Two lines splitting the plane into four closed quadrants, each holding
    at least floor(|P|/4) points of P.

    Raises:
        DegenerateGeometryError: fewer than 4 points, or no candidate line
            satisfies the quadrant counts
    """
    for part in iter_quadrant_partitions(points):
        return part
    raise DegenerateGeometryError("no balanced quadrant partition found")
