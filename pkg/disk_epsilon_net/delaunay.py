"""
delaunay.py - Delaunay triangulation with hull faces and point location

Incremental Bowyer-Watson insertion over a triangulation closed with
"ghost" triangles: every convex-hull edge (u, v) carries a ghost (u, v, G)
whose face is the closed halfplane to the LEFT of u->v, i.e. the side away
from the sample. Ghosts are ordinary nodes of the dual graph, and two
consecutive ghosts are adjacent across their shared hull vertex.

Points are inserted in Hilbert order (ties by index) after merging equal
coordinates, which keeps point-location walks short and makes the result
deterministic for a fixed input order. The conflict test uses the strict
incircle predicate, so cocircular ties keep the existing triangles.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import DegenerateGeometryError, SampleTooSmallError
from .geom import (
    Coordinates,
    Point,
    diametral_sign,
    hilbert_order,
    incircle_sign,
    orient_sign,
    point_arrays,
)

logger = logging.getLogger(__name__)

GHOST = -1


class FaceKind(Enum):
    TRIANGLE = 'triangle'
    HULL = 'hull'


@dataclass(frozen=True, slots=True)
class Face:
    """
    A node of the dual graph.

    support is (a, b, c) counterclockwise for a triangle, or (u, v) for a
    hull face whose closed outer halfplane lies left of u->v.
    """

    index: int
    kind: FaceKind
    support: tuple[int, ...]

    @property
    def is_hull(self) -> bool:
        return self.kind is FaceKind.HULL


@dataclass(frozen=True, slots=True)
class Edge:
    """Undirected triangulation edge (u < v) with its two incident faces"""

    u: int
    v: int
    faces: tuple[int, int]


@dataclass(frozen=True, eq=False)
class Triangulation:
    """
    Delaunay triangulation of a sample R.

    vertices holds the distinct sample points; all support indices refer to
    it. adjacency[f] lists the faces across the three sides of face f: for a
    triangle (a, b, c) the sides (a, b), (b, c), (c, a); for a hull face
    (u, v) the real triangle across (u, v), then the next hull face (across
    v) and the previous one (across u).
    """

    vertices: list[Point]
    faces: list[Face]
    adjacency: list[tuple[int, int, int]]
    edges: list[Edge]
    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)

    @property
    def triangles(self) -> list[Face]:
        return [f for f in self.faces if f.kind is FaceKind.TRIANGLE]

    @property
    def hull_faces(self) -> list[Face]:
        return [f for f in self.faces if f.kind is FaceKind.HULL]

    def vertex(self, i: int) -> Point:
        return self.vertices[i]

    def __repr__(self):
        return (f"Triangulation(vertices={len(self.vertices)}, "
                f"triangles={len(self.triangles)}, hull={len(self.hull_faces)})")


# ============================================================================
# Incremental construction
# ============================================================================

class _Builder:
    """Mutable triangle soup keyed by directed edges"""

    def __init__(self, xs: np.ndarray, ys: np.ndarray):
        self.x = xs.tolist()
        self.y = ys.tolist()
        self.tris: dict[int, tuple[int, int, int]] = {}
        self.owner: dict[tuple[int, int], int] = {}
        self.next_id = 0
        self.last = 0

    def add(self, a: int, b: int, c: int) -> int:
        if a == GHOST:
            a, b, c = b, c, a
        elif b == GHOST:
            a, b, c = c, a, b
        tid = self.next_id
        self.next_id += 1
        self.tris[tid] = (a, b, c)
        self.owner[(a, b)] = tid
        self.owner[(b, c)] = tid
        self.owner[(c, a)] = tid
        self.last = tid
        return tid

    def remove(self, tid: int) -> None:
        a, b, c = self.tris.pop(tid)
        for e in ((a, b), (b, c), (c, a)):
            if self.owner.get(e) == tid:
                del self.owner[e]

    def neighbour(self, a: int, b: int) -> int:
        return self.owner[(b, a)]

    def in_conflict(self, tid: int, p: int) -> bool:
        a, b, c = self.tris[tid]
        x, y = self.x, self.y
        if c == GHOST:
            o = orient_sign(x[a], y[a], x[b], y[b], x[p], y[p])
            if o != 0:
                return o > 0
            return diametral_sign(x[a], y[a], x[b], y[b], x[p], y[p]) < 0
        return incircle_sign(x[a], y[a], x[b], y[b], x[c], y[c], x[p], y[p]) > 0

    def walk(self, p: int) -> int:
        """A triangle in conflict with p, found by a visibility walk"""
        x, y = self.x, self.y
        px, py = x[p], y[p]
        tid = self.last
        for _ in range(4 * len(self.tris) + 8):
            a, b, c = self.tris[tid]
            if c == GHOST:
                if orient_sign(x[a], y[a], x[b], y[b], px, py) > 0:
                    return tid
                tid = self.neighbour(a, b)
                continue
            for u, v in ((a, b), (b, c), (c, a)):
                if orient_sign(x[u], y[u], x[v], y[v], px, py) < 0:
                    tid = self.neighbour(u, v)
                    break
            else:
                return tid
        logger.debug("walk did not settle, scanning %d triangles", len(self.tris))
        return next(t for t in self.tris if self.in_conflict(t, p))

    def insert(self, p: int) -> None:
        start = self.walk(p)
        cavity = {start}
        queue = deque([start])
        boundary: list[tuple[int, int]] = []
        while queue:
            tid = queue.popleft()
            a, b, c = self.tris[tid]
            for u, v in ((a, b), (b, c), (c, a)):
                nb = self.neighbour(u, v)
                if nb in cavity:
                    continue
                if self.in_conflict(nb, p):
                    cavity.add(nb)
                    queue.append(nb)
                else:
                    boundary.append((u, v))
        for tid in cavity:
            self.remove(tid)
        for u, v in boundary:
            self.add(u, v, p)


def _distinct(points: Sequence[Point]) -> list[Point]:
    seen = set()
    out = []
    for p in points:
        if (p.x, p.y) not in seen:
            seen.add((p.x, p.y))
            out.append(p)
    return out


def build(R: Iterable[Point]) -> Triangulation:
    """
    Delaunay triangulation of the sample R.

    Points with equal coordinates are merged (the first one is kept).

    Raises:
        SampleTooSmallError: fewer than 3 distinct points
        DegenerateGeometryError: all points collinear

    Example:
        T = build([Point(0, 0), Point(1, 0), Point(0, 1)])
        len(T.triangles)  # 1
    """
    vertices = _distinct(list(R))
    m = len(vertices)
    if m < 3:
        raise SampleTooSmallError("sample too small")
    xs, ys, _ = point_arrays(vertices)
    order = hilbert_order(xs, ys).tolist()

    a = order[0]
    b = order[1]
    c = None
    for k in order[2:]:
        if orient_sign(xs[a], ys[a], xs[b], ys[b], xs[k], ys[k]) != 0:
            c = k
            break
    if c is None:
        raise DegenerateGeometryError("degenerate sample")
    if orient_sign(xs[a], ys[a], xs[b], ys[b], xs[c], ys[c]) < 0:
        b, c = c, b

    builder = _Builder(xs, ys)
    builder.add(a, b, c)
    builder.add(b, a, GHOST)
    builder.add(c, b, GHOST)
    builder.add(a, c, GHOST)
    for k in order:
        if k not in (a, b, c):
            builder.insert(k)

    T = _finalize(vertices, xs, ys, builder)
    logger.debug("triangulated %d points: %d triangles, %d hull faces",
                 m, len(T.triangles), len(T.hull_faces))
    return T


def _canonical(tri: tuple[int, int, int]) -> tuple[int, int, int]:
    a, b, c = tri
    if c == GHOST:
        return tri
    k = min(range(3), key=lambda i: tri[i])
    return tri[k:] + tri[:k]


def _finalize(vertices: list[Point], xs: np.ndarray, ys: np.ndarray,
              builder: _Builder) -> Triangulation:
    real = sorted(_canonical(t) for t in builder.tris.values() if t[2] != GHOST)
    ghosts = sorted(t for t in builder.tris.values() if t[2] == GHOST)

    faces: list[Face] = []
    index_of: dict[tuple[int, int], int] = {}
    for tri in real:
        f = len(faces)
        faces.append(Face(f, FaceKind.TRIANGLE, tri))
        a, b, c = tri
        for e in ((a, b), (b, c), (c, a)):
            index_of[e] = f
    for u, v, _ in ghosts:
        f = len(faces)
        faces.append(Face(f, FaceKind.HULL, (u, v)))
        index_of[(u, v)] = f
        index_of[(v, GHOST)] = f
        index_of[(GHOST, u)] = f

    adjacency: list[tuple[int, int, int]] = []
    edges: list[Edge] = []
    for face in faces:
        if face.is_hull:
            u, v = face.support
            sides = ((u, v), (v, GHOST), (GHOST, u))
        else:
            a, b, c = face.support
            sides = ((a, b), (b, c), (c, a))
        adjacency.append(tuple(index_of[(s, r)] for r, s in sides))
        for r, s in sides:
            if r != GHOST and s != GHOST and r < s:
                edges.append(Edge(r, s, (face.index, index_of[(s, r)])))
    edges.sort(key=lambda e: (e.u, e.v))
    return Triangulation(vertices, faces, adjacency, edges, xs, ys)


# ============================================================================
# Queries
# ============================================================================

def face_disk_contains(T: Triangulation, f: Face | int, q: Coordinates) -> bool:
    """
    True iff q lies in the closed circumdisk of triangle f, or in the closed
    outer halfplane of hull face f.
    """
    if isinstance(f, int):
        f = T.faces[f]
    x, y = T.xs, T.ys
    if f.is_hull:
        u, v = f.support
        return orient_sign(x[u], y[u], x[v], y[v], q.x, q.y) >= 0
    a, b, c = f.support
    return incircle_sign(x[a], y[a], x[b], y[b], x[c], y[c], q.x, q.y) >= 0


def face_contains_point(T: Triangulation, f: Face | int, q: Coordinates) -> bool:
    """True iff q lies in the closed triangle f, or strictly beyond hull edge f"""
    if isinstance(f, int):
        f = T.faces[f]
    x, y = T.xs, T.ys
    if f.is_hull:
        u, v = f.support
        return orient_sign(x[u], y[u], x[v], y[v], q.x, q.y) > 0
    a, b, c = f.support
    return all(orient_sign(x[u], y[u], x[v], y[v], q.x, q.y) >= 0
               for u, v in ((a, b), (b, c), (c, a)))


def locate(T: Triangulation, p: Coordinates, hint: int | None = None) -> Face:
    """
    The triangle containing p, or a hull face whose closed outer halfplane
    contains p when p lies outside the hull.

    Starts a visibility walk at face `hint` (default: the first triangle).
    Points on a shared side resolve to whichever face the walk reaches first,
    which is deterministic for a fixed start.
    """
    x, y = T.xs, T.ys
    px, py = p.x, p.y
    f = 0 if hint is None else hint
    faces, adjacency = T.faces, T.adjacency
    for _ in range(2 * len(faces) + 8):
        face = faces[f]
        if face.is_hull:
            u, v = face.support
            if orient_sign(x[u], y[u], x[v], y[v], px, py) > 0:
                return face
            f = adjacency[f][0]
            continue
        a, b, c = face.support
        for side, (u, v) in enumerate(((a, b), (b, c), (c, a))):
            if orient_sign(x[u], y[u], x[v], y[v], px, py) < 0:
                f = adjacency[f][side]
                break
        else:
            return face
    logger.debug("locate walk did not settle, scanning %d faces", len(faces))
    return next(face for face in faces if face_contains_point(T, face, p))


# ============================================================================
# Debug output
# ============================================================================

def to_off(T: Triangulation) -> str:
    """OFF listing of the vertices (z = 0) and triangle index triples"""
    lines = ['OFF', f"{len(T.vertices)} {len(T.triangles)} 0"]
    lines.extend(f"{p.x!r} {p.y!r} 0" for p in T.vertices)
    lines.extend(f"3 {a} {b} {c}" for a, b, c in (f.support for f in T.triangles))
    return '\n'.join(lines) + '\n'


def write_off(T: Triangulation, path_or_stream: str | TextIO) -> None:
    if isinstance(path_or_stream, str):
        with open(path_or_stream, 'w', encoding='utf-8') as f:
            f.write(to_off(T))
    else:
        path_or_stream.write(to_off(T))
