"""
depth.py - Covering faces and per-edge subproblems

For every input point the faces whose closed disk contains it are found by
locating the point and then running a breadth-first search over the dual
graph, pruning at faces whose disk misses the point. Points are processed
in Hilbert order so each location walk starts next to the previous answer.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .delaunay import Face, Triangulation, face_disk_contains, locate
from .geom import Coordinates, Point, hilbert_order, incircle_signs, orient_signs, point_arrays

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EdgeSubproblem:
    """
    Points charged to one triangulation edge.

    edge holds vertex indices into the triangulation; members are sorted by
    id. eps_prime * weighted_size == need holds exactly.
    """

    edge: tuple[int, int]
    endpoints: tuple[Point, Point]
    faces: tuple[Face, Face]
    members: list[Point]
    weighted_size: int
    eps_prime: Fraction
    need: Fraction

    @property
    def key(self) -> tuple[int, int]:
        """Stable ids of the edge endpoints"""
        return (self.endpoints[0].id, self.endpoints[1].id)

    def __repr__(self):
        return (f"EdgeSubproblem(edge={self.key}, members={len(self.members)}, "
                f"weighted_size={self.weighted_size}, eps_prime={self.eps_prime})")


def _covering(T: Triangulation, p: Coordinates,
              hint: int | None = None) -> tuple[int, list[int]]:
    start = locate(T, p, hint).index
    found = [start]
    seen = {start}
    queue = deque([start])
    adjacency = T.adjacency
    while queue:
        f = queue.popleft()
        for g in adjacency[f]:
            if g in seen:
                continue
            seen.add(g)
            if face_disk_contains(T, g, p):
                found.append(g)
                queue.append(g)
    return start, found


def covering_faces(T: Triangulation, p: Coordinates) -> set[Face]:
    """
    All faces whose closed disk (triangle circumdisk or hull halfplane)
    contains p.

    Example:
        T = build(sample)
        {f.index for f in covering_faces(T, Point(0.5, 0.5))}
    """
    _, found = _covering(T, p)
    return {T.faces[f] for f in found}


def face_point_sets(T: Triangulation, P: Sequence[Point]) -> list[list[int]]:
    """For every face, the indices into P of the points inside its disk"""
    per_face: list[list[int]] = [[] for _ in T.faces]
    if not P:
        return per_face
    xs, ys, _ = point_arrays(P)
    hint = None
    incidences = 0
    for i in hilbert_order(xs, ys).tolist():
        hint, found = _covering(T, P[i], hint)
        incidences += len(found)
        for f in found:
            per_face[f].append(i)
    logger.debug("%d points, %d faces, %d incidences", len(P), len(T.faces), incidences)
    return per_face


def _edge_members(per_face: list[list[int]], faces: tuple[int, int]) -> np.ndarray:
    first = np.asarray(per_face[faces[0]], dtype=np.int64)
    second = np.asarray(per_face[faces[1]], dtype=np.int64)
    return np.union1d(first, second)


def edge_weights(T: Triangulation, P: Sequence[Point],
                 per_face: list[list[int]] | None = None) -> np.ndarray:
    """Weighted size of P_e for every edge of T, in T.edges order"""
    if per_face is None:
        per_face = face_point_sets(T, P)
    _, _, ws = point_arrays(P)
    return np.array([int(ws[_edge_members(per_face, e.faces)].sum()) for e in T.edges],
                    dtype=np.int64)


def face_masks(T: Triangulation, P: Sequence[Point]) -> np.ndarray:
    """
    (faces x points) table of closed disk membership, one batched
    predicate call per face. Suited to small triangulations over many
    points, where the per-point search of face_point_sets does not pay off.
    """
    xs, ys, _ = point_arrays(P)
    x, y = T.xs, T.ys
    masks = np.zeros((len(T.faces), len(P)), dtype=bool)
    for f in T.faces:
        if f.is_hull:
            u, v = f.support
            masks[f.index] = orient_signs(x[u], y[u], x[v], y[v], xs, ys) >= 0
        else:
            a, b, c = f.support
            masks[f.index] = incircle_signs(x[a], y[a], x[b], y[b],
                                            x[c:c + 1], y[c:c + 1], xs, ys)[0] >= 0
    return masks


def max_edge_weight(T: Triangulation, P: Sequence[Point]) -> int:
    """Largest weighted |P_e| over the edges of T"""
    masks = face_masks(T, P)
    _, _, ws = point_arrays(P)
    return max((int(ws[masks[e.faces[0]] | masks[e.faces[1]]].sum()) for e in T.edges),
               default=0)


def assemble_subproblems(T: Triangulation, P: Sequence[Point], need: Fraction,
                         keep_all: bool = False) -> list[EdgeSubproblem]:
    """
    One subproblem per triangulation edge: the points in the union of the
    disks of its two faces, with eps_prime = need / weighted size.

    Edges whose weighted size is below `need` cannot carry a qualifying disk
    and are dropped unless keep_all is set.
    """
    need = Fraction(need)
    per_face = face_point_sets(T, P)
    _, _, ws = point_arrays(P)
    subproblems = []
    dropped = 0
    for e in T.edges:
        idx = _edge_members(per_face, e.faces)
        weight = int(ws[idx].sum())
        if weight == 0 or (weight < need and not keep_all):
            dropped += 1
            continue
        members = sorted((P[i] for i in idx.tolist()), key=lambda p: p.id)
        subproblems.append(EdgeSubproblem(
            edge=(e.u, e.v),
            endpoints=(T.vertices[e.u], T.vertices[e.v]),
            faces=(T.faces[e.faces[0]], T.faces[e.faces[1]]),
            members=members,
            weighted_size=weight,
            eps_prime=need / weight,
            need=need,
        ))
    logger.debug("%d subproblems, %d light edges dropped", len(subproblems), dropped)
    return subproblems


def size_band(ratio: Fraction) -> tuple[Fraction, Fraction]:
    """
    Band [k1, k2) holding |P_e| / (eps n): [0, 1), [1, 3/2), [3/2, 2), then
    dyadic [2^i, 2^(i+1)).
    """
    ratio = Fraction(ratio)
    if ratio < 1:
        return (Fraction(0), Fraction(1))
    if ratio < Fraction(3, 2):
        return (Fraction(1), Fraction(3, 2))
    if ratio < 2:
        return (Fraction(3, 2), Fraction(2))
    i = (ratio.numerator // ratio.denominator).bit_length() - 1
    return (Fraction(2 ** i), Fraction(2 ** (i + 1)))
