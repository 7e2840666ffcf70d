"""
oracle.py - Brute-force verifier for epsilon-nets

Every set cut out of P by a closed disk or halfplane is, up to the choice
of which boundary points to keep, cut out by a canonical region: a circle
through three points of P, a line through two, or a single point. The
oracle walks all canonical regions of P (the diametral disk of every pair
is included as well) and, for a candidate net S, keeps the heaviest region
whose interior holds no point of S. Boundary points are then added except
the ones in S.

When more than three points share a circle (more than two a line) not all
boundary subsets are reachable by a small perturbation. Only contiguous
arcs of the circle (a prefix or suffix of the line) are, and those rows are
evaluated one by one.

This is O(|P|^4) and meant for a few hundred points at most.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import OracleLimitError
from .geom import (
    Circle,
    CircleBySupport,
    GeneralizedDisk,
    Halfplane,
    Point,
    Side,
    circumdisk,
    diametral_signs,
    incircle_signs,
    orient_sign,
    orient_signs,
    point_arrays,
)

logger = logging.getLogger(__name__)

_POINT = 'point'
_DIAMETRAL = 'diametral'
_HALFPLANE = 'halfplane'
_CIRCLE = 'circle'


@dataclass(frozen=True)
class Violation:
    """
    A range avoiding the candidate net.

    The range is the closed disk minus the `excluded` boundary points; it is
    the limit of genuine closed disks and holds `depth` weighted points.
    witnesses are the ids of the defining support points.
    """

    disk: GeneralizedDisk
    depth: int
    witnesses: tuple[int, ...]
    excluded: tuple[int, ...] = ()

    def region_contains(self, q: Point) -> bool:
        return q.id not in self.excluded and self.disk.contains(q)

    def describe(self) -> dict:
        return {
            'depth': self.depth,
            'witnesses': list(self.witnesses),
            'excluded': list(self.excluded),
            'disk': self.disk.describe(),
        }


def _as_fraction(epsilon) -> Fraction:
    if isinstance(epsilon, float):
        return Fraction(str(epsilon))
    return Fraction(epsilon)


def canonical_disks(M: Sequence[Point]) -> Iterator[GeneralizedDisk]:
    """
    Every diametral disk and both closed halfplanes of each pair, then the
    circumdisk of every non-collinear triple, pair by pair.
    """
    m = len(M)
    for i in range(m - 1):
        for j in range(i + 1, m):
            a, b = M[i], M[j]
            yield Circle.diametral(a, b)
            yield Halfplane(a, b, Side.LEFT)
            yield Halfplane(a, b, Side.RIGHT)
            for r in range(j + 1, m):
                c = M[r]
                if orient_sign(a.x, a.y, b.x, b.y, c.x, c.y) != 0:
                    yield CircleBySupport(a, b, c)


@dataclass
class _Block:
    """Location rows (1 inside, 0 boundary, -1 outside) for the regions of one pair"""

    kinds: list[str]
    supports: list[tuple]
    loc: np.ndarray


def _blocks(xs: np.ndarray, ys: np.ndarray) -> Iterator[_Block]:
    m = len(xs)
    for i in range(m - 1):
        xi, yi = float(xs[i]), float(ys[i])
        for j in range(i + 1, m):
            xj, yj = float(xs[j]), float(ys[j])
            known = np.zeros(m, dtype=bool)
            known[[i, j]] = True
            o = orient_signs(xi, yi, xj, yj, xs, ys, known)
            o[[i, j]] = 0
            d = diametral_signs(xi, yi, xj, yj, xs, ys, known)
            d[[i, j]] = 0
            rest = np.arange(j + 1, m)
            rs = rest[o[rest] != 0]

            loc = np.empty((3 + len(rs), m), dtype=np.int8)
            loc[0] = -d
            loc[1] = o
            loc[2] = -o
            if len(rs):
                kn = np.zeros((len(rs), m), dtype=bool)
                kn[:, [i, j]] = True
                kn[np.arange(len(rs)), rs] = True
                ic = incircle_signs(xi, yi, xj, yj, xs[rs], ys[rs], xs, ys, kn)
                ic = ic * o[rs][:, None]
                ic[kn] = 0
                loc[3:] = ic
            kinds = [_DIAMETRAL, _HALFPLANE, _HALFPLANE] + [_CIRCLE] * len(rs)
            supports = ([(i, j, None), (i, j, Side.LEFT), (i, j, Side.RIGHT)]
                        + [(i, j, int(r)) for r in rs])
            yield _Block(kinds, supports, loc)


def _boundary_choice(kind: str, support: tuple, row: np.ndarray, xs: np.ndarray,
                     ys: np.ndarray, ws: np.ndarray, in_s: np.ndarray) -> np.ndarray:
    """Boundary indices of the heaviest reachable pattern avoiding S"""
    bidx = np.nonzero(row == 0)[0]
    limit = 2 if kind == _HALFPLANE else 3
    if len(bidx) <= limit:
        return bidx[~in_s[bidx]]

    if kind == _HALFPLANE:
        ordered = bidx[np.lexsort((ys[bidx], xs[bidx]))]
        flags = in_s[ordered]
        if not flags.any():
            return ordered
        hits = np.nonzero(flags)[0]
        prefix = ordered[:hits[0]]
        suffix = ordered[hits[-1] + 1:]
        return prefix if ws[prefix].sum() >= ws[suffix].sum() else suffix

    i, j, r = support
    if kind == _DIAMETRAL:
        cx, cy = (xs[i] + xs[j]) / 2, (ys[i] + ys[j]) / 2
    else:
        center = circumdisk(Point(xs[i], ys[i]), Point(xs[j], ys[j]),
                            Point(xs[r], ys[r])).center
        cx, cy = float(center[0]), float(center[1])
    ordered = bidx[np.argsort(np.arctan2(ys[bidx] - cy, xs[bidx] - cx), kind='stable')]
    flags = in_s[ordered]
    if not flags.any():
        return ordered
    # start right after an S point so runs never wrap
    first = int(np.nonzero(flags)[0][0])
    ordered = np.roll(ordered, -(first + 1))
    flags = np.roll(flags, -(first + 1))
    best, best_w = ordered[:0], -1
    start = 0
    for k in range(len(ordered) + 1):
        if k == len(ordered) or flags[k]:
            run = ordered[start:k]
            w = int(ws[run].sum())
            if w > best_w:
                best, best_w = run, w
            start = k + 1
    return best


def _build_region(P: Sequence[Point], kind: str, support: tuple, row: np.ndarray | None,
                  xs, ys, ws, in_s, depth: int) -> Violation:
    if kind == _POINT:
        i = support[0]
        return Violation(Circle.point(P[i]), depth, (P[i].id,))
    i, j, extra = support
    if kind == _DIAMETRAL:
        disk = Circle.diametral(P[i], P[j])
        witnesses = (P[i].id, P[j].id)
    elif kind == _HALFPLANE:
        disk = Halfplane(P[i], P[j], extra)
        witnesses = (P[i].id, P[j].id)
    else:
        disk = CircleBySupport(P[i], P[j], P[extra])
        witnesses = (P[i].id, P[j].id, P[extra].id)
    chosen = set(_boundary_choice(kind, support, row, xs, ys, ws, in_s).tolist())
    excluded = tuple(sorted(P[k].id for k in np.nonzero(row == 0)[0].tolist()
                            if k not in chosen))
    return Violation(disk, depth, witnesses, excluded)


def _candidate_matrix(P: Sequence[Point], candidates: Sequence[Iterable]) -> np.ndarray:
    column = {p.id: k for k, p in enumerate(P)}
    S = np.zeros((len(P), len(candidates)), dtype=float)
    for c, cand in enumerate(candidates):
        for s in cand:
            sid = s.id if isinstance(s, Point) else int(s)
            if sid not in column:
                raise ValueError(f"net point id {sid} is not in P")
            S[column[sid], c] = 1.0
    return S


def max_uncovered_depths(P: Sequence[Point],
                         candidates: Sequence[Iterable]) -> list[tuple[int, Optional[Violation]]]:
    """
    For each candidate net (ids or Points of P), the heaviest weighted range
    avoiding it, with the region that attains it (None for depth 0).

    All candidates share one pass over the canonical regions.
    """
    C = len(candidates)
    if C == 0:
        return []
    m = len(P)
    if m == 0:
        return [(0, None)] * C
    xs, ys, ws_int = point_arrays(P)
    ws = ws_int.astype(float)
    S = _candidate_matrix(P, candidates)
    WS = S * ws[:, None]

    best = np.zeros(C)
    best_at: list[Optional[tuple]] = [None] * C

    singles = ws[:, None] * (1.0 - S)
    top = singles.max(axis=0)
    arg = singles.argmax(axis=0)
    for c in np.nonzero(top > best)[0].tolist():
        best[c] = top[c]
        best_at[c] = (_POINT, (int(arg[c]),), None)

    rows_seen = 0
    for block in _blocks(xs, ys):
        loc = block.loc
        inside = (loc == 1).astype(float)
        bnd = (loc == 0).astype(float)
        hits = inside @ S
        inside_w = inside @ ws
        values = (inside_w + bnd @ ws)[:, None] - bnd @ WS
        values[hits > 0] = -1.0

        nb = bnd.sum(axis=1)
        limits = np.array([2 if k == _HALFPLANE else 3 for k in block.kinds])
        for r in np.nonzero(nb > limits)[0].tolist():
            for c in np.nonzero(hits[r] == 0)[0].tolist():
                chosen = _boundary_choice(block.kinds[r], block.supports[r], loc[r],
                                          xs, ys, ws, S[:, c] > 0)
                values[r, c] = inside_w[r] + ws[chosen].sum()

        top = values.max(axis=0)
        arg = values.argmax(axis=0)
        for c in np.nonzero(top > best)[0].tolist():
            r = int(arg[c])
            best[c] = top[c]
            best_at[c] = (block.kinds[r], block.supports[r], loc[r].copy())
        rows_seen += len(loc)

    logger.debug("oracle: %d points, %d candidates, %d canonical regions", m, C, rows_seen)

    results = []
    for c in range(C):
        depth = int(round(best[c]))
        if best_at[c] is None:
            results.append((depth, None))
            continue
        kind, support, row = best_at[c]
        region = _build_region(P, kind, support, row, xs, ys, ws, S[:, c] > 0, depth)
        results.append((depth, region))
    return results


def max_uncovered_depth(P: Sequence[Point],
                        S: Iterable) -> tuple[int, Optional[Violation]]:
    """
    Largest weighted |D ∩ P| over closed disks and halfplanes D containing
    no point of S, and the region attaining it.

    Example:
        depth, region = max_uncovered_depth(points, [])   # depth == total weight
    """
    return max_uncovered_depths(P, [list(S)])[0]


def _check_cap(P: Sequence[Point], cap: int | None) -> None:
    if cap is not None and len(P) > cap:
        raise OracleLimitError(len(P), cap)


def verify_net(P: Sequence[Point], S: Iterable, epsilon,
               cap: int | None = None) -> Optional[Violation]:
    """
    None if S is an epsilon-net of P for closed disks and halfplanes,
    otherwise a range of weight >= epsilon * n that avoids S.

    Raises:
        OracleLimitError: |P| exceeds cap
        ValueError: S names an id that is not in P
    """
    _check_cap(P, cap)
    epsilon = _as_fraction(epsilon)
    total = sum(p.weight for p in P)
    need = epsilon * total
    if epsilon > 1 or not P:
        return None
    depth, region = max_uncovered_depth(P, S)
    if region is not None and depth >= need:
        logger.debug("violation: depth %d >= %s", depth, need)
        return region
    return None


def _exact_region(P: Sequence[Point], disk: GeneralizedDisk,
                  in_s: set[int]) -> tuple[int, bool]:
    weight = 0
    for p in P:
        if disk.contains(p):
            if p.id in in_s:
                return weight, False
            weight += p.weight
    return weight, True


def random_probe(P: Sequence[Point], S: Iterable, epsilon, trials: int = 100_000,
                 seed: int = 0, batch: int = 2048) -> Optional[Violation]:
    """
    Random closed disks and halfplanes screened in floating point, with any
    apparent violation re-checked exactly. Never reports a false violation;
    may miss real ones.

    Centers are drawn from the bounding box dilated by its size on every
    side and radii log-uniformly; the other half of the trials are random
    halfplanes.
    """
    epsilon = _as_fraction(epsilon)
    if epsilon > 1 or not P or trials < 1:
        return None
    total = sum(p.weight for p in P)
    need = epsilon * total
    in_s = {s.id if isinstance(s, Point) else int(s) for s in S}
    xs, ys, ws_int = point_arrays(P)
    ws = ws_int.astype(float)
    s_mask = np.array([p.id in in_s for p in P], dtype=float)
    rng = np.random.default_rng(seed)

    xmin, xmax = float(xs.min()), float(xs.max())
    ymin, ymax = float(ys.min()), float(ys.max())
    span = max(xmax - xmin, ymax - ymin) or 1.0
    lo_r, hi_r = math.log(span * 1e-3), math.log(span * 3.0)
    threshold = float(need)

    done = 0
    while done < trials:
        k = min(batch, trials - done)
        done += k
        n_circle = k // 2 + k % 2

        cx = rng.uniform(xmin - span, xmax + span, n_circle)
        cy = rng.uniform(ymin - span, ymax + span, n_circle)
        r2 = np.exp(rng.uniform(lo_r, hi_r, n_circle)) ** 2
        d2 = (xs[None, :] - cx[:, None]) ** 2 + (ys[None, :] - cy[:, None]) ** 2
        inside = (d2 <= r2[:, None]).astype(float)
        for t in np.nonzero((inside @ ws >= threshold) & (inside @ s_mask == 0))[0].tolist():
            disk = Circle((float(cx[t]), float(cy[t])), float(r2[t]))
            weight, clean = _exact_region(P, disk, in_s)
            if clean and weight >= need:
                return Violation(disk, weight, ())

        n_half = k - n_circle
        theta = rng.uniform(0.0, 2.0 * math.pi, n_half)
        nx, ny = np.cos(theta), np.sin(theta)
        proj = xs[None, :] * nx[:, None] + ys[None, :] * ny[:, None]
        offset = rng.uniform(proj.min(axis=1) - 0.1 * span, proj.max(axis=1) + 0.1 * span)
        inside = (proj >= offset[:, None]).astype(float)
        for t in np.nonzero((inside @ ws >= threshold) & (inside @ s_mask == 0))[0].tolist():
            ax, ay = float(offset[t] * nx[t]), float(offset[t] * ny[t])
            a = Point(ax, ay)
            b = Point(ax + float(ny[t]), ay - float(nx[t]))
            if a.x == b.x and a.y == b.y:
                continue
            disk = Halfplane(a, b, Side.LEFT)
            weight, clean = _exact_region(P, disk, in_s)
            if clean and weight >= need:
                return Violation(disk, weight, ())
    return None
