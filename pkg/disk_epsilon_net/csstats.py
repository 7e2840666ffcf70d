"""
csstats.py - Brute-force counts behind the expected-size analysis

A quadruple ({p,q},{r,s}) has r and s strictly on opposite sides of pq,
so the triangles pqr and pqs have disjoint interiors; its weight is the
number of points in the union of their closed circumdisks. A triple
({p,q},{r}) is weighted by the circumdisk of pqr together with the closed
halfplane of pq away from r.

Counts are compared with the sampling bounds 3.1 n k^3 and 2.14 n k^2
(valid for k >= 13) and with the exact expressions those constants come
from. subproblem_histogram measures how many edges of the sampled
triangulation fall in each size band and sets it against the expected
count ceiling.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import delaunay
from .depth import edge_weights, size_band
from .errors import DegenerateGeometryError
from .geom import Point, incircle_signs, orient_signs, point_arrays
from .netbuilder import BASE_CASE, NetBuilder, Config

logger = logging.getLogger(__name__)

QUADRUPLE_CONSTANT = 3.1
TRIPLE_CONSTANT = 2.14


def _jittered(P: Sequence[Point], seed: int) -> list[Point]:
    xs, ys, _ = point_arrays(P)
    span = max(float(np.ptp(xs)), float(np.ptp(ys))) or 1.0
    noise = np.random.default_rng(seed).uniform(-1.0, 1.0, (len(P), 2)) * span * 1e-9
    return [Point(float(p.x + dx), float(p.y + dy), p.weight, p.id)
            for p, (dx, dy) in zip(P, noise.tolist())]


def _pair_disks(xs, ys, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Orientation of every point against i->j, and the closed circumdisk
    membership matrix of (i, j, r) for every r (rows of collinear r empty).

    Raises:
        DegenerateGeometryError: a fourth point on some circle
    """
    m = len(xs)
    known = np.zeros(m, dtype=bool)
    known[[i, j]] = True
    o = orient_signs(xs[i], ys[i], xs[j], ys[j], xs, ys, known)
    o[[i, j]] = 0
    rs = np.nonzero(o != 0)[0]
    member = np.zeros((m, m), dtype=bool)
    if len(rs):
        kn = np.zeros((len(rs), m), dtype=bool)
        kn[:, [i, j]] = True
        kn[np.arange(len(rs)), rs] = True
        loc = incircle_signs(xs[i], ys[i], xs[j], ys[j], xs[rs], ys[rs], xs, ys, kn)
        loc = loc * o[rs][:, None]
        loc[kn] = 0
        if np.any((loc == 0) & ~kn):
            raise DegenerateGeometryError(
                "four or more cocircular points; use jitter to count anyway")
        member[rs] = loc >= 0
    return o, member


def _prepare(P: Sequence[Point], jitter: bool, seed: int) -> list[Point]:
    P = list(P)
    return _jittered(P, seed) if jitter else P


def quadruple_weights(P: Sequence[Point], jitter: bool = False, seed: int = 0) -> np.ndarray:
    """Weights of all quadruples of P (one entry per quadruple)"""
    P = _prepare(P, jitter, seed)
    xs, ys, ws = point_arrays(P)
    wf = ws.astype(float)
    out = []
    for i in range(len(P) - 1):
        for j in range(i + 1, len(P)):
            o, member = _pair_disks(xs, ys, i, j)
            left = np.nonzero(o > 0)[0]
            right = np.nonzero(o < 0)[0]
            if not len(left) or not len(right):
                continue
            ml = member[left].astype(float)
            mr = member[right].astype(float)
            union = (ml @ wf)[:, None] + (mr @ wf)[None, :] - (ml * wf) @ mr.T
            out.append(np.rint(union).astype(np.int64).ravel())
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def triple_weights(P: Sequence[Point], jitter: bool = False, seed: int = 0) -> np.ndarray:
    """Weights of all triples of P (one entry per triple)"""
    P = _prepare(P, jitter, seed)
    xs, ys, ws = point_arrays(P)
    out = []
    for i in range(len(P) - 1):
        for j in range(i + 1, len(P)):
            o, member = _pair_disks(xs, ys, i, j)
            for r in np.nonzero(o != 0)[0].tolist():
                # closed halfplane of ij away from r
                away = (o <= 0) if o[r] > 0 else (o >= 0)
                out.append(int(ws[member[r] | away].sum()))
    return np.array(out, dtype=np.int64)


def count_quadruples_leq(P: Sequence[Point], k: int, jitter: bool = False,
                         seed: int = 0) -> int:
    """
    Number of quadruples of weight at most k.

    Raises:
        DegenerateGeometryError: cocircular points and jitter off
    """
    return int(np.count_nonzero(quadruple_weights(P, jitter, seed) <= k))


def count_triples_leq(P: Sequence[Point], k: int, jitter: bool = False,
                      seed: int = 0) -> int:
    """
    Number of triples of weight at most k.

    Raises:
        DegenerateGeometryError: cocircular points and jitter off
    """
    return int(np.count_nonzero(triple_weights(P, jitter, seed) <= k))


def quadruple_bound(n: int, k: int) -> float:
    return QUADRUPLE_CONSTANT * n * k ** 3


def triple_bound(n: int, k: int) -> float:
    return TRIPLE_CONSTANT * n * k ** 2


def exact_quadruple_bound(n: int, k: int) -> float:
    """n k^3 (1/9) (1 + 3/k)^(k+3)"""
    return n * k ** 3 / 9.0 * (1.0 + 3.0 / k) ** (k + 3)


def exact_triple_bound(n: int, k: int) -> float:
    """n k^2 (1/4) (1 + 2/k)^(k+2)"""
    return n * k ** 2 / 4.0 * (1.0 + 2.0 / k) ** (k + 2)


def band_ceiling(k1: float, k2: float, c1: float, eps: float) -> float:
    """Expected number of edges with k1*eps*n <= |P_e| <= k2*eps*n is at most this"""
    k1, k2, c1, eps = float(k1), float(k2), float(c1), float(eps)
    return (QUADRUPLE_CONSTANT * c1 ** 3 / (eps * math.exp(k1 * c1))
            * (k1 ** 3 * c1 + 3.7 * k2 ** 2))


def expected_size_bound(c1: float = 12.0, terms: int = 30) -> float:
    """
    Closed-form bound on eps * E[net size]: the sample itself, the
    recursion on bands [1, 3/2) and [3/2, 2) (nets of size 2 and 10), and
    the dyadic bands solved recursively.
    """
    c1 = float(c1)
    a = QUADRUPLE_CONSTANT * c1 ** 3
    total = c1
    total += 2 * a * (c1 + 8.34) / math.exp(c1)
    total += 10 * a * ((1.5 ** 3) * c1 + 14.8) / math.exp(1.5 * c1)
    for i in range(1, terms + 1):
        exponent = c1 * 2 ** i
        if exponent > 700:
            break
        total += (a * (2 ** (3 * i) * c1 + 3.7 * 2 ** (2 * i + 2))
                  / math.exp(exponent) * 13.4 * 2 ** (i + 1))
    return total


@dataclass(frozen=True)
class ClaimCheck:
    """One CSV row: (n, k, count, bound, ok)"""

    kind: str
    n: int
    k: int
    count: int
    bound: float
    exact_bound: float

    @property
    def ok(self) -> bool:
        return self.count <= self.bound


def check_claims(P: Sequence[Point], ks: Iterable[int], jitter: bool = True,
                 seed: int = 0) -> list[ClaimCheck]:
    """Quadruple and triple counts for each k against their bounds"""
    P = list(P)
    n = sum(p.weight for p in P)
    qw = quadruple_weights(P, jitter, seed)
    tw = triple_weights(P, jitter, seed)
    rows = []
    for k in ks:
        rows.append(ClaimCheck('quadruple', n, k, int(np.count_nonzero(qw <= k)),
                               quadruple_bound(n, k), exact_quadruple_bound(n, k)))
        rows.append(ClaimCheck('triple', n, k, int(np.count_nonzero(tw <= k)),
                               triple_bound(n, k), exact_triple_bound(n, k)))
    return rows


@dataclass
class Band:
    k1: Fraction
    k2: Fraction
    mean: float
    ceiling: float | None

    @property
    def ok(self) -> bool:
        return self.ceiling is None or self.mean <= self.ceiling


@dataclass
class SubproblemHistogram:
    """Mean edge count per size band over the seeds, and per-seed edge totals"""

    bands: list[Band]
    edge_counts: list[int]
    band_totals: list[int]
    seeds: list[int] = field(default_factory=list)


def subproblem_histogram(P: Sequence[Point], eps, c1: float = 12.0,
                         seeds: Iterable[int] = range(10)) -> SubproblemHistogram:
    """
    Monte-Carlo estimate of the number of triangulation edges whose point
    set has size in each band, measured in units of eps * n.

    Raises:
        DegenerateGeometryError: eps * n < 13
    """
    P = list(P)
    seeds = list(seeds)
    total = sum(p.weight for p in P)
    cfg_eps = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    need = cfg_eps * total
    if need < BASE_CASE:
        raise DegenerateGeometryError(f"eps * n = {float(need):g} is below {BASE_CASE}")

    counts: dict[tuple[Fraction, Fraction], int] = {}
    edge_counts, band_totals = [], []
    for seed in seeds:
        builder = NetBuilder(Config(epsilon=cfg_eps, c1=c1, seed=seed))
        R, _ = builder.draw_sample(P, need, (), 0)
        T = delaunay.build(R)
        weights = edge_weights(T, P)
        edge_counts.append(len(T.edges))
        seen = 0
        for w in weights.tolist():
            band = size_band(Fraction(w) / need)
            counts[band] = counts.get(band, 0) + 1
            seen += 1
        band_totals.append(seen)
        logger.debug("seed %d: %d edges", seed, len(T.edges))

    bands = []
    for (k1, k2), c in sorted(counts.items()):
        ceiling = band_ceiling(k1, k2, c1, cfg_eps) if k1 >= 1 else None
        bands.append(Band(k1, k2, c / len(seeds), ceiling))
    return SubproblemHistogram(bands, edge_counts, band_totals, seeds)
