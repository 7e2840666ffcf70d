"""
netbuilder.py - Sample-and-refine epsilon-net construction for disks

Outline of one call on a weighted point set of total weight n and a
threshold need = eps * n:

  1. need < 13: the whole set is returned.
  2. Every point is kept with probability c1 / need (one Bernoulli trial
     per unit of weight). A sample of at most c1 / (2 eps) points is
     redrawn.
  3. The sample R is triangulated. For each edge e the points inside the
     disks of its two faces form P_e, and an (need / |P_e|)-net of P_e is
     built according to the size of that ratio.
  4. R together with all partial nets is the answer.

Points of R are dropped from P_e before the subproblem is solved (a disk
that misses the net misses them too), so every subproblem is strictly
lighter than its parent. A recursive call with need above half its weight
first looks for a thin net: a few central points leaving no heavy edge.

need never changes down the recursion (eps' * |P_e| == need), so it is
carried as an exact Fraction. Random streams are derived from the seed and
the path of (attempt, edge) keys leading to a call, so results do not
depend on the order in which subproblems are handled. Identical member
sets are solved once per build, and a call budget bounds the total work.
"""

from __future__ import annotations

import logging
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from . import delaunay
from .depth import EdgeSubproblem, assemble_subproblems, max_edge_weight, size_band
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    NetConstructionError,
    SamplingError,
)
from .geom import Point, collinear_line, orient_signs, point_arrays, iter_quadrant_partitions
from .oracle import max_uncovered_depth, max_uncovered_depths

logger = logging.getLogger(__name__)

BASE_CASE = 13
RESTART_RULE = "|R| <= c1/(2*eps)"

# pair search limits for the two-point construction
PAIR_LIMIT = 2000
PAIR_POOL = 40
# quadrant partitions tried by the ten-point construction
PARTITION_TRIES = 8
# thin nets: subset sizes, draws per size and the central pool they come from
THIN_SIZES = (3, 4, 5, 6)
THIN_TRIES = 12
THIN_POOL = 24
# default call budget per unit of n / need, and its floor
CALLS_PER_UNIT = 64
MIN_CALLS = 256


class Mode(Enum):
    RECURSIVE = 'recursive'
    HYBRID = 'hybrid'


def parse_epsilon(value) -> Fraction:
    """
    Exact epsilon from a decimal string, Fraction, int or float.

    Floats go through str() so 0.1 means 1/10.

    Raises:
        ConfigError: unparsable value
    """
    try:
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError(value)
            return Fraction(str(value))
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise ConfigError(f"invalid epsilon {value!r}") from e


@dataclass(frozen=True)
class Config:
    """
    Construction parameters.

    epsilon is stored as an exact Fraction. mode may be given as a Mode or
    its string value. max_calls bounds the recursive calls of one build
    (None: 64 per unit of n / (eps n), at least 256); calls past it keep
    their whole point set.
    """

    epsilon: Fraction
    c1: float = 12.0
    seed: int = 0
    mode: Mode = Mode.RECURSIVE
    max_depth: int = 64
    restart_cap: int = 1000
    two_point_plugin: bool = True
    hybrid_cap: int = 64
    max_calls: Optional[int] = None

    def __post_init__(self):
        eps = parse_epsilon(self.epsilon)
        if not (0 < eps <= 1):
            raise ConfigError(f"epsilon must be in (0, 1], got {eps}")
        object.__setattr__(self, 'epsilon', eps)
        try:
            mode = Mode(self.mode)
        except ValueError as e:
            raise ConfigError(f"unknown mode {self.mode!r}") from e
        object.__setattr__(self, 'mode', mode)
        try:
            c1 = float(self.c1)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid c1 {self.c1!r}") from e
        if not (math.isfinite(c1) and c1 > 0):
            raise ConfigError(f"c1 must be positive, got {self.c1}")
        object.__setattr__(self, 'c1', c1)
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        if self.restart_cap < 1:
            raise ConfigError("restart_cap must be >= 1")
        if self.hybrid_cap < 4:
            raise ConfigError("hybrid_cap must be >= 4")
        if self.max_calls is not None and self.max_calls < 1:
            raise ConfigError("max_calls must be >= 1")

    def describe(self) -> dict:
        return {
            'epsilon': str(self.epsilon),
            'c1': self.c1,
            'seed': self.seed,
            'mode': self.mode.value,
            'max_depth': self.max_depth,
            'restart_cap': self.restart_cap,
            'two_point_plugin': self.two_point_plugin,
            'hybrid_cap': self.hybrid_cap,
            'max_calls': self.max_calls,
        }


@dataclass
class NetResult:
    """Net point ids (sorted), construction statistics and the config used"""

    net: list[int]
    stats: dict
    config: Config

    @property
    def size(self) -> int:
        return len(self.net)

    def points(self, P: Sequence[Point]) -> list[Point]:
        chosen = set(self.net)
        return [p for p in P if p.id in chosen]

    def to_dict(self) -> dict:
        return {'net': list(self.net), 'stats': self.stats, 'config': self.config.describe()}


@dataclass
class _LevelStats:
    calls: int = 0
    restarts: int = 0
    sample_points: int = 0
    subproblems: int = 0
    bands: dict = field(default_factory=lambda: defaultdict(int))

    def as_dict(self) -> dict:
        return {
            'calls': self.calls,
            'restarts': self.restarts,
            'sample_points': self.sample_points,
            'subproblems': self.subproblems,
            'size_bands': {f"[{float(k1):g},{float(k2):g})": v
                           for (k1, k2), v in sorted(self.bands.items())},
        }


# ============================================================================
# Building blocks
# ============================================================================

def _rng(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def draw_sample(P: Sequence[Point], p_keep: float, rng,
                threshold: Optional[Fraction] = None) -> Optional[list[Point]]:
    """
    Keep every point independently with probability p_keep per unit of
    weight (a point of weight w survives with probability 1 - (1-p)^w).

    Returns None (restart) when threshold is given and the sample holds at
    most `threshold` points. rng may be a seed or a numpy Generator.
    """
    if p_keep >= 1:
        R = list(P)
    else:
        rng = np.random.default_rng(rng)
        _, _, ws = point_arrays(P)
        keep = rng.random(len(P)) < -np.expm1(ws * math.log1p(-p_keep))
        R = [p for p, k in zip(P, keep.tolist()) if k]
    if threshold is not None and len(R) <= threshold:
        return None
    return R


def interval_net(P: Sequence[Point], need: Fraction) -> list[Point]:
    """
    Net of a collinear point set: walking along the line, pick a point
    whenever the unpicked weight would reach `need`. Every contiguous run
    of weight >= need then holds a pick.
    """
    picked = []
    acc = 0
    for p in sorted(P, key=lambda p: (p.x, p.y)):
        if acc + p.weight >= need:
            picked.append(p)
            acc = 0
        else:
            acc += p.weight
    return picked


def _total(P: Sequence[Point]) -> int:
    return sum(p.weight for p in P)


def two_point_net(Q: Sequence[Point]) -> list[Point]:
    """
    At most two points of Q hitting every closed disk or halfplane that
    holds more than 2/3 of the weight of Q.

    Searches candidate pairs (all of them for small Q, otherwise pairs of
    the points closest to the coordinate-wise median) and keeps the first
    one the oracle accepts.

    Raises:
        NetConstructionError: no candidate pair works
    """
    Q = list(Q)
    if len(Q) <= 2:
        return Q
    need = 2 * _total(Q) // 3 + 1
    pool = Q
    if math.comb(len(Q), 2) > PAIR_LIMIT:
        xs, ys, _ = point_arrays(Q)
        d2 = (xs - np.median(xs)) ** 2 + (ys - np.median(ys)) ** 2
        pool = [Q[i] for i in np.argsort(d2, kind='stable')[:PAIR_POOL].tolist()]
    candidates = [[a, b] for a, b in combinations(pool, 2)]
    for cand, (depth, _) in zip(candidates, max_uncovered_depths(Q, candidates)):
        if depth < need:
            return cand
    raise NetConstructionError(f"no pair of {len(pool)} candidates is a 2/3-net")


def _opposite_vertices(Q: Sequence[Point], part, q: Point) -> list[Point]:
    """Vertices of the face of Delaunay(Q) containing q that lie in opposite quadrants"""
    T = delaunay.build(Q)
    face = delaunay.locate(T, q)
    verts = [T.vertices[k] for k in face.support]
    if face.is_hull:
        return verts
    quads = [part.quadrants_of(v) for v in verts]
    for a, b in combinations(range(3), 2):
        if any((k + 2) % 4 in quads[b] for k in quads[a]):
            return [verts[a], verts[b]]
    return verts


def ten_point_net(Q: Sequence[Point]) -> list[Point]:
    """
    At most ten points of Q hitting every closed disk or halfplane holding
    at least floor(W/2) + 1 of the weight W of Q.

    Built from a quadrant partition: a two-point net of each closed
    quadrant, plus the crossing point when it belongs to Q, or else two
    vertices in opposite quadrants of the Delaunay face holding it. Each
    result is checked by the oracle before it is returned.

    Raises:
        NetConstructionError: no partition produced a verified net
    """
    Q = list(Q)
    if len(Q) <= 10:
        return Q
    need = _total(Q) // 2 + 1
    by_xy = {(p.x, p.y): p for p in Q}
    tried = 0
    try:
        for part in iter_quadrant_partitions(Q):
            tried += 1
            if tried > PARTITION_TRIES:
                break
            try:
                chosen: dict[int, Point] = {}
                for k in range(4):
                    quadrant = [p for p in Q if k in part.quadrants_of(p)]
                    for p in two_point_net(quadrant):
                        chosen[p.id] = p
                qx, qy = part.q
                q = by_xy.get((float(qx), float(qy)))
                if q is not None and Fraction(q.x) == qx and Fraction(q.y) == qy:
                    chosen[q.id] = q
                else:
                    for p in _opposite_vertices(Q, part, Point(float(qx), float(qy))):
                        chosen[p.id] = p
            except (NetConstructionError, DegenerateGeometryError) as e:
                logger.debug("partition %d rejected: %s", tried, e)
                continue
            net = sorted(chosen.values(), key=lambda p: p.id)
            if len(net) <= 10 and max_uncovered_depth(Q, net)[0] < need:
                return net
    except DegenerateGeometryError as e:
        raise NetConstructionError(str(e)) from e
    raise NetConstructionError(f"no verified ten-point net after {tried} partitions")


def thin_net(P: Sequence[Point], need: Fraction, rng) -> Optional[list[Point]]:
    """
    A few points of P whose triangulation leaves every edge lighter than
    `need`, or None when no drawn subset does.

    A closed disk avoiding the chosen points lies in the union of the two
    face disks of one of their edges, so it holds less than `need`. Only
    tried when need is more than half the weight; subsets of 3 to 6 points
    are drawn from the points nearest the coordinate-wise median.
    """
    P = list(P)
    if len(P) < 3 or 2 * need <= _total(P):
        return None
    xs, ys, _ = point_arrays(P)
    d2 = (xs - np.median(xs)) ** 2 + (ys - np.median(ys)) ** 2
    pool = [P[i] for i in np.argsort(d2, kind='stable')[:THIN_POOL].tolist()]
    rng = np.random.default_rng(rng)
    for size in THIN_SIZES:
        if size > len(pool):
            break
        for _ in range(THIN_TRIES):
            S = [pool[i] for i in sorted(rng.choice(len(pool), size, replace=False).tolist())]
            if collinear_line(S) is not None:
                continue
            if max_edge_weight(delaunay.build(S), P) < need:
                return S
    return None


def _residual(sp: EdgeSubproblem, hit: set[int]) -> Optional[EdgeSubproblem]:
    """
    sp without the points already in the net, or None if nothing is left.
    A disk missing the net misses those points too, so eps' is recomputed
    on what remains.
    """
    members = [p for p in sp.members if p.id not in hit]
    if len(members) == len(sp.members):
        return sp
    if not members:
        return None
    weight = _total(members)
    return replace(sp, members=members, weighted_size=weight, eps_prime=sp.need / weight)


def _repair_sample(P: Sequence[Point], R: list[Point]) -> list[Point]:
    """Add points of P until R is not collinear (P itself is not)"""
    R = list(R)
    while (line := collinear_line(R)) is not None:
        a, b = line
        if a is b or (a.x == b.x and a.y == b.y):
            extra = next(p for p in P if (p.x, p.y) != (a.x, a.y))
        else:
            xs, ys, _ = point_arrays(P)
            off = np.nonzero(orient_signs(a.x, a.y, b.x, b.y, xs, ys))[0]
            extra = P[int(off[0])]
        R.append(extra)
    return R


# ============================================================================
# Builder
# ============================================================================

class NetBuilder:
    """
    Runs the construction for one Config and collects statistics.

    Example:
        builder = NetBuilder(Config(epsilon='0.1', seed=7))
        result = builder.build(points)
        result.size
    """

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self._c1 = Fraction(cfg.c1)
        self._levels: dict[int, _LevelStats] = defaultdict(_LevelStats)
        self._counters: dict[str, int] = defaultdict(int)
        self.top_sample: Optional[list[Point]] = None
        self.top_triangulation: Optional[delaunay.Triangulation] = None
        self._memo: dict[tuple[Fraction, frozenset[int]], list[int]] = {}
        self._calls = 0
        self._budget = cfg.max_calls or MIN_CALLS

    def build(self, P: Sequence[Point]) -> NetResult:
        P = _normalize_ids(P)
        total = _total(P)
        need = self.cfg.epsilon * total
        started = time.perf_counter()
        logger.info("building net: %d points, weight %d, eps %s, c1 %g, seed %d",
                    len(P), total, self.cfg.epsilon, self.cfg.c1, self.cfg.seed)

        if self.cfg.max_calls is None:
            self._budget = max(MIN_CALLS, CALLS_PER_UNIT * math.ceil(total / need))

        if need < BASE_CASE:
            self._counters['base_case'] = 1
            net = [p.id for p in P]
        else:
            net = self._net(P, need, 0, ())
        net = sorted(set(net))

        stats = {
            'n': total,
            'points': len(P),
            'need': str(need),
            'net_size': len(net),
            'restart_rule': RESTART_RULE,
            'restarts': sum(s.restarts for s in self._levels.values()),
            'max_level': max(self._levels, default=0),
            'levels': {lvl: s.as_dict() for lvl, s in sorted(self._levels.items())},
            'top_sample_size': len(self.top_sample) if self.top_sample is not None else None,
            'wall_ms': (time.perf_counter() - started) * 1000.0,
            'calls': self._calls,
            'call_budget': self._budget,
        }
        for name in ('base_case', 'depth_fallbacks', 'collinear_samples',
                     'collinear_subproblems', 'hybrid_fallbacks', 'hybrid_nets',
                     'empty', 'single', 'whole', 'thin_nets', 'memo_hits',
                     'stalled', 'budget_fallbacks'):
            stats[name] = self._counters.get(name, 0)
        return NetResult(net, stats, self.cfg)

    def draw_sample(self, P: Sequence[Point], need: Fraction, key: tuple[int, ...],
                    level: int) -> tuple[list[Point], int]:
        """
        Sample with restarts; returns the sample and the accepted attempt.

        Raises:
            SamplingError: restart_cap attempts were all too small
        """
        weight = _total(P)
        p_keep = float(self._c1 / need)
        # c1 / (2 eps') with eps' = need / weight
        threshold = self._c1 * weight / (2 * need)
        stats = self._levels[level]
        for attempt in range(self.cfg.restart_cap):
            R = draw_sample(P, p_keep, _rng(self.cfg.seed, key + (attempt,)), threshold)
            if R is not None:
                return R, attempt
            stats.restarts += 1
            logger.debug("level %d: sample too small, restart %d", level, attempt + 1)
        raise SamplingError(
            f"sampling persistently undersized after {self.cfg.restart_cap} attempts "
            f"(c1={self.cfg.c1}, need={need})"
        )

    def _net(self, P: Sequence[Point], need: Fraction, level: int,
             key: tuple[int, ...]) -> list[int]:
        if level == 0:
            return self._solve(P, need, level, key)
        # (need, member ids) identifies a call
        memo_key = (need, frozenset(p.id for p in P))
        if memo_key in self._memo:
            self._counters['memo_hits'] += 1
            return self._memo[memo_key]
        net = self._solve(P, need, level, key)
        self._memo[memo_key] = net
        return net

    def _solve(self, P: Sequence[Point], need: Fraction, level: int,
               key: tuple[int, ...]) -> list[int]:
        stats = self._levels[level]
        stats.calls += 1
        self._calls += 1
        if level > self.cfg.max_depth:
            self._counters['depth_fallbacks'] += 1
            logger.warning("max depth %d exceeded, keeping all %d points",
                           self.cfg.max_depth, len(P))
            return [p.id for p in P]
        if self._calls > self._budget:
            if self._counters['budget_fallbacks'] == 0:
                logger.warning("call budget %d spent, keeping whole subproblems from here on",
                               self._budget)
            self._counters['budget_fallbacks'] += 1
            return [p.id for p in P]
        if self._c1 / need >= 1:
            self._counters['whole'] += 1
            return [p.id for p in P]
        if collinear_line(P) is not None:
            self._counters['collinear_subproblems'] += 1
            return [p.id for p in interval_net(P, need)]
        if level > 0:
            # call keys are never used for samples, which append an attempt
            thin = thin_net(P, need, _rng(self.cfg.seed, key))
            if thin is not None:
                self._counters['thin_nets'] += 1
                return [p.id for p in thin]

        R, attempt = self.draw_sample(P, need, key, level)
        if collinear_line(R) is not None:
            self._counters['collinear_samples'] += 1
            logger.warning("collinear sample of %d points, adding off-line points", len(R))
            R = _repair_sample(P, R)
        stats.sample_points += len(R)

        T = delaunay.build(R)
        if level == 0:
            self.top_sample = R
            self.top_triangulation = T
        subproblems = assemble_subproblems(T, P, need)
        stats.subproblems += len(subproblems)

        net = [p.id for p in R]
        hit = set(net)
        weight = _total(P)
        for sp in subproblems:
            stats.bands[size_band(Fraction(sp.weighted_size) / need)] += 1
            rest = _residual(sp, hit)
            if rest is None:
                self._counters['empty'] += 1
                continue
            if rest.weighted_size >= weight:
                self._counters['stalled'] += 1
                net.extend(p.id for p in rest.members)
                continue
            net.extend(self.dispatch_subproblem(rest, level + 1, key + (attempt,) + sp.key))
        logger.debug("level %d: |P| %d, |R| %d, %d subproblems",
                     level, len(P), len(R), len(subproblems))
        return net

    def dispatch_subproblem(self, sp: EdgeSubproblem, level: int,
                            key: tuple[int, ...]) -> list[int]:
        """Partial net of one edge subproblem, chosen by eps' = need / |P_e|"""
        eps = sp.eps_prime
        assert eps * sp.weighted_size == sp.need, "eps' * |P_e| must equal eps * n"
        if eps > 1:
            self._counters['empty'] += 1
            return []
        if eps == 1:
            self._counters['single'] += 1
            return [sp.members[0].id]
        if self._c1 / sp.need >= 1:
            self._counters['whole'] += 1
            return [p.id for p in sp.members]
        if self.cfg.mode is Mode.HYBRID and len(sp.members) <= self.cfg.hybrid_cap:
            small = None
            try:
                if Fraction(2, 3) < eps < 1 and self.cfg.two_point_plugin:
                    small = two_point_net(sp.members)
                elif Fraction(1, 2) < eps <= Fraction(2, 3):
                    small = ten_point_net(sp.members)
            except NetConstructionError as e:
                self._counters['hybrid_fallbacks'] += 1
                logger.warning("edge %s: %s, recursing instead", sp.key, e)
            if small is not None:
                self._counters['hybrid_nets'] += 1
                return [p.id for p in small]
        return self._net(sp.members, sp.need, level, key)


def _normalize_ids(P: Sequence[Point]) -> list[Point]:
    """
    Check the input and give positional ids when the given ones are
    missing or repeated.

    Raises:
        DegenerateGeometryError: empty input or repeated coordinates
    """
    P = list(P)
    if not P:
        raise DegenerateGeometryError("empty point set")
    if len({(p.x, p.y) for p in P}) != len(P):
        raise DegenerateGeometryError(
            "repeated coordinates; merge them into weights first (see dataio.merge_duplicates)")
    ids = [p.id for p in P]
    if min(ids) < 0 or len(set(ids)) != len(ids):
        P = [replace(p, id=i) for i, p in enumerate(P)]
    return P


def compute_net(P: Sequence[Point], cfg: Config) -> NetResult:
    """
    Epsilon-net of P for closed disks and halfplanes.

    Every closed disk or halfplane holding at least eps * n weighted points
    of P contains a net point. Deterministic for a fixed (P order, cfg).

    Raises:
        SamplingError: restart_cap exceeded
        DegenerateGeometryError: empty P or repeated coordinates
    """
    return NetBuilder(cfg).build(P)


def dispatch_subproblem(sp: EdgeSubproblem, cfg: Config, depth: int = 1) -> list[int]:
    """Partial net for one edge subproblem under cfg"""
    return NetBuilder(cfg).dispatch_subproblem(sp, depth, sp.key)
