#!/usr/bin/env python3
"""
test_netbuilder.py - Tests for the sample-and-refine net construction

Nets are checked with the exhaustive oracle, so the point sets stay small
here; tests/test_acceptance.py --full runs the large validity suite.

Usage:
    python3 test_netbuilder.py [--verbose] [--keep-files]
"""

import sys
import time
from fractions import Fraction

import numpy as np

from harness import parse_args, random_points, run_suite

from disk_epsilon_net.dataio import generate
from disk_epsilon_net.delaunay import Face, FaceKind
from disk_epsilon_net.depth import EdgeSubproblem
from disk_epsilon_net.errors import (
    ConfigError,
    DegenerateGeometryError,
    NetConstructionError,
    SamplingError,
)
from disk_epsilon_net.geom import Point
from disk_epsilon_net.netbuilder import (
    RESTART_RULE,
    Config,
    Mode,
    NetBuilder,
    compute_net,
    dispatch_subproblem,
    draw_sample,
    interval_net,
    parse_epsilon,
    ten_point_net,
    thin_net,
    two_point_net,
)
from disk_epsilon_net.oracle import max_uncovered_depth, verify_net


def make_subproblem(members, need) -> EdgeSubproblem:
    face = Face(0, FaceKind.TRIANGLE, (0, 1, 2))
    weight = sum(p.weight for p in members)
    return EdgeSubproblem(
        edge=(0, 1),
        endpoints=(members[0], members[1]),
        faces=(face, face),
        members=sorted(members, key=lambda p: p.id),
        weighted_size=weight,
        eps_prime=Fraction(need) / weight,
        need=Fraction(need),
    )


def test_base_case(env, results):
    test_name = "compute_net: eps*n < 13 returns every point"
    P = random_points(10, 71)
    result = compute_net(P, Config(epsilon='0.5'))
    ok = result.net == list(range(10)) and result.stats['base_case'] == 1
    results.check(test_name, ok, f"net {result.net}")


def test_determinism(env, results):
    test_name = "compute_net: identical input and config give identical results"
    P = generate('uniform:3000', 1).points
    cfg = Config(epsilon='0.05', seed=9)
    first, second = compute_net(P, cfg), compute_net(P, cfg)
    strip = lambda s: {k: v for k, v in s.items() if k != 'wall_ms'}
    ok = first.net == second.net and strip(first.stats) == strip(second.stats)
    results.check(test_name, ok, f"sizes {first.size} vs {second.size}")

    test_name = "compute_net: a different seed gives a different net"
    third = compute_net(P, Config(epsilon='0.05', seed=10))
    results.check(test_name, third.net != first.net, "seed had no effect")


def test_validity_small(env, results):
    test_name = "compute_net: oracle finds no violation (16 seeded runs, n <= 60)"
    rng = np.random.default_rng(72)
    kinds = ['uniform', 'gauss9', 'collinear', 'duplicates']
    failures = []
    for trial in range(16):
        kind = kinds[trial % 4]
        n = int(rng.integers(20, 61))
        eps = ['0.1', '0.2', '0.3', '0.5'][trial // 4]
        c1 = (7.0, 12.0)[trial % 2]
        data = generate(f"{kind}:{n}", seed=trial)
        modes = (Mode.RECURSIVE, Mode.HYBRID) if trial % 4 == 0 else (Mode.RECURSIVE,)
        for mode in modes:
            cfg = Config(epsilon=eps, c1=c1, seed=trial, mode=mode)
            result = compute_net(data.points, cfg)
            if verify_net(data.points, result.net, eps) is not None:
                failures.append((kind, n, eps, c1, mode.value))
    results.check(test_name, not failures, f"violations in {failures}")


def test_validity_recursive_levels(env, results):
    test_name = "compute_net: nets needing recursion pass the oracle (n = 100)"
    failures = []
    for seed in range(3):
        P = random_points(100, 900 + seed)
        result = compute_net(P, Config(epsilon='0.15', c1=4, seed=seed))
        if verify_net(P, result.net, '0.15') is not None:
            failures.append(seed)
    results.check(test_name, not failures, f"violations for seeds {failures}")


def test_restart_threshold(env, results):
    test_name = "draw_sample: |R| = c1/(2 eps) restarts, one more point is accepted"
    threshold = Fraction(12) / (2 * Fraction(1, 10))  # 60
    at = draw_sample(random_points(60, 1), 1.0, 0, threshold)
    above = draw_sample(random_points(61, 1), 1.0, 0, threshold)
    results.check(test_name, at is None and above is not None and len(above) == 61,
                  f"got {at is None}, {None if above is None else len(above)}")


def test_sample_mean(env, results):
    test_name = "draw_sample: mean |R| over 100 seeds is c1/eps within 5%"
    P = generate('uniform:50000', 3).points
    sizes = [len(draw_sample(P, 12 / 500, seed)) for seed in range(100)]
    mean = float(np.mean(sizes))
    results.check(test_name, 1140 <= mean <= 1260, f"mean {mean:.1f}")

    test_name = "draw_sample: weight w is kept with probability 1-(1-p)^w"
    heavy = [Point(float(i), 0.0, 5, i) for i in range(20000)]
    kept = len(draw_sample(heavy, 0.1, 4))
    expected = 20000 * (1 - 0.9 ** 5)
    results.check(test_name, abs(kept - expected) < 0.05 * expected,
                  f"kept {kept}, expected {expected:.0f}")


def test_restart_cap(env, results):
    test_name = "compute_net: tiny c1 exhausts restart_cap"
    P = random_points(300, 73)
    try:
        compute_net(P, Config(epsilon='0.1', c1=1e-6, restart_cap=3))
        results.add_fail(test_name, "no error raised")
    except SamplingError as e:
        results.check(test_name, "sampling persistently undersized" in str(e), str(e))


def test_restart_stats(env, results):
    test_name = "compute_net: stats report restarts per level and the restart rule"
    P = random_points(400, 74)
    result = compute_net(P, Config(epsilon='0.1', c1=2, seed=5))
    stats = result.stats
    per_level = sum(level['restarts'] for level in stats['levels'].values())
    ok = (stats['restart_rule'] == RESTART_RULE and stats['restarts'] == per_level
          and stats['net_size'] == result.size and stats['n'] == 400)
    results.check(test_name, ok, f"stats {stats}")


def test_collinear_input(env, results):
    test_name = "compute_net: collinear input uses the interval net and is valid"
    P = [Point(0.5 * t, 0.25 * t + 1.0, 1, t) for t in range(100)]
    result = compute_net(P, Config(epsilon='0.2'))
    ok = (result.stats['collinear_subproblems'] >= 1
          and verify_net(P, result.net, '0.2') is None)
    results.check(test_name, ok, f"net {result.net}")

    test_name = "interval_net: every run of eps*n consecutive points holds a pick"
    line = [Point(float(t), 0.0, 1, t) for t in range(23)]
    picked = {p.id for p in interval_net(line, Fraction(5))}
    gaps = [t for t in range(19) if not picked & set(range(t, t + 5))]
    results.check(test_name, not gaps and len(picked) == 4, f"picked {sorted(picked)}")


def test_degenerate_inputs(env, results):
    cases = [('collinear:100', '0.2'), ('collinear:100', '0.5'), ('collinear:44', '0.3'),
             ('duplicates:150', '0.1')]
    for spec, eps in cases:
        data = generate(spec, seed=10)
        for c1 in (7.0, 12.0):
            test_name = f"compute_net: {spec} at eps {eps}, c1 {c1:g} finishes within 30s"
            started = time.perf_counter()
            result = compute_net(data.points, Config(epsilon=eps, c1=c1, seed=10))
            elapsed = time.perf_counter() - started
            stats = result.stats
            ok = (elapsed < 30.0 and stats['stalled'] == 0
                  and stats['calls'] <= stats['call_budget'] + stats['budget_fallbacks']
                  and verify_net(data.points, result.net, eps) is None)
            results.check(test_name, ok, f"{elapsed:.1f}s, {stats['calls']} calls")


def test_call_budget(env, results):
    test_name = "compute_net: a spent call budget keeps whole subproblems and stays valid"
    P = random_points(100, 900)
    result = compute_net(P, Config(epsilon='0.15', c1=4, seed=0, max_calls=1))
    stats = result.stats
    nested = sum(level['calls'] for lvl, level in stats['levels'].items() if lvl > 0)
    ok = (stats['call_budget'] == 1 and stats['budget_fallbacks'] == nested
          and verify_net(P, result.net, '0.15') is None)
    results.check(test_name, ok, f"{nested} nested calls, stats {stats}")

    test_name = "compute_net: the default call budget grows with 1/eps"
    small = compute_net(random_points(200, 5), Config(epsilon='0.5', seed=3))
    large = compute_net(generate('uniform:4000', 1).points, Config(epsilon='0.002', seed=3))
    results.check(test_name, small.stats['call_budget'] == 256
                  and large.stats['call_budget'] == 64 * 500,
                  f"budgets {small.stats['call_budget']}, {large.stats['call_budget']}")


def test_thin_net(env, results):
    test_name = "thin_net: a few central points leave no heavy disk uncovered"
    P = random_points(120, 81)
    S = thin_net(P, Fraction(100), 5)
    ok = S is not None and 3 <= len(S) <= 6 and max_uncovered_depth(P, S)[0] < 100
    results.check(test_name, ok, f"got {S}")

    test_name = "thin_net: not tried when need is at most half the weight"
    results.check(test_name, thin_net(P, Fraction(60), 5) is None)

    test_name = "dispatch_subproblem: eps' = 3/4 is answered by a thin net"
    members = random_points(80, 82)
    sp = make_subproblem(members, 60)
    builder = NetBuilder(Config(epsilon='0.5', c1=7, seed=2))
    got = builder.dispatch_subproblem(sp, 1, sp.key)
    ok = (builder._counters['thin_nets'] == 1 and len(got) <= 6
          and verify_net(members, got, Fraction(3, 4)) is None)
    results.check(test_name, ok, f"{len(got)} points")


def test_memo(env, results):
    test_name = "NetBuilder: a repeated subproblem is solved once"
    members = random_points(40, 75)
    sp = make_subproblem(members, 20)
    builder = NetBuilder(Config(epsilon='0.5', seed=2))
    first = builder.dispatch_subproblem(sp, 1, sp.key)
    calls, hits = builder._calls, builder._counters['memo_hits']
    second = builder.dispatch_subproblem(sp, 1, (9, 9))
    ok = (first == second and builder._calls == calls
          and builder._counters['memo_hits'] == hits + 1)
    results.check(test_name, ok, f"{builder._calls - calls} extra calls")


def test_thin_nets_in_recursion(env, results):
    test_name = "compute_net: c1 = 7 recursion uses thin nets on light subproblems"
    P = generate('uniform:5000', 2).points
    thin = 0
    for seed in range(3):
        result = compute_net(P, Config(epsilon='0.05', c1=7, seed=seed))
        thin += result.stats['thin_nets']
    results.check(test_name, thin >= 1, f"{thin} thin nets")


def test_dispatch(env, results):
    members = random_points(40, 75)
    cfg = Config(epsilon='0.5', seed=2)

    test_name = "dispatch_subproblem: eps' > 1 gives nothing"
    sp = make_subproblem(members, 41)
    results.check(test_name, dispatch_subproblem(sp, cfg) == [])

    test_name = "dispatch_subproblem: eps' = 1 gives one member"
    sp = make_subproblem(members, 40)
    got = dispatch_subproblem(sp, cfg)
    results.check(test_name, len(got) == 1 and got[0] in {p.id for p in members}, f"got {got}")

    test_name = "dispatch_subproblem: c1/need >= 1 keeps every member"
    sp = make_subproblem(members, 10)
    got = dispatch_subproblem(sp, cfg)
    results.check(test_name, sorted(got) == sorted(p.id for p in members), f"got {got}")

    test_name = "dispatch_subproblem: eps' = 1/2 recurses and returns a 1/2-net"
    sp = make_subproblem(members, 20)
    builder = NetBuilder(cfg)
    got = builder.dispatch_subproblem(sp, 1, sp.key)
    ok = verify_net(members, got, Fraction(1, 2)) is None and builder._levels[1].calls == 1
    results.check(test_name, ok, f"{len(got)} points")


def test_two_point_net(env, results):
    test_name = "two_point_net: two points are returned unchanged"
    Q = random_points(2, 76)
    results.check(test_name, two_point_net(Q) == Q)

    test_name = "two_point_net: three collinear points"
    Q = [Point(0.0, 0.0, 1, 0), Point(1.0, 1.0, 1, 1), Point(2.0, 2.0, 1, 2)]
    pair = two_point_net(Q)
    depth, _ = max_uncovered_depth(Q, pair)
    results.check(test_name, len(pair) <= 2 and depth < 3, f"pair {pair}, depth {depth}")

    test_name = "two_point_net: 30 random points, no avoiding disk with 21 points"
    Q = random_points(30, 77)
    pair = two_point_net(Q)
    depth, _ = max_uncovered_depth(Q, pair)
    results.check(test_name, len(pair) == 2 and depth < 21, f"depth {depth}")


def test_ten_point_net(env, results):
    test_name = "ten_point_net: ten points or fewer come back unchanged"
    Q = random_points(10, 78)
    results.check(test_name, ten_point_net(Q) == Q)

    test_name = "ten_point_net: returned nets have <= 10 points and pass the oracle"
    bad, built = [], 0
    for seed in range(6):
        Q = random_points(48, 80 + seed)
        try:
            net = ten_point_net(Q)
        except NetConstructionError:
            continue
        built += 1
        depth, _ = max_uncovered_depth(Q, net)
        if len(net) > 10 or depth >= 25:
            bad.append((seed, len(net), depth))
    results.check(test_name, not bad and built > 0, f"built {built} of 6, bad nets {bad}")


def test_hybrid_mode(env, results):
    test_name = "compute_net: hybrid mode is valid and counts its small nets"
    P = random_points(80, 79)
    result = compute_net(P, Config(epsilon='0.25', c1=6, seed=1, mode='hybrid'))
    stats = result.stats
    ok = verify_net(P, result.net, '0.25') is None
    results.check(test_name, ok and 'hybrid_nets' in stats and 'hybrid_fallbacks' in stats,
                  f"stats {stats}")

    test_name = "compute_net: hybrid mode without the two-point search is valid"
    result = compute_net(P, Config(epsilon='0.25', c1=6, seed=1, mode='hybrid',
                                   two_point_plugin=False))
    results.check(test_name, verify_net(P, result.net, '0.25') is None, f"net {result.net}")


def test_config_validation(env, results):
    test_name = "Config: rejects bad epsilon, c1, mode, seed and caps"
    bad = [
        {'epsilon': '1.5'}, {'epsilon': 0}, {'epsilon': 'abc'},
        {'epsilon': '0.1', 'c1': -1}, {'epsilon': '0.1', 'mode': 'greedy'},
        {'epsilon': '0.1', 'seed': -1}, {'epsilon': '0.1', 'max_depth': 0},
        {'epsilon': '0.1', 'restart_cap': 0}, {'epsilon': '0.1', 'max_calls': 0},
    ]
    accepted = []
    for kwargs in bad:
        try:
            Config(**kwargs)
            accepted.append(kwargs)
        except ConfigError:
            pass
    results.check(test_name, not accepted, f"accepted {accepted}")

    test_name = "parse_epsilon: floats are read as decimals"
    results.check(test_name, parse_epsilon(0.1) == Fraction(1, 10)
                  and Config(epsilon=0.1).epsilon == Fraction(1, 10))


def test_input_checks(env, results):
    test_name = "compute_net: empty input raises"
    try:
        compute_net([], Config(epsilon='0.1'))
        results.add_fail(test_name, "no error raised")
    except DegenerateGeometryError:
        results.add_pass(test_name)

    test_name = "compute_net: repeated coordinates raise"
    try:
        compute_net([Point(0, 0), Point(0, 0)], Config(epsilon='0.1'))
        results.add_fail(test_name, "no error raised")
    except DegenerateGeometryError:
        results.add_pass(test_name)

    test_name = "compute_net: points without ids get positional ids"
    P = [Point(float(i), float(i * i % 7)) for i in range(12)]
    result = compute_net(P, Config(epsilon='0.5'))
    results.check(test_name, result.net == list(range(12)), f"net {result.net}")

    test_name = "NetResult.points: maps ids back to points"
    P = random_points(200, 5)
    result = compute_net(P, Config(epsilon='0.2', seed=3))
    chosen = result.points(P)
    results.check(test_name, [p.id for p in chosen] == result.net, "ids differ")


def main():
    """Run all tests"""
    args = parse_args('Tests for disk_epsilon_net.netbuilder')
    return run_suite("Net Builder Test Suite\nTesting: disk_epsilon_net.netbuilder", [
        ("construction tests", [
            test_base_case,
            test_determinism,
            test_validity_small,
            test_validity_recursive_levels,
            test_collinear_input,
            test_degenerate_inputs,
            test_call_budget,
            test_thin_nets_in_recursion,
        ]),
        ("sampling tests", [
            test_restart_threshold,
            test_sample_mean,
            test_restart_cap,
            test_restart_stats,
        ]),
        ("subproblem tests", [
            test_dispatch,
            test_two_point_net,
            test_ten_point_net,
            test_thin_net,
            test_memo,
            test_hybrid_mode,
        ]),
        ("configuration tests", [
            test_config_validation,
            test_input_checks,
        ]),
    ], args)


if __name__ == '__main__':
    sys.exit(main())
