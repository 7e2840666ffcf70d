#!/usr/bin/env python3
"""
test_acceptance.py - Long-running validity, size and scaling checks

These reproduce the published sizes within bands and run the large
randomized validity suites. They take minutes to hours, so every test is
skipped unless --full is given.

Usage:
    python3 test_acceptance.py --full [--verbose] [--keep-files]
"""

import statistics
import sys
from fractions import Fraction

import numpy as np

from harness import parse_args, random_points, run_suite

from disk_epsilon_net.cli import REFERENCE_SIZES, run_cell
from disk_epsilon_net.csstats import check_claims, subproblem_histogram
from disk_epsilon_net.dataio import generate
from disk_epsilon_net.errors import NetConstructionError
from disk_epsilon_net.geom import Point
from disk_epsilon_net.netbuilder import Config, compute_net, ten_point_net
from disk_epsilon_net.oracle import max_uncovered_depth, random_probe, verify_net

SEEDS = 30
KINDS = ('uniform', 'gauss9', 'collinear', 'duplicates')


def _full_only(env, results, test_name) -> bool:
    if not env.full:
        results.add_skip(test_name, "run with --full")
        return False
    return True


def _mean_size_times_eps(spec: str, eps: str, c1: float, seeds: int = SEEDS) -> float:
    sizes = [run_cell(spec, eps, c1, seed).size_times_eps for seed in range(seeds)]
    return statistics.fmean(sizes)


def test_validity_suite(env, results):
    test_name = "compute_net: 500 seeded runs, zero oracle violations"
    if not _full_only(env, results, test_name):
        return
    rng = np.random.default_rng(2024)
    violations = []
    for trial in range(500):
        kind = KINDS[trial % len(KINDS)]
        n = int(rng.integers(20, 201))
        eps = ('0.1', '0.2', '0.3', '0.5')[int(rng.integers(0, 4))]
        c1 = (7.0, 12.0)[trial % 2]
        P = generate(f"{kind}:{n}", trial).points
        result = compute_net(P, Config(epsilon=eps, c1=c1, seed=trial))
        if verify_net(P, result.net, eps) is not None:
            violations.append((kind, n, eps, c1, trial))
        if env.verbose and trial % 50 == 0:
            print(f"  {trial} runs, {len(violations)} violations")
    results.check(test_name, not violations, f"violations {violations}")

    test_name = "compute_net: hybrid mode over the same mix (100 runs)"
    violations = []
    for trial in range(100):
        kind = KINDS[trial % len(KINDS)]
        n = int(rng.integers(20, 101))
        eps = ('0.1', '0.2', '0.3', '0.5')[trial % 4]
        P = generate(f"{kind}:{n}", 5000 + trial).points
        result = compute_net(P, Config(epsilon=eps, seed=trial, mode='hybrid'))
        if verify_net(P, result.net, eps) is not None:
            violations.append((kind, n, eps, trial))
    results.check(test_name, not violations, f"violations {violations}")


def test_size_law(env, results):
    test_name = "uniform 50k, eps = 0.01, c1 = 12: mean size*eps in [10.5, 13.4]"
    if not _full_only(env, results, test_name):
        return
    mean = _mean_size_times_eps('uniform:50000', '0.01', 12.0)
    results.check(test_name, 10.5 <= mean <= 13.4, f"mean size*eps {mean:.3f}")

    test_name = "uniform 50k, eps = 0.01, c1 = 7: mean size*eps in [7.5, 10.5]"
    mean = _mean_size_times_eps('uniform:50000', '0.01', 7.0)
    results.check(test_name, 7.5 <= mean <= 10.5, f"mean size*eps {mean:.3f}")


def test_reference_sizes(env, results):
    for name, spec in (('uniform', 'uniform:50000'), ('gauss9', 'gauss9:90000')):
        for eps in ('0.2', '0.1', '0.01'):
            reference = REFERENCE_SIZES[name][eps]
            test_name = f"{name} eps = {eps}: mean size within 20% of {reference}"
            if not _full_only(env, results, test_name):
                continue
            mean = _mean_size_times_eps(spec, eps, 12.0) / float(Fraction(eps))
            results.check(test_name, abs(mean - reference) <= 0.2 * reference,
                          f"mean size {mean:.1f}")

    test_name = "uniform eps = 0.2: net size is the top sample plus a few points"
    if not _full_only(env, results, test_name):
        return
    P = generate('uniform:50000', 0).points
    samples, extra = [], []
    for seed in range(SEEDS):
        result = compute_net(P, Config(epsilon='0.2', c1=12, seed=seed))
        samples.append(result.stats['top_sample_size'])
        extra.append(result.size - result.stats['top_sample_size'])
    mean_sample, mean_extra = statistics.fmean(samples), statistics.fmean(extra)
    # c1/eps = 60; the restart threshold of 30 points almost never triggers
    results.check(test_name, abs(mean_sample - 60) <= 6 and 0 <= mean_extra < 8,
                  f"mean top sample {mean_sample:.1f}, mean extra {mean_extra:.1f}")


def test_scaling(env, results):
    test_name = "uniform 1e5..8e5, eps = 0.01: each doubling costs at most 2.6x"
    if not _full_only(env, results, test_name):
        return
    medians = []
    for n in (100_000, 200_000, 400_000, 800_000):
        times = [run_cell(f"uniform:{n}", '0.01', 12.0, seed).wall_ms for seed in range(5)]
        medians.append(statistics.median(times))
    ratios = [b / a for a, b in zip(medians, medians[1:])]
    results.check(test_name, all(r <= 2.6 for r in ratios),
                  f"ratios {[round(r, 3) for r in ratios]}")


def test_counting_claims(env, results):
    test_name = "check_claims: 100 instances, n in [13, 30], k in [13, 20]"
    if not _full_only(env, results, test_name):
        return
    rng = np.random.default_rng(31)
    failed = []
    for trial in range(100):
        P = random_points(int(rng.integers(13, 31)), 3000 + trial)
        failed.extend((trial, row.kind, row.k) for row in check_claims(P, range(13, 21))
                      if not row.ok)
    results.check(test_name, not failed, f"violations {failed}")

    test_name = "subproblem_histogram: uniform 5000, 100 seeds, every band under its ceiling"
    P = generate('uniform:5000', 0).points
    hist = subproblem_histogram(P, '0.01', 12.0, range(100))
    over = [(float(b.k1), float(b.k2), b.mean, b.ceiling) for b in hist.bands if not b.ok]
    results.check(test_name, not over, f"bands over ceiling {over}")


def test_oracle_consistency(env, results):
    test_name = "random_probe never beats verify_net; verdicts match depth (200 instances)"
    if not _full_only(env, results, test_name):
        return
    rng = np.random.default_rng(41)
    bad = []
    for trial in range(200):
        n = int(rng.integers(5, 61))
        P = random_points(n, 4000 + trial, weights=bool(trial % 2))
        S = rng.choice(n, size=int(rng.integers(0, 6)), replace=False).tolist()
        eps = Fraction(int(rng.integers(1, 10)), 10)
        depth, _ = max_uncovered_depth(P, S)
        total = sum(p.weight for p in P)
        verdict = verify_net(P, S, eps)
        if (verdict is None) != (depth < eps * total):
            bad.append((trial, 'verdict'))
        if verdict is None and random_probe(P, S, eps, trials=100_000, seed=trial) is not None:
            bad.append((trial, 'probe'))
    results.check(test_name, not bad, f"failures {bad}")


def test_ten_point_net(env, results):
    test_name = "ten_point_net: 100 random sets, size <= 10, no avoiding disk with half the weight"
    if not _full_only(env, results, test_name):
        return
    rng = np.random.default_rng(51)
    bad, built = [], 0
    for trial in range(100):
        n = int(rng.integers(11, 101))
        Q = random_points(n, 6000 + trial)
        try:
            net = ten_point_net(Q)
        except NetConstructionError:
            continue
        built += 1
        depth, _ = max_uncovered_depth(Q, net)
        if len(net) > 10 or depth >= n // 2 + 1:
            bad.append((trial, n, len(net), depth))
    results.check(test_name, not bad and built > 0, f"{built} built, failures {bad}")

    test_name = "ten_point_net: square corners around a central cluster"
    corners = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    cluster = (np.random.default_rng(52).random((96, 2)) * 0.02 + 0.49).tolist()
    square = [Point(x, y, 1, i) for i, (x, y) in enumerate(corners + cluster)]
    try:
        net = ten_point_net(square)
        hits_cluster = any(p.id >= 4 for p in net)
        depth, _ = max_uncovered_depth(square, net)
        results.check(test_name, hits_cluster and depth < 51 and len(net) <= 10,
                      f"net {[p.id for p in net]}, depth {depth}")
    except NetConstructionError as e:
        results.add_skip(test_name, f"construction fell back: {e}")


def main():
    """Run all tests"""
    args = parse_args('Acceptance-scale tests for disk_epsilon_net', full_flag=True)
    return run_suite("Acceptance Test Suite\nTesting: disk_epsilon_net (long runs)", [
        ("validity tests", [
            test_validity_suite,
            test_oracle_consistency,
            test_ten_point_net,
        ]),
        ("size and runtime tests", [
            test_size_law,
            test_reference_sizes,
            test_scaling,
            test_counting_claims,
        ]),
    ], args)


if __name__ == '__main__':
    sys.exit(main())
