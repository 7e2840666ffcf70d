#!/usr/bin/env python3
"""
test_dataio.py - Tests for point file parsing and the synthetic generators

Usage:
    python3 test_dataio.py [--verbose] [--keep-files]
"""

import io
import sys

import numpy as np

from harness import parse_args, run_suite

from disk_epsilon_net.dataio import (
    gen_gauss9,
    generate,
    load_points,
    merge_duplicates,
    read_points,
    write_points,
)
from disk_epsilon_net.errors import DatasetError
from disk_epsilon_net.geom import Point, orient_sign


def test_parse_and_merge(env, results):
    test_name = "load_points: duplicate rows merge into a weighted point"
    path = env.write_file('dup.txt', "0 0\n1 0\n0 0\n")
    data = load_points(path)
    got = [(p.xy, p.weight, p.id) for p in data.points]
    ok = got == [((0.0, 0.0), 2, 0), ((1.0, 0.0), 1, 1)] and data.n == 3 and len(data) == 2
    results.check(test_name, ok, f"got {got}")

    test_name = "read_points: comments and blank lines are skipped"
    coords = read_points(io.StringIO("# header\n\n1 2\n  # indented comment\n3\t4\n"))
    results.check(test_name, coords == [(1.0, 2.0), (3.0, 4.0)], f"got {coords}")

    test_name = "read_points: comma separated rows"
    coords = read_points(io.StringIO("1.5,2.5\n-3, 4e-1\n"), 'csv')
    auto = read_points(io.StringIO("1.5,2.5\n-3, 4e-1\n"))
    results.check(test_name, coords == auto == [(1.5, 2.5), (-3.0, 0.4)], f"got {coords}")

    test_name = "load_points: dataset name comes from the file name"
    results.check(test_name, data.name == 'dup' and data.source == path, repr(data))


def test_parse_errors(env, results):
    cases = [
        ("one coordinate", "1 2\n3\n", 2),
        ("three coordinates", "1 2 3\n", 1),
        ("not a number", "# c\n1 2\nx 4\n", 3),
        ("non-finite", "1 nan\n", 1),
    ]
    for label, text, line in cases:
        test_name = f"read_points: {label} reports line {line}"
        try:
            read_points(io.StringIO(text))
            results.add_fail(test_name, "no error raised")
        except DatasetError as e:
            results.check(test_name, e.line == line and f"line {line}" in str(e), str(e))

    test_name = "load_points: a file with only comments is an error"
    path = env.write_file('empty.txt', "# nothing here\n\n")
    try:
        load_points(path)
        results.add_fail(test_name, "no error raised")
    except DatasetError as e:
        results.check(test_name, "no points" in str(e), str(e))

    test_name = "load_points: missing file raises OSError"
    try:
        load_points(env.path('missing.txt'))
        results.add_fail(test_name, "no error raised")
    except OSError:
        results.add_pass(test_name)

    test_name = "read_points: unknown format is rejected"
    try:
        read_points(io.StringIO("1 2\n"), 'tsv')
        results.add_fail(test_name, "no error raised")
    except DatasetError:
        results.add_pass(test_name)


def test_write_round_trip(env, results):
    test_name = "write_points/load_points: weighted points survive a round trip"
    points = [Point(0.1, 0.2, 3, 0), Point(-1.25, 1e-7, 1, 1), Point(2.0, 2.0, 2, 2)]
    path = env.path('round.txt')
    write_points(points, path)
    back = load_points(path).points
    got = [(p.xy, p.weight) for p in back]
    results.check(test_name, got == [(p.xy, p.weight) for p in points], f"got {got}")

    test_name = "merge_duplicates: first-seen order and positional ids"
    merged = merge_duplicates([(1.0, 1.0), (0.0, 0.0), (1.0, 1.0)])
    got = [(p.xy, p.weight, p.id) for p in merged]
    results.check(test_name, got == [((1.0, 1.0), 2, 0), ((0.0, 0.0), 1, 1)], f"got {got}")


def test_generators(env, results):
    test_name = "generate: same spec and seed give identical points"
    a = generate('gauss9:500', 4).points
    b = generate('gauss9:500', 4).points
    c = generate('gauss9:500', 5).points
    results.check(test_name, a == b and a != c, "seeded output differs")

    test_name = "generate: uniform:1 gives one point"
    data = generate('uniform:1', 0)
    results.check(test_name, len(data) == 1 and data.n == 1, repr(data))

    test_name = "gen_gauss9: n = 9 puts one point in each component"
    data = gen_gauss9(9, 3)
    results.check(test_name, data.n == 9 and len(data) == 9, repr(data))

    test_name = "gen_uniform: 10^4 points split evenly over the four quadrants"
    data = generate('uniform:10000', 11)
    xs = np.array([p.x for p in data.points])
    ys = np.array([p.y for p in data.points])
    counts = [int(np.count_nonzero(((xs < 0.5) == lx) & ((ys < 0.5) == ly)))
              for lx in (True, False) for ly in (True, False)]
    in_square = bool(np.all((xs >= 0) & (xs < 1) & (ys >= 0) & (ys < 1)))
    results.check(test_name, in_square and all(2300 <= c <= 2700 for c in counts),
                  f"quadrant counts {counts}")

    test_name = "generate: duplicates kind merges grid cells"
    data = generate('duplicates:500', 2)
    results.check(test_name, data.n == 500 and len(data) <= 100, repr(data))

    test_name = "generate: collinear kind puts 70% of the rows on one line"
    data = generate('collinear:100', 6)
    a, b = data.points[0], data.points[1]
    on_line = sum(p.weight for p in data.points
                  if orient_sign(a.x, a.y, b.x, b.y, p.x, p.y) == 0)
    results.check(test_name, data.n == 100 and on_line >= 70, f"{on_line} rows on the line")


def test_generator_errors(env, results):
    for spec in ('circle:10', 'uniform', 'uniform:ten', 'uniform:0', 'gauss9:8'):
        test_name = f"generate: {spec!r} is rejected"
        try:
            generate(spec)
            results.add_fail(test_name, "no error raised")
        except DatasetError:
            results.add_pass(test_name)


def main():
    """Run all tests"""
    args = parse_args('Tests for disk_epsilon_net.dataio')
    return run_suite("Point Data Test Suite\nTesting: disk_epsilon_net.dataio", [
        ("file tests", [
            test_parse_and_merge,
            test_parse_errors,
            test_write_round_trip,
        ]),
        ("generator tests", [
            test_generators,
            test_generator_errors,
        ]),
    ], args)


if __name__ == '__main__':
    sys.exit(main())
