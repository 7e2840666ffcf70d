#!/usr/bin/env python3
"""
Command-line interface for disk-epsilon-net.

Exit codes: 0 success, 1 verification failure (or a failed check),
2 usage or configuration error, 3 input/output or dataset error.
"""

import argparse
import csv
import json
import logging
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache

from . import __version__
from .csstats import check_claims, expected_size_bound, subproblem_histogram
from .dataio import Dataset, generate, load_points
from .delaunay import write_off
from .errors import (
    ConfigError,
    DatasetError,
    EpsilonNetError,
    OracleLimitError,
)
from .netbuilder import Config, Mode, NetBuilder, parse_epsilon
from .oracle import random_probe, verify_net
from .service import oracle_cap_from_env

logger = logging.getLogger('disk_epsilon_net')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

# Published net sizes at c1 = 12 for eps = 0.2, 0.1, 0.01, 0.001
REFERENCE_SIZES = {
    'mopsi': {'0.2': 83, '0.1': 128, '0.01': 1226, '0.001': 12011},
    'kddcup04bio': {'0.2': 55, '0.1': 118, '0.01': 1176, '0.001': 11902},
    'europe': {'0.2': 69, '0.1': 119, '0.01': 1205, '0.001': 12043},
    'birch3': {'0.2': 58, '0.1': 125, '0.01': 1198, '0.001': 11878},
    'uniform': {'0.2': 70, '0.1': 109, '0.01': 1245, '0.001': 12034},
    'gauss9': {'0.2': 58, '0.1': 120, '0.01': 1275, '0.001': 12011},
}

# Published size * eps at eps = 0.01 for c1 = 2..16
REFERENCE_SIZE_TIMES_EPS = {
    'mopsi': [82.6, 24.04, 11.58, 10.31, 8.2, 8.7, 8.56, 9.41, 10.16, 11.12,
              12.26, 13, 14.11, 15.67, 16.28],
    'kddcup04bio': [181.19, 24.04, 13.19, 12.82, 10.58, 8.36, 8.44, 9.01, 9.97,
                    10.95, 11.76, 12.93, 14.2, 15.2, 15.75],
    'europe': [3918, 32.76, 17.41, 9.35, 10.04, 8.21, 8.77, 9.27, 9.6, 10.71,
               12.11, 12.84, 13.56, 14.39, 16],
    'uniform': [209, 29.87, 13.31, 10.23, 11.3, 8.28, 8.35, 9.38, 9.5, 10.49,
                12.45, 12.46, 13.89, 14.83, 15.29],
    'gauss9': [4072, 27.64, 16.48, 13.61, 11.16, 8.56, 8.66, 9.46, 9.65, 11.36,
               12.75, 13.01, 13.91, 14.85, 16.63],
    'birch3': [7939, 34.22, 17.97, 12.04, 7.58, 8.23, 8.43, 9.61, 10.74, 11.15,
               11.98, 12.84, 13.87, 15.58, 16.27],
}


def reference_size(dataset: str, epsilon: Fraction):
    return REFERENCE_SIZES.get(dataset.lower(), {}).get(_eps_text(epsilon), '')


def reference_size_times_eps(dataset: str, c1: float):
    series = REFERENCE_SIZE_TIMES_EPS.get(dataset.lower())
    if series is None or c1 != int(c1) or not 2 <= c1 <= 16:
        return ''
    return series[int(c1) - 2]


def _eps_text(epsilon: Fraction) -> str:
    return format(float(epsilon), 'g')


@dataclass(frozen=True)
class ExperimentRow:
    """One (dataset, epsilon, c1, seed) run"""

    dataset: str
    n: int
    epsilon: str
    c1: float
    seed: int
    net_size: int
    size_times_eps: float
    restarts: int
    depth: int
    wall_ms: float

    def sort_key(self):
        return (self.dataset, Fraction(self.epsilon), self.c1, self.seed)


# ============================================================================
# Datasets and runs
# ============================================================================

def _source_kind(source: str) -> bool:
    kind = source.partition(':')[0]
    return ':' in source and not os.path.exists(source) and kind.isidentifier()


@lru_cache(maxsize=8)
def resolve_dataset(source: str, data_seed: int = 0, fmt: str = 'auto') -> Dataset:
    """A generator spec such as 'uniform:1000', or a point file path"""
    if _source_kind(source):
        return generate(source, data_seed)
    return load_points(source, fmt)


def run_cell(source: str, epsilon: str, c1: float, seed: int,
             data_seed: int = 0, mode: str = 'recursive') -> ExperimentRow:
    dataset = resolve_dataset(source, data_seed)
    cfg = Config(epsilon=epsilon, c1=c1, seed=seed, mode=mode)
    started = time.perf_counter()
    result = NetBuilder(cfg).build(dataset.points)
    wall_ms = (time.perf_counter() - started) * 1000.0
    row = ExperimentRow(
        dataset=dataset.name,
        n=dataset.rows,
        epsilon=str(cfg.epsilon),
        c1=cfg.c1,
        seed=seed,
        net_size=result.size,
        size_times_eps=float(result.size * cfg.epsilon),
        restarts=result.stats['restarts'],
        depth=result.stats['max_level'],
        wall_ms=round(wall_ms, 3),
    )
    logger.info("%s eps=%s c1=%g seed=%d: size %d", row.dataset, row.epsilon,
                row.c1, seed, row.net_size)
    return row


def run_cells(cells: list[tuple], jobs: int) -> list[ExperimentRow]:
    """Run independent cells, optionally in a process pool; rows come back sorted"""
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, *zip(*cells)))
    else:
        rows = [run_cell(*cell) for cell in cells]
    return sorted(rows, key=ExperimentRow.sort_key)


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def _write_runs(out: str, rows: list[ExperimentRow]) -> str:
    stem = os.path.splitext(out)[0]
    path = f"{stem}_runs.csv"
    header = list(ExperimentRow.__dataclass_fields__)
    _write_csv(path, header, ([getattr(r, h) for h in header] for r in rows))
    return path


def _mean_std(values: list[float]) -> tuple[float, float]:
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def _parse_range(text: str) -> list[float]:
    """'a:b' or 'a:b:step' (inclusive), or a comma list"""
    try:
        if ':' in text:
            parts = [float(v) for v in text.split(':')]
            if len(parts) not in (2, 3):
                raise ValueError(text)
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1.0
            if step <= 0:
                raise ValueError(text)
            values, v = [], lo
            while v <= hi + 1e-9:
                values.append(round(v, 9))
                v += step
            return values
        return [float(v) for v in text.split(',') if v]
    except ValueError:
        raise ConfigError(f"bad range {text!r}; use a:b, a:b:step or a comma list") from None


def _ints(values: list[float]) -> list[int]:
    return [int(v) for v in values]


# ============================================================================
# Commands
# ============================================================================

def cmd_net(args) -> int:
    dataset = resolve_dataset(args.input or args.gen, args.data_seed, args.format)
    cfg = Config(epsilon=parse_epsilon(args.epsilon), c1=args.c1, seed=args.seed,
                 mode=args.mode, max_depth=args.max_depth, restart_cap=args.restart_cap,
                 two_point_plugin=not args.no_two_point, hybrid_cap=args.hybrid_cap,
                 max_calls=args.max_calls)
    builder = NetBuilder(cfg)
    result = builder.build(dataset.points)
    net = result.points(dataset.points)

    lines = ["# id x y weight"] + [f"{p.id} {p.x!r} {p.y!r} {p.weight}" for p in net]
    to_stdout = not args.out or args.out == '-'
    if to_stdout:
        print('\n'.join(lines))
    else:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write('\n'.join(lines) + '\n')

    if args.dump_off:
        if builder.top_triangulation is None:
            logger.warning("no triangulation was built (eps * n below the base case)")
        else:
            write_off(builder.top_triangulation, args.dump_off)

    report = {'dataset': dataset.source, 'rows': dataset.rows, **result.to_dict()}
    report.pop('net')
    # stdout carries the net rows when no --out file is given
    print(json.dumps(report, indent=2, default=str), file=sys.stderr if to_stdout else sys.stdout)
    return EXIT_OK


def _read_net_ids(path: str) -> list[int]:
    """Point ids from the first column of a net file ('-' reads stdin)"""
    if path == '-':
        return _parse_net_ids(sys.stdin)
    with open(path, 'r', encoding='utf-8') as f:
        return _parse_net_ids(f)


def _parse_net_ids(stream) -> list[int]:
    ids = []
    for lineno, line in enumerate(stream, start=1):
        text = line.strip()
        if not text or text.startswith('#'):
            continue
        try:
            ids.append(int(text.split()[0]))
        except ValueError:
            raise DatasetError(f"expected a point id, got {text!r}", line=lineno) from None
    return ids


def cmd_verify(args) -> int:
    if args.net == '-' and args.input == '-':
        raise ConfigError("--input and --net cannot both read stdin")
    dataset = resolve_dataset(args.input or args.gen, args.data_seed, args.format)
    epsilon = parse_epsilon(args.epsilon)
    net = _read_net_ids(args.net)
    unknown = sorted(set(net) - {p.id for p in dataset.points})
    if unknown:
        shown = ', '.join(map(str, unknown[:5])) + (' ...' if len(unknown) > 5 else '')
        raise DatasetError(f"net names {len(unknown)} id(s) not in the point set: {shown}")
    cap = args.oracle_cap if args.oracle_cap is not None else oracle_cap_from_env()
    violation = verify_net(dataset.points, net, epsilon, cap=cap)
    if violation is None and args.probe:
        violation = random_probe(dataset.points, net, epsilon, trials=args.probe, seed=args.seed)
    if violation is None:
        print("OK")
        return EXIT_OK
    print("VIOLATION")
    print(json.dumps(violation.describe(), indent=2))
    return EXIT_FAILED


def cmd_sweep_c1(args) -> int:
    epsilon = str(parse_epsilon(args.epsilon))
    c1_values = _parse_range(args.c1_range)
    cells = [(source, epsilon, c1, args.seed + t, args.data_seed)
             for source in args.datasets
             for c1 in c1_values
             for t in range(args.trials)]
    rows = run_cells(cells, args.jobs)

    summary = []
    groups: dict[tuple, list[ExperimentRow]] = {}
    for r in rows:
        groups.setdefault((r.dataset, r.c1), []).append(r)
    for (name, c1), group in groups.items():
        mean, std = _mean_std([r.size_times_eps for r in group])
        summary.append([name, c1, len(group), round(mean, 4), round(std, 4),
                        reference_size_times_eps(name, c1)])
    _write_csv(args.out, ['dataset', 'c1', 'trials', 'mean_size_times_eps',
                          'stddev_size_times_eps', 'reference'], summary)
    runs = _write_runs(args.out, rows)

    dat = os.path.splitext(args.out)[0] + '.dat'
    with open(dat, 'w', encoding='utf-8') as f:
        current = None
        for name, c1, _, mean, std, _ in summary:
            if name != current:
                f.write(("\n\n" if current is not None else "") + f"# {name}\n# c1 mean std\n")
                current = name
            f.write(f"{c1:g} {mean} {std}\n")
    print(f"Wrote {args.out}, {runs} and {dat}")
    return EXIT_OK


def cmd_table1(args) -> int:
    epsilons = [str(parse_epsilon(e)) for e in args.epsilons.split(',') if e]
    cells = [(source, eps, args.c1, args.seed + t, args.data_seed)
             for source in args.datasets
             for eps in epsilons
             for t in range(args.trials)]
    rows = run_cells(cells, args.jobs)

    summary = []
    groups: dict[tuple, list[ExperimentRow]] = {}
    for r in rows:
        groups.setdefault((r.dataset, r.n, r.epsilon), []).append(r)
    for (name, n, eps), group in groups.items():
        mean, std = _mean_std([float(r.net_size) for r in group])
        summary.append([name, n, _eps_text(Fraction(eps)), len(group), round(mean, 2),
                        round(std, 2), round(mean * float(Fraction(eps)), 4),
                        reference_size(name, Fraction(eps))])
    _write_csv(args.out, ['dataset', 'n', 'epsilon', 'trials', 'mean_size', 'stddev_size',
                          'mean_size_times_eps', 'reference'], summary)
    runs = _write_runs(args.out, rows)

    dat = os.path.splitext(args.out)[0] + '.dat'
    with open(dat, 'w', encoding='utf-8') as f:
        current = None
        for name, _, eps, _, mean, std, _, _ in summary:
            if name != current:
                f.write(("\n\n" if current is not None else "") + f"# {name}\n# eps mean std\n")
                current = name
            f.write(f"{eps} {mean} {std}\n")
    print(f"Wrote {args.out}, {runs} and {dat}")
    return EXIT_OK


def cmd_stats(args) -> int:
    dataset = resolve_dataset(args.input or args.gen, args.data_seed, args.format)
    if args.histogram:
        hist = subproblem_histogram(dataset.points, parse_epsilon(args.epsilon), args.c1,
                                    range(args.seed, args.seed + args.seeds))
        rows = [[float(b.k1), float(b.k2), round(b.mean, 4),
                 '' if b.ceiling is None else f"{b.ceiling:.6g}", b.ok] for b in hist.bands]
        _write_csv(args.out, ['k1', 'k2', 'mean_edges', 'ceiling', 'ok'], rows)
        ok = all(b.ok for b in hist.bands)
        print(f"Wrote {args.out}: {len(rows)} bands, mean edges "
              f"{statistics.fmean(hist.edge_counts):.1f}, expected size bound "
              f"{expected_size_bound(args.c1):.4f}/eps")
    else:
        ks = _ints(_parse_range(args.k_range))
        checks = check_claims(dataset.points, ks, jitter=not args.no_jitter, seed=args.seed)
        rows = [[c.kind, c.n, c.k, c.count, f"{c.bound:.6g}", f"{c.exact_bound:.6g}", c.ok]
                for c in checks]
        _write_csv(args.out, ['kind', 'n', 'k', 'count', 'bound', 'exact_bound', 'ok'], rows)
        ok = all(c.ok for c in checks)
        print(f"Wrote {args.out}: {len(rows)} rows, all ok: {ok}")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_bench(args) -> int:
    sizes = _ints(_parse_range(args.sizes))
    epsilon = str(parse_epsilon(args.epsilon))
    raw, summary = [], []
    previous = None
    for n in sizes:
        times = []
        for run in range(args.runs):
            row = run_cell(f"uniform:{n}", epsilon, args.c1, args.seed + run, args.data_seed)
            raw.append(row)
            times.append(row.wall_ms)
        median = statistics.median(times)
        ratio = round(median / previous, 3) if previous else ''
        summary.append([n, args.runs, round(median, 3), ratio])
        previous = median
        print(f"n={n}: median {median:.1f} ms" + (f" (x{ratio})" if ratio else ''))
    _write_csv(args.out, ['n', 'runs', 'median_ms', 'ratio'], summary)
    _write_runs(args.out, raw)
    return EXIT_OK


# ============================================================================
# Entry point
# ============================================================================

def _add_source(p, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument('--input', help='Point file (whitespace or comma separated)')
    src.add_argument('--gen', help='Generator spec, e.g. uniform:1000, gauss9:9000')
    p.add_argument('--format', choices=['auto', 'whitespace', 'csv'], default='auto',
                   help='Input file format (default: auto)')
    p.add_argument('--data-seed', type=int, default=0,
                   help='Seed for generated datasets (default: 0)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Compute and verify epsilon-nets for disks in the plane',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        prog='disk-epsilon-net',
        epilog="""
Examples:
  # Net for 1000 uniform points
  disk-epsilon-net net --gen uniform:1000 --epsilon 0.1 --seed 1 --out net.txt

  # Check it with the brute-force oracle
  disk-epsilon-net verify --gen uniform:1000 --net net.txt --epsilon 0.1

  # Net size against c1
  disk-epsilon-net sweep-c1 --datasets uniform:50000 --c1-range 2:16 --out sweep.csv

  # Sizes for several eps
  disk-epsilon-net table1 --datasets uniform:50000 gauss9:90000 --out table.csv
"""
    )
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='Enable verbose output')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('net', help='Compute an epsilon-net')
    _add_source(p)
    p.add_argument('--epsilon', required=True, help='Epsilon in (0, 1], e.g. 0.01')
    p.add_argument('--c1', type=float, default=12.0, help='Sampling constant (default: 12)')
    p.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    p.add_argument('--mode', choices=[m.value for m in Mode], default='recursive')
    p.add_argument('--max-depth', type=int, default=64)
    p.add_argument('--restart-cap', type=int, default=1000)
    p.add_argument('--max-calls', type=int, default=None,
                   help='Recursive call budget (default: scaled to 1/eps)')
    p.add_argument('--hybrid-cap', type=int, default=64,
                   help='Largest subproblem given to the small-net constructions')
    p.add_argument('--no-two-point', action='store_true',
                   help='Recurse instead of searching two-point nets in hybrid mode')
    p.add_argument('--out', help='Net output file (default: stdout, with the stats JSON on stderr)')
    p.add_argument('--dump-off', metavar='PATH',
                   help='Write the top-level triangulation as OFF')
    p.set_defaults(func=cmd_net)

    p = sub.add_parser('verify', help='Check a net with the brute-force oracle')
    _add_source(p)
    p.add_argument('--net', required=True, help="Net file (first column: point id), '-' for stdin")
    p.add_argument('--epsilon', required=True)
    p.add_argument('--oracle-cap', type=int, default=None,
                   help='Largest point set to verify (default: $DISK_EPSILON_NET_ORACLE_CAP or 1000)')
    p.add_argument('--probe', type=int, default=0, metavar='TRIALS',
                   help='Also run random disk probes')
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser('sweep-c1', help='Mean size * eps over a range of c1')
    p.add_argument('--datasets', nargs='+', required=True,
                   help='Generator specs or point files')
    p.add_argument('--epsilon', default='0.01')
    p.add_argument('--c1-range', default='2:16')
    p.add_argument('--trials', type=int, default=10)
    p.add_argument('--seed', type=int, default=0, help='First seed')
    p.add_argument('--data-seed', type=int, default=0)
    p.add_argument('--jobs', type=int, default=1)
    p.add_argument('--out', required=True, help='Summary CSV')
    p.set_defaults(func=cmd_sweep_c1)

    p = sub.add_parser('table1', help='Mean net sizes per dataset and eps')
    p.add_argument('--datasets', nargs='+', required=True)
    p.add_argument('--epsilons', default='0.2,0.1,0.01,0.001')
    p.add_argument('--c1', type=float, default=12.0)
    p.add_argument('--trials', type=int, default=10)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--data-seed', type=int, default=0)
    p.add_argument('--jobs', type=int, default=1)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser('stats', help='Quadruple/triple counts or edge size histogram')
    _add_source(p)
    p.add_argument('--k-range', default='13:20')
    p.add_argument('--no-jitter', action='store_true',
                   help='Fail on cocircular points instead of perturbing them')
    p.add_argument('--histogram', action='store_true',
                   help='Edge size histogram instead of tuple counts')
    p.add_argument('--epsilon', default='0.01')
    p.add_argument('--c1', type=float, default=12.0)
    p.add_argument('--seeds', type=int, default=10)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser('bench', help='Wall time over doubling uniform sizes')
    p.add_argument('--sizes', default='100000,200000,400000,800000')
    p.add_argument('--epsilon', default='0.01')
    p.add_argument('--c1', type=float, default=12.0)
    p.add_argument('--runs', type=int, default=5)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--data-seed', type=int, default=0)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    """Command-line interface for disk-epsilon-net"""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")

    try:
        return args.func(args)
    except (ConfigError, OracleLimitError) as e:
        code, error = EXIT_USAGE, e
    except (DatasetError, OSError) as e:
        code, error = EXIT_IO, e
    except EpsilonNetError as e:
        code, error = EXIT_FAILED, e
    print(f"ERROR: {error}", file=sys.stderr)
    if args.verbose:
        import traceback
        traceback.print_exception(error)
    return code


if __name__ == '__main__':
    sys.exit(main())
