"""
dataio.py - Point files and seeded synthetic datasets

Input is UTF-8 text with one point per line, two decimal coordinates
separated by whitespace or a comma. Lines starting with '#' and blank
lines are ignored. Rows with equal coordinates are merged into one point
whose weight counts the rows, keeping first-seen order; ids are assigned
in that order.

Generators use numpy's PCG64 through default_rng(seed), so a (spec, seed)
pair always yields the same dataset.
"""

from __future__ import annotations

import logging
import math
import os
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import DatasetError
from .geom import Point

logger = logging.getLogger(__name__)

FORMATS = ('auto', 'whitespace', 'csv')

GAUSS9_COMPONENTS = 9
GAUSS9_SIGMA = 0.05
GAUSS9_DELTA = 1e-4


@dataclass
class Dataset:
    """
    Named weighted point set.

    source is the file path, or 'kind:N@seed' for generated data. rows is
    the number of input rows, i.e. the total weight.
    """

    name: str
    points: list[Point]
    source: str
    rows: int

    @property
    def n(self) -> int:
        return self.rows

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"Dataset(name={self.name!r}, points={len(self.points)}, rows={self.rows})"


def merge_duplicates(coords: Iterable[tuple[float, float]]) -> list[Point]:
    """Weighted points from raw coordinates, first-seen order, ids 0.."""
    weights: dict[tuple[float, float], int] = {}
    for xy in coords:
        weights[xy] = weights.get(xy, 0) + 1
    return [Point(x, y, w, i) for i, ((x, y), w) in enumerate(weights.items())]


def _split(line: str, fmt: str) -> list[str]:
    if fmt == 'csv':
        return [f.strip() for f in line.split(',')]
    if fmt == 'whitespace':
        return line.split()
    return [f for f in re.split(r'[,\s]+', line.strip()) if f]


def read_points(stream: TextIO, fmt: str = 'auto') -> list[tuple[float, float]]:
    """
    Raw coordinates of every data row.

    Raises:
        DatasetError: malformed row (with its line number)
    """
    if fmt not in FORMATS:
        raise DatasetError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    coords = []
    for lineno, line in enumerate(stream, start=1):
        text = line.strip()
        if not text or text.startswith('#'):
            continue
        fields = _split(text, fmt)
        if len(fields) != 2:
            raise DatasetError(f"expected 2 coordinates, found {len(fields)}", line=lineno)
        try:
            x, y = float(fields[0]), float(fields[1])
        except ValueError:
            raise DatasetError(f"not a number in {text!r}", line=lineno) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DatasetError(f"non-finite coordinate in {text!r}", line=lineno)
        coords.append((x, y))
    return coords


def load_points(path: str, fmt: str = 'auto') -> Dataset:
    """
    Load a point file.

    Raises:
        DatasetError: malformed rows or no points
        OSError: the file cannot be read
    """
    with open(path, 'r', encoding='utf-8') as f:
        coords = read_points(f, fmt)
    if not coords:
        raise DatasetError(f"no points in {path}")
    points = merge_duplicates(coords)
    name = os.path.splitext(os.path.basename(path))[0]
    logger.info("loaded %s: %d rows, %d distinct points", path, len(coords), len(points))
    return Dataset(name, points, path, len(coords))


def write_points(points: Sequence[Point], path_or_stream: str | TextIO,
                 fmt: str = 'whitespace') -> None:
    """
    Write points in the input format, one row per unit of weight, so that
    loading the file gives back the same weighted points.
    """
    sep = ',' if fmt == 'csv' else ' '
    lines = []
    for p in points:
        lines.extend([f"{p.x!r}{sep}{p.y!r}"] * p.weight)
    text = '\n'.join(lines) + ('\n' if lines else '')
    if isinstance(path_or_stream, str):
        with open(path_or_stream, 'w', encoding='utf-8') as f:
            f.write(text)
    else:
        path_or_stream.write(text)


def _dataset(name: str, coords: np.ndarray, source: str) -> Dataset:
    points = merge_duplicates((float(x), float(y)) for x, y in coords.tolist())
    return Dataset(name, points, source, len(coords))


def gen_uniform(n: int, seed: int = 0) -> Dataset:
    """n points uniform in the unit square"""
    if n < 1:
        raise DatasetError("uniform needs n >= 1")
    rng = np.random.default_rng(seed)
    return _dataset('uniform', rng.random((n, 2)), f"uniform:{n}@{seed}")


def gen_gauss9(n: int, seed: int = 0, sigma: float = GAUSS9_SIGMA,
               delta: float = GAUSS9_DELTA) -> Dataset:
    """
    n points from nine Gaussians: means uniform in the unit square,
    covariance A A^T + delta I with A uniform in [-sigma, sigma]^(2x2).
    Components get n // 9 points each, the first n % 9 one more.
    """
    if n < GAUSS9_COMPONENTS:
        raise DatasetError(f"gauss9 needs n >= {GAUSS9_COMPONENTS}")
    rng = np.random.default_rng(seed)
    base, extra = divmod(n, GAUSS9_COMPONENTS)
    chunks = []
    for k in range(GAUSS9_COMPONENTS):
        size = base + (1 if k < extra else 0)
        mean = rng.random(2)
        A = rng.uniform(-sigma, sigma, (2, 2))
        L = np.linalg.cholesky(A @ A.T + delta * np.eye(2))
        chunks.append(mean + rng.standard_normal((size, 2)) @ L.T)
    return _dataset('gauss9', np.vstack(chunks), f"gauss9:{n}@{seed}")


def gen_collinear_heavy(n: int, seed: int = 0) -> Dataset:
    """70% of the points on one random line through the unit square, the rest uniform"""
    if n < 1:
        raise DatasetError("collinear needs n >= 1")
    rng = np.random.default_rng(seed)
    on_line = (7 * n) // 10
    # dyadic anchor, direction and parameters keep the line points exactly collinear
    a = np.round(rng.random(2) * 1024) / 1024
    d = np.round((rng.random(2) - a) * 1024) / 1024
    if not d.any():
        d = np.array([1.0, 0.0])
    t = rng.integers(0, 1 << 20, on_line) / float(1 << 20)
    line = a + t[:, None] * d
    rest = rng.random((n - on_line, 2))
    return _dataset('collinear', np.vstack([line, rest]), f"collinear:{n}@{seed}")


def gen_duplicate_heavy(n: int, seed: int = 0) -> Dataset:
    """Uniform points snapped to a 10x10 grid, so coordinates repeat"""
    if n < 1:
        raise DatasetError("duplicates needs n >= 1")
    rng = np.random.default_rng(seed)
    grid = np.floor(rng.random((n, 2)) * 10) / 10
    return _dataset('duplicates', grid, f"duplicates:{n}@{seed}")


GENERATORS = {
    'uniform': gen_uniform,
    'gauss9': gen_gauss9,
    'collinear': gen_collinear_heavy,
    'duplicates': gen_duplicate_heavy,
}


def generate(spec: str, seed: int = 0) -> Dataset:
    """
    Dataset from a 'kind:N' spec, e.g. 'uniform:1000' or 'gauss9:90000'.

    Raises:
        DatasetError: unknown kind or bad N
    """
    kind, sep, count = spec.partition(':')
    if kind not in GENERATORS:
        raise DatasetError(f"unknown generator {kind!r}; expected one of {', '.join(GENERATORS)}")
    if not sep:
        raise DatasetError(f"missing size in {spec!r}; use {kind}:N")
    try:
        n = int(count)
    except ValueError:
        raise DatasetError(f"bad size {count!r} in {spec!r}") from None
    dataset = GENERATORS[kind](n, seed)
    logger.info("generated %s: %d rows, %d distinct points",
                dataset.source, dataset.rows, len(dataset.points))
    return dataset
