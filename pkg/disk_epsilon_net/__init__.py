"""
Disk epsilon-nets

A Python package for computing small epsilon-nets of weighted planar point
sets with respect to closed disks (and halfplanes), by sampling, Delaunay
triangulation of the sample and recursion on the points left behind each
edge. Includes an exact brute-force checker and the experiment drivers
behind the command-line tool.

Example usage:
    from disk_epsilon_net import EpsilonNetService

    service = EpsilonNetService()
    data = service.generate('uniform:5000', seed=1)
    result = service.compute(data, '0.05', c1=12, seed=3)
    print(result.size, result.stats['restarts'])

    small = service.generate('uniform:300', seed=2)
    net = service.compute(small, '0.2', seed=3).net
    assert service.verify(small, net, '0.2') is None
"""

__version__ = '0.2.0'

from .dataio import Dataset, generate, load_points, merge_duplicates, write_points
from .delaunay import Triangulation
from .errors import (
    ConfigError,
    DatasetError,
    DegenerateGeometryError,
    EpsilonNetError,
    NetConstructionError,
    OracleLimitError,
    SampleTooSmallError,
    SamplingError,
)
from .geom import Circle, CircleBySupport, Halfplane, Location, Orientation, Point, Side
from .netbuilder import (
    BASE_CASE,
    Config,
    Mode,
    NetBuilder,
    NetResult,
    compute_net,
    ten_point_net,
    two_point_net,
)
from .oracle import Violation, max_uncovered_depth, random_probe, verify_net
from .service import (
    EpsilonNetService,
    check_epsilon_net,
    compute_epsilon_net,
)

__all__ = [
    '__version__',
    'EpsilonNetService',
    'compute_epsilon_net',
    'check_epsilon_net',
    'Point',
    'Orientation',
    'Location',
    'Side',
    'Circle',
    'Halfplane',
    'CircleBySupport',
    'Triangulation',
    'Config',
    'Mode',
    'NetBuilder',
    'NetResult',
    'BASE_CASE',
    'compute_net',
    'two_point_net',
    'ten_point_net',
    'Violation',
    'verify_net',
    'max_uncovered_depth',
    'random_probe',
    'Dataset',
    'generate',
    'load_points',
    'merge_duplicates',
    'write_points',
    'EpsilonNetError',
    'DegenerateGeometryError',
    'SampleTooSmallError',
    'SamplingError',
    'NetConstructionError',
    'ConfigError',
    'DatasetError',
    'OracleLimitError',
]
