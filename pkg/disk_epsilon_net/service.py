#!/usr/bin/env python3
"""
service.py - Import-friendly facade over the net builder and the oracle

Example usage:
    from disk_epsilon_net import EpsilonNetService

    service = EpsilonNetService()
    data = service.generate('uniform:2000', seed=1)
    result = service.compute(data.points, '0.05', seed=1)
    violation = service.verify(data.points, result.net, '0.05')
"""

import logging
import os
from typing import Iterable, Optional, Sequence

from .dataio import Dataset, generate, load_points
from .errors import OracleLimitError
from .geom import Point
from .netbuilder import Config, NetResult, compute_net
from .oracle import Violation, max_uncovered_depth, verify_net

logger = logging.getLogger(__name__)

ORACLE_CAP_ENV = 'DISK_EPSILON_NET_ORACLE_CAP'
DEFAULT_ORACLE_CAP = 1000


def oracle_cap_from_env() -> int:
    """Oracle size cap from DISK_EPSILON_NET_ORACLE_CAP, default 1000"""
    value = os.environ.get(ORACLE_CAP_ENV)
    if not value:
        return DEFAULT_ORACLE_CAP
    try:
        return int(value)
    except ValueError:
        logger.warning("ignoring %s=%r (not an integer)", ORACLE_CAP_ENV, value)
        return DEFAULT_ORACLE_CAP


class EpsilonNetService:
    """
    Service class for building and checking epsilon-nets.

    Example usage:
        service = EpsilonNetService(verbose=True)
        data = service.load('points.txt')
        result = service.compute(data, 0.1, c1=7)
        if service.verify(data, result.net, 0.1) is None:
            print("OK")
    """

    def __init__(self, verbose: bool = False, oracle_cap: Optional[int] = None):
        """
        Args:
            verbose: Log progress at DEBUG level
            oracle_cap: Largest point set handed to the oracle
                (default: DISK_EPSILON_NET_ORACLE_CAP or 1000)
        """
        self.verbose = verbose
        self.oracle_cap = oracle_cap if oracle_cap is not None else oracle_cap_from_env()
        if verbose:
            logging.getLogger('disk_epsilon_net').setLevel(logging.DEBUG)

    @staticmethod
    def _points(data) -> list[Point]:
        return list(data.points) if isinstance(data, Dataset) else list(data)

    def load(self, path: str, fmt: str = 'auto') -> Dataset:
        return load_points(path, fmt)

    def generate(self, spec: str, seed: int = 0) -> Dataset:
        return generate(spec, seed)

    def compute(self, data, epsilon, **options) -> NetResult:
        """
        Build a net; options are Config fields (c1, seed, mode, ...).

        Returns:
            NetResult with sorted net ids and statistics
        """
        result = compute_net(self._points(data), Config(epsilon=epsilon, **options))
        logger.debug("net of size %d (%d restarts)", result.size, result.stats['restarts'])
        return result

    def verify(self, data, net: Iterable, epsilon) -> Optional[Violation]:
        """
        None if `net` is an epsilon-net of the data, else a violating range.

        Raises:
            OracleLimitError: more points than the oracle cap
        """
        return verify_net(self._points(data), list(net), epsilon, cap=self.oracle_cap)

    def uncovered_depth(self, data, net: Iterable) -> tuple[int, Optional[Violation]]:
        """Heaviest range avoiding `net` (the smallest valid eps is depth / n)"""
        points = self._points(data)
        if len(points) > self.oracle_cap:
            raise OracleLimitError(len(points), self.oracle_cap)
        return max_uncovered_depth(points, list(net))


# Convenience functions for simple use cases

def compute_epsilon_net(points: Sequence[Point], epsilon, **options) -> list[int]:
    """
    Quick net computation.

    Example:
        ids = compute_epsilon_net(points, '0.1', seed=3)
    """
    return compute_net(list(points), Config(epsilon=epsilon, **options)).net


def check_epsilon_net(points: Sequence[Point], net: Iterable, epsilon) -> bool:
    """True if `net` (ids or Points) is an epsilon-net of `points`"""
    return verify_net(list(points), list(net), epsilon) is None
