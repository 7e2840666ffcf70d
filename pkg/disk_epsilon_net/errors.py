"""
errors.py - Exception hierarchy for disk-epsilon-net

All library errors derive from EpsilonNetError so callers (and the CLI)
can catch one type. Subclasses also derive from the matching builtin
(ValueError, RuntimeError) where that reads naturally.
"""


class EpsilonNetError(Exception):
    """Base class for all disk-epsilon-net errors"""


class DegenerateGeometryError(EpsilonNetError, ValueError):
    """Collinear support, coincident anchors or an unusable point set"""


class SampleTooSmallError(DegenerateGeometryError):
    """Fewer than three distinct points were handed to the triangulator"""


class SamplingError(EpsilonNetError, RuntimeError):
    """The random sample stayed undersized for restart_cap attempts"""


class NetConstructionError(EpsilonNetError):
    """An optional small-net construction could not produce a verified net"""


class ConfigError(EpsilonNetError, ValueError):
    """Invalid configuration value"""


class DatasetError(EpsilonNetError, ValueError):
    """Malformed or empty point input"""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OracleLimitError(EpsilonNetError):
    """Point set too large for the brute-force oracle"""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(
            f"oracle refuses {size} points (cap is {cap}); "
            f"raise --oracle-cap or DISK_EPSILON_NET_ORACLE_CAP to force it"
        )
