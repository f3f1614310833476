"""Exception hierarchy shared across the package."""


class FractubeError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(FractubeError):
    """Degenerate or inconsistent planar geometry."""


class PoleError(FractubeError):
    """Evaluation requested at (or too close to) a pole."""


class TilesetError(FractubeError):
    """The map images overlap or cover the hull; no tiling exists."""


class NotRealizableError(FractubeError):
    """A scaling sequence with no geometric realization was used geometrically."""


class BudgetError(FractubeError):
    """An internal enumeration or search budget was exceeded."""


class ConfigError(FractubeError):
    """Malformed or contradictory run configuration."""
