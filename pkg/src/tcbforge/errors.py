"""Exception types shared across the package."""


class TcbError(Exception):
    """Base class for all tcbforge errors."""


class GeometryError(TcbError, ValueError):
    """Invalid geometric input (bad polygon, non-positive dimension, ...)."""


class EmptyGridError(GeometryError):
    """The outline is too small to hold a single grid point at the requested
    pitch and margin."""


class LayoutError(TcbError, ValueError):
    """A board-level structural problem that prevents an operation
    (e.g. crossing bend axes passed to the fold preview)."""


class SolidsError(TcbError, ValueError):
    """Solid generation refused: structural or rule errors, or overlapping
    distinct-net conductors."""


class StlError(TcbError, ValueError):
    """STL export refused (non-watertight mesh)."""


class GcodeError(TcbError, ValueError):
    """G-code patching failed (unknown tool, unparseable program)."""


class PlanError(TcbError, ValueError):
    """Process planning refused (rule errors present)."""
