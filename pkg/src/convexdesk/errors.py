"""Exception hierarchy shared across the toolkit."""


class ConvexDeskError(Exception):
    """Base class for all toolkit errors."""


class CatalogError(ConvexDeskError):
    """Unknown atom tag."""


class ParameterError(ConvexDeskError):
    """Atom or operation parameter outside its admissible range."""


class GridMismatchError(ConvexDeskError):
    """Grids with incompatible dimension or geometry."""


class ImproperFunctionError(ConvexDeskError):
    """Operation requires a proper function (some finite value, no -inf)."""


class EmptyDomainError(ConvexDeskError):
    """All values are infinite; the effective domain is empty."""


class NonconvexError(ConvexDeskError):
    """Operation is only defined for convex inputs."""


class WidenGridError(ConvexDeskError):
    """A solution landed on the grid boundary; enlarge the grid."""


class NormalizationError(ConvexDeskError):
    """Neither order of a norm pair satisfies q0 <= p0 on the grid."""


class IterationDivergedError(ConvexDeskError):
    """Averaging iteration violated its sandwich bound (grid too coarse)."""


class AccuracyError(ConvexDeskError):
    """A quadrature or iteration failed to reach the requested accuracy."""


class TruncationWarning(UserWarning):
    """A transform silently truncated values outside a grid box."""
