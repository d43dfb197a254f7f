"""Exception hierarchy shared across the package.

Two broad classes matter to callers (and to the CLI exit codes):
``ValidationError`` for bad operands, malformed files and violated
preconditions, and ``NumericalError`` for computations that cannot be
completed reliably even though the inputs were well formed.
"""


class ZenoError(Exception):
    """Base class for all errors raised by zenosim."""


class ValidationError(ZenoError):
    """Invalid operands, malformed input files, or violated preconditions."""


class NumericalError(ZenoError):
    """A numerically well-posed answer could not be produced."""


class AmbiguousSpectrumError(NumericalError):
    """Eigenvalue gaps straddle the clustering tolerance.

    Carries the offending gap data so the caller can pick a better
    tolerance: ``gaps`` is the sorted array of pairwise eigenvalue
    distances, ``histogram`` a ``(counts, bin_edges)`` pair over them.
    """

    def __init__(self, message, gaps, histogram):
        super().__init__(message)
        self.gaps = gaps
        self.histogram = histogram


class SectorTrackingError(NumericalError):
    """Sector identification was lost along a time-dependent path
    (eigenvalue crossing, or projector overlap below the 0.5 floor)."""


class StepResolutionError(ValidationError):
    """The requested step size does not resolve a dynamical timescale.

    ``timescale`` names the binding constraint, either ``"system"`` or
    ``"measurement"``.
    """

    def __init__(self, message, timescale):
        super().__init__(message)
        self.timescale = timescale
