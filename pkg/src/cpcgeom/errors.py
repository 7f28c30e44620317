"""Exception hierarchy.

Every error raised on purpose by the toolkit derives from :class:`GeometryError`
so callers (notably the CLI) can map families of failures to exit codes.
"""

from __future__ import annotations


class GeometryError(Exception):
    """Base class for all toolkit errors."""


class UsageError(GeometryError, ValueError):
    """Malformed arguments: wrong dimensions, bad constants, bad parameters."""


class ParameterError(UsageError):
    pass


class DomainError(GeometryError, ValueError):
    """Evaluation requested outside a chart or profile domain."""


class BoundaryError(DomainError):
    """A finite-difference stencil would leave the chart domain."""


class PreconditionError(GeometryError, ValueError):
    pass


class ConstraintError(GeometryError):
    """A point does not lie on the model space Q^n_c x R."""


class RegularityError(GeometryError):
    """Degenerate induced metric or normal."""


class FocalPointError(RegularityError):
    """A parallel displacement hits (or comes too close to) a focal value."""

    def __init__(self, message: str, *, curvature: float | None = None, t: float | None = None):
        super().__init__(message)
        self.curvature = curvature
        self.t = t


class InapplicableError(GeometryError):
    """The check does not apply to this input. Not a failure."""


class ClusteringError(GeometryError):
    """Eigenvalue gaps fall in the ambiguous band (tol, 2 tol]."""


class StratificationError(GeometryError):
    """Eigenvalue multiplicities change across a grid."""


class SeedError(GeometryError):
    """Projector products annihilate a seed vector; pick another seed."""


class DegenerateError(GeometryError, ValueError):
    pass


class UmbilicError(DegenerateError):
    pass
