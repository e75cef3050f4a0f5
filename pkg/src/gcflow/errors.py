"""Exception types shared across the library."""


class GCFlowError(Exception):
    """Base class for all library errors."""


class FrameError(GCFlowError):
    """A frame is not orthonormal, bases mismatch, or a point misses a plane."""


class DomainError(GCFlowError):
    """A point lies outside the domain of a graph map."""


class BoundaryError(DomainError):
    """A point is too close to the domain boundary for finite differencing."""


class CoverageError(GCFlowError):
    """A base point is not covered by the fibration (iteration left the domain)."""


class ConvergenceError(GCFlowError):
    """Fixed-point iteration failed to reach the requested residual."""


class DegenerateVariationError(GCFlowError):
    """A first-order variation vanished where a direction was required."""


class SpecFormatError(GCFlowError):
    """A fibration spec file or dict is malformed."""
