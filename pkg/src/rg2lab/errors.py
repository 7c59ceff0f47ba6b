"""Exception types shared across the package."""


class RG2Error(Exception):
    """Base class for all rg2lab errors."""


class SingularMetricError(RG2Error):
    """Metric is not invertible (or numerically degenerate) at a point."""


class DegeneratePlaneError(RG2Error):
    """Two vectors fail to span a 2-plane (Gram determinant <= tolerance)."""


class ZeroVectorError(RG2Error):
    """A direction vector is (numerically) zero."""


class ValenceError(RG2Error):
    """Tensor rank does not match what the operation supports."""


class ConsistencyError(RG2Error):
    """Two independent code paths for the same quantity disagree."""


class PositivityLossError(RG2Error):
    """A flowed metric stopped being positive definite."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ParabolicityError(RG2Error):
    """Initial data fails the parabolicity hypothesis and no override was given."""
