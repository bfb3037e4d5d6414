"""Exception types raised by the braced-manipulator toolkit."""


class BracedError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(BracedError, ValueError):
    pass


class InvalidRotationError(BracedError, ValueError):
    pass


class InvalidProjectorError(BracedError, ValueError):
    pass


class UnsupportedContactError(BracedError, ValueError):
    pass


class SingularityError(BracedError):
    """Raised when a matrix that must be inverted is (numerically) singular.

    ``rcond`` holds the reciprocal condition number that triggered it.
    """

    def __init__(self, message, rcond=None):
        super().__init__(message)
        self.rcond = rcond


class InfeasibleTwistError(BracedError):
    """The requested twist is outside the range of the task Jacobian.

    The least-squares solution and its residual are attached so callers
    can decide whether to continue.
    """

    def __init__(self, message, solution, residual):
        super().__init__(message)
        self.solution = solution
        self.residual = residual


class RegionBoundaryError(BracedError):
    def __init__(self, message, r=None, r_max=None):
        super().__init__(message)
        self.r = r
        self.r_max = r_max


class StencilFailureError(BracedError):
    pass


class TrackingDivergenceError(BracedError):
    pass


class ConfigError(BracedError, ValueError):
    """Invalid robot or simulation description.

    ``line`` is the 1-based line in the source document when known.
    """

    def __init__(self, message, source=None, line=None):
        self.source = source
        self.line = line
        where = ""
        if source is not None:
            where = f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class SimulationAborted(BracedError):
    """A run stopped early.  ``samples`` holds everything recorded up to the failure."""

    def __init__(self, message, samples, cause=None):
        super().__init__(message)
        self.samples = samples
        self.cause = cause
