"""Exception types shared across the toolkit."""


class ParameterError(ValueError):
    """A map, profile, region, or run parameter is outside its documented domain."""


class NumericOverflowError(ArithmeticError):
    """An evaluation left the finite double range.

    The message names the map variant that overflowed and the point where it
    happened, so sweeps can report the offending sample instead of a bare NaN.
    """


class NewtonError(RuntimeError):
    """Base class for periodic-orbit search failures."""


class SingularSystemError(NewtonError):
    """The Newton system matrix D(f^n) - I was numerically singular."""


class ConvergenceError(NewtonError):
    """Newton ran out of steps; carries the last iterate for diagnostics."""

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
