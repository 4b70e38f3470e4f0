"""Exception hierarchy shared by the solver, simulator and CLI."""


class LbtError(Exception):
    """Base class for every error raised by lbtstop."""


class ConfigError(LbtError, ValueError):
    """Raised for malformed or invalid configuration input."""


class DegenerateInputError(LbtError, ValueError):
    """A quantity is undefined for the supplied parameters (e.g. tau = 1)."""


class QuadratureError(LbtError, ArithmeticError):
    """Adaptive integration did not reach the requested tolerance."""


class SolverError(LbtError, ArithmeticError):
    """Base class for throughput solver failures."""


class MaxIterExceeded(SolverError):
    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)


class BracketFailure(SolverError):
    pass


class ZeroOverheadError(SolverError):
    """zeta = 0: the optimal throughput is the essential supremum of W*R."""


class PhaseCapExceeded(LbtError, RuntimeError):
    """A simulated period exceeded the ECCA phase cap."""

    def __init__(self, message, phases=None):
        super().__init__(message)
        self.phases = phases
