"""Exception hierarchy shared by all modules."""


class LpExtError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(LpExtError, ValueError):
    """Invalid domain/submanifold/weight/solver configuration."""


class DegenerateRuleError(LpExtError):
    """Quadrature node set cannot resolve the polynomial space (singular Gram)."""


class NoExtensionError(LpExtError):
    """The data on S admits no extension in the truncated space."""


class ConvergenceError(LpExtError):
    """An iterative solver hit its iteration cap.

    The partial trace is attached as ``trace`` so callers can report it.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])
