"""Exception hierarchy shared by the solvers and the command line."""


class RDFrontsError(Exception):
    """Base class for all package errors."""


class ConfigError(RDFrontsError, ValueError):
    """Invalid parameters or configuration (maps to CLI exit code 2)."""


class SolverError(RDFrontsError, RuntimeError):
    """A numerical procedure failed (maps to CLI exit code 1)."""


class LinearSolveError(SolverError):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class ConvergenceError(SolverError):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class MonotonicityError(SolverError):
    """A monotone scheme produced an ordering violation (discretization fault)."""


class BracketError(SolverError):
    def __init__(self, message, lower=None, upper=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class InstabilityError(SolverError):
    """Time stepping left the invariant region [0, max(1, sup u0)]."""
