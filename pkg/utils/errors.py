"""Exception hierarchy shared by the reconstruction, benchmark and CLI layers."""


class CDeimError(Exception):
    """Base class for all toolkit errors."""

    category = "internal"
    exit_code = 1


class ValidationError(CDeimError, ValueError):
    """Input violates a documented precondition or type invariant."""

    category = "validation"
    exit_code = 4


class MatrixFormatError(ValidationError):
    """Matrix file has a bad header, a truncated payload or non-finite entries."""

    category = "format"


class InfeasibleError(CDeimError):
    """Penalty parameter grew past its cap before the stopping criterion held."""

    category = "infeasible"
    exit_code = 5

    def __init__(self, message: str, lam: float | None = None, penalty: float | None = None):
        super().__init__(message)
        self.lam = lam
        self.penalty = penalty


class ConvergenceError(CDeimError):
    """Newton iteration cap exceeded; carries the last iterate."""

    category = "convergence"
    exit_code = 6

    def __init__(self, message: str, alpha=None, iterations: int = 0):
        super().__init__(message)
        self.alpha = alpha
        self.iterations = iterations


class NumericalError(CDeimError):
    """Linear algebra failed even after Tikhonov regularization."""

    category = "numerical"
    exit_code = 6


IO_EXIT_CODE = 3
