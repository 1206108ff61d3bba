"""Exception hierarchy shared by the analysis modules and the CLI."""


class FermiworkError(Exception):
    """Base class for all package errors."""


class ValidationError(FermiworkError, ValueError):
    """Input violates a structural or physical requirement."""


class AsymmetryError(ValidationError):
    """Covariance matrix is not antisymmetric."""


class UnphysicalError(ValidationError):
    """Covariance matrix has a singular value above one."""

    def __init__(self, message, max_singular_value=None):
        super().__init__(message)
        self.max_singular_value = max_singular_value


class CapacityError(FermiworkError, ValueError):
    """Requested size exceeds what the dense routines support."""


class PatternError(ValidationError):
    """Covariance matrix is not in the entry pattern an operation requires."""


class RepresentationError(FermiworkError):
    """A unitary does not act linearly on the Majorana operators."""


class ConvergenceError(FermiworkError, ArithmeticError):
    """Iterative diagonalization failed to converge."""


class ParseError(FermiworkError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
