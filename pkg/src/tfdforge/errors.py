"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument breaks a documented precondition."""


class ResourceLimitError(RuntimeError):
    """The requested problem exceeds the configured qubit/dimension cap."""


class HermiticityError(ArithmeticError):
    """An expectation value carries an imaginary residue above tolerance."""


class ConvergenceError(RuntimeError):
    """An iterative routine stopped without meeting its tolerance."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual
