"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid parameters, domains, or meshes.  Maps to CLI exit code 2."""


class SolverError(RuntimeError):
    """Numerical failure in a solver or optimizer.  Maps to CLI exit code 3."""


class ConvergenceError(SolverError):
    """Iterative solve did not reach the requested tolerance.

    Carries the iteration count and the last relative residual so callers
    can distinguish slow convergence from indefiniteness.
    """

    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class LineSearchError(SolverError):
    """Backtracking line search exhausted its halving budget."""
