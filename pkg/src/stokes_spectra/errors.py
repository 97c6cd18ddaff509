"""Exception types shared across the solvers."""


class NonConvergenceError(RuntimeError):
    """An iteration failed to reach its tolerance; carries the last residual."""

    def __init__(self, message, residual=None, iterations=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.trace = trace


class SingularMapError(RuntimeError):
    """The conformal boundary map lost injectivity (zeta' <= 0 encountered)."""


class IllPosedError(RuntimeError):
    """A reduced linear system was rank-deficient beyond the expected kernel."""


class RootNotFoundError(NonConvergenceError):
    """Newton iteration on the characteristic function failed to converge."""
