class NumericalError(RuntimeError):
    """A computation could not reach its stated accuracy."""


class SolverError(NumericalError):
    """An iterative solver failed to converge."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class TruncationError(ValueError):
    """A truncated mixture misses its distributional invariants."""

    def __init__(self, message: str, achieved_error: float):
        super().__init__(message)
        self.achieved_error = achieved_error
