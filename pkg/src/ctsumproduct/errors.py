"""Exception types raised across the package."""


class InferenceError(Exception):
    """Base class for every error raised by ctsumproduct."""


class InvalidGenerator(InferenceError, ValueError):
    pass


class NegativeOffDiagonal(InvalidGenerator):
    pass


class ColumnSumNonzero(InvalidGenerator):
    def __init__(self, column, residual):
        self.column = column
        self.residual = residual
        super().__init__(
            f"column {column} sums to {residual!r}, expected 0")


class EmptyObservableSet(InvalidGenerator):
    pass


class FullObservableSet(InvalidGenerator):
    pass


class NonIrreducible(InvalidGenerator):
    pass


class NonFinite(InferenceError, ValueError):
    pass


class ConvergenceFailure(InferenceError, ArithmeticError):
    pass


class EmptyGrid(InferenceError, ValueError):
    pass


class DegenerateSojourn(InferenceError, ValueError):
    pass


class OutOfRange(InferenceError, ValueError):
    pass


class ZeroLikelihood(InferenceError, ArithmeticError):
    """The observations are impossible under the model."""

    def __init__(self, time, message=None):
        self.time = time
        super().__init__(message or f"zero likelihood at t={time!r}")


class ZeroBoundaryFlux(InferenceError, ArithmeticError):
    """No rate connects the active sets on either side of a transition."""

    def __init__(self, time, message=None):
        self.time = time
        super().__init__(
            message or f"no probability flux across the transition at t={time!r}")


class NotTwoEigenvalues(InferenceError, ValueError):
    pass


class NotDiagonalizable(InferenceError, ValueError):
    pass


class InsufficientGrid(InferenceError, ValueError):
    pass


class ModelFileError(InferenceError, ValueError):
    pass


class AbsorbingStateWarning(RuntimeWarning):
    """Simulation reached a state with no outgoing rate before the horizon."""
