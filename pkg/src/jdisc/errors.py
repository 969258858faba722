"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """A precondition on an operation argument was violated."""


class InvalidStructureError(ValueError):
    """A matrix field violates the norm bound, support, or consistency checks."""


class InconsistentStructureError(InvalidStructureError):
    """A real J field failed the anti-linearity extraction check."""


class ResourceLimitError(RuntimeError):
    """A dense operator matrix would exceed the configured memory budget."""


class NumericError(RuntimeError):
    """An iterative numeric procedure failed to reach its target accuracy."""


class ContractionFailureError(NumericError):
    """The inner Picard iteration stopped contracting.

    Usually means a*s >= 1 for the chosen exponent; retry with smaller p
    or a structure of smaller norm.
    """


class NonConvergenceError(NumericError):
    """The outer fixed-point loop hit its iteration cap.

    Carries the best iterate so the caller can still inspect diagnostics.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
