"""Exception hierarchy shared by all modules.

Every error carries an ``exit_code`` so the command line can map it directly:
2 for precondition/usage problems, 3 for numeric non-convergence, 1 otherwise.
"""

from __future__ import annotations


class FeynInvError(Exception):
    exit_code = 1


class PreconditionError(FeynInvError, ValueError):
    exit_code = 2


class RingMismatchError(PreconditionError):
    def __init__(self, left, right, what: str = "operation"):
        self.left = tuple(left)
        self.right = tuple(right)
        super().__init__(
            f"{what}: ring mismatch between ({', '.join(self.left)}) and ({', '.join(self.right)})"
        )


class UnknownVariableError(PreconditionError):
    pass


class ParseError(PreconditionError):
    def __init__(self, message: str, line: int = 1, col: int = 1):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}")


class GraphError(PreconditionError):
    pass


class BoundExceededError(PreconditionError):
    pass


class NotInSpanError(PreconditionError):
    """Raised when a polynomial is not in the span of the supplied module basis."""


class NonUniqueError(PreconditionError):
    """Raised when the graded linear system has more than one solution."""


class SymmetryError(PreconditionError):
    pass


class SeriesError(PreconditionError):
    pass


class ConvergenceError(FeynInvError):
    exit_code = 3
