"""Exception hierarchy shared by the numerical modules and the CLI."""


class CMSError(Exception):
    """Base class for all errors raised by this package."""


class WeightSpecError(CMSError):
    """A weight specification is malformed or violates an invariant."""

    def __init__(self, message, piece_index=None, witness=None):
        super().__init__(message)
        self.piece_index = piece_index
        self.witness = witness


class DomainError(CMSError, ValueError):
    """An evaluation point lies outside the admissible interval."""


class ConvergenceError(CMSError):
    """Adaptive integration did not reach its tolerance within budget."""

    def __init__(self, message, estimate):
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")
        self.estimate = estimate


class IllConditionedError(CMSError):
    """The recurrence lost positivity or orthogonality at degree k."""

    def __init__(self, message, k):
        super().__init__(f"{message} at k={k}")
        self.k = k


class NumericalError(CMSError):
    """Generic numerical failure: eigen-solve, root bracketing, degeneracy."""


class ClassificationError(NumericalError):
    """Neither (or both) branch of the canonical parameter fits a point."""


class MisuseError(CMSError, ValueError):
    """An API was called outside its contract (e.g. infinite a for P_a)."""


class ConstructionError(NumericalError):
    """An interpolation polynomial failed one of its defining checks."""
