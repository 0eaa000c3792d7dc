"""Exception types raised across the package."""


class FTSeriesError(Exception):
    """Base class for all package errors."""


class DomainError(FTSeriesError, ValueError):
    """A basis element was evaluated outside its natural domain."""


class NotRepresentable(FTSeriesError):
    """A spatial term maps a basis element outside the basis family."""


class NotClosed(FTSeriesError):
    """The family is not closed under products of basis elements."""


class QuadratureFailure(FTSeriesError):
    """Adaptive quadrature did not reach its tolerance within budget."""


class ValidationError(FTSeriesError, ValueError):
    """A problem description violates one of its invariants."""


class SolverError(FTSeriesError):
    """Base class for failures while solving mode problems."""


class NonTriangular(SolverError):
    """A mode depends on itself or on a later mode."""


class MissingDependency(SolverError):
    """A convolution needs a mode that has not been solved yet."""


class UnsupportedOrder(SolverError):
    """The closed-form backend cannot handle this mode system."""


class DegenerateMode(SolverError):
    """The leading time-derivative coefficient of a mode vanishes."""


class TermLimitExceeded(SolverError):
    """A closed-form coefficient grew past the term budget."""


class UnknownExample(FTSeriesError, KeyError):
    pass


class UnknownReference(FTSeriesError, KeyError):
    pass


class GridDomainError(FTSeriesError, ValueError):
    """An evaluation grid leaves the declared box or the basis domain."""


class StiffnessWarning(UserWarning):
    """Step-doubling error estimate of the numeric backend is large."""


class ModeFailures(SolverError):
    """One or more modes failed; ``failures`` maps mode index to exception."""

    def __init__(self, failures: dict):
        self.failures = dict(failures)
        lines = [f"mode {k}: {type(e).__name__}: {e}" for k, e in sorted(self.failures.items())]
        super().__init__(f"{len(self.failures)} mode(s) failed\n" + "\n".join(lines))
