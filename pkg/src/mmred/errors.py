"""Exception types raised across the toolkit."""


class MomentMatchingError(Exception):
    """Base class for all toolkit errors."""


class SpectraOverlap(MomentMatchingError):
    """Two spectra that must be disjoint share (numerically) an eigenvalue."""


class Singular(MomentMatchingError):
    """A linear system is numerically singular."""


class PoleHit(MomentMatchingError):
    """A transfer function was evaluated at (or too close to) a pole."""


class IllPosed(MomentMatchingError):
    """Feedback interconnection with 1 + D_P D_K = 0."""


class NotObservable(MomentMatchingError):
    pass


class Unstable(MomentMatchingError):
    """A matrix that must be Hurwitz is not."""


class UnstableSystem(Unstable):
    pass


class PlacementFailed(MomentMatchingError):
    pass


class BudgetExhausted(MomentMatchingError):
    """Stabilizing search ran out of evaluations.

    Carries the best parameter vector found, its spectral abscissa and the
    trace of best-so-far abscissae.
    """

    def __init__(self, message, best=None, abscissa=float("inf"), trace=()):
        super().__init__(message)
        self.best = best
        self.abscissa = abscissa
        self.trace = list(trace)


class Improper(MomentMatchingError):
    def __init__(self, message, fraction=None):
        super().__init__(message)
        self.fraction = fraction


class CancellationUnsafe(MomentMatchingError):
    pass


class FileFormatError(MomentMatchingError):
    pass
