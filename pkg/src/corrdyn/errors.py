"""Exception types shared across the library."""


class CorrdynError(Exception):
    """Base class for all corrdyn errors."""


class NonConvergence(CorrdynError):
    """Root iteration did not converge within the iteration budget."""


class DegreeTooHigh(CorrdynError):
    """Polynomial total degree exceeds the requested basis degree."""


class DegenerateLine(CorrdynError):
    """The curve vanishes identically on a whole vertical or horizontal line."""


class NoEscape(CorrdynError):
    """No escape radius found; the perturbation weights are too large."""


class SimpleZeroViolation(CorrdynError):
    """A polynomial that must have simple zeros has a root cluster."""


class CriticalFiber(CorrdynError):
    """The w-partial vanishes at the requested point (branch point)."""


class BranchCollision(CorrdynError):
    """Two fiber roots collide along a continuation path."""


class OrderTooLarge(CorrdynError):
    """Requested degree n is below the operator order k."""


class HypothesisViolation(CorrdynError):
    """An operator violates a hypothesis required by the requested search."""


class HypothesisUnmet(CorrdynError):
    """The curve lacks the structure needed to seed iteration at infinity."""


class InfiniteAtom(CorrdynError):
    """An atom at infinity appeared where only finite atoms are allowed."""


class BudgetExceeded(CorrdynError):
    """Atom budget exhausted; carries the deepest completed level."""

    def __init__(self, msg, completed_level=None, measure=None):
        super().__init__(msg)
        self.completed_level = completed_level
        self.measure = measure


class NotCertified(CorrdynError):
    """Contraction certificate failed; carries the failing certificate."""

    def __init__(self, msg, certificate=None):
        super().__init__(msg)
        self.certificate = certificate
