"""Exception types shared across the library."""


class NonarchError(Exception):
    """Base class for all library errors."""


class PrecisionExhausted(NonarchError):
    """A result cannot be certified at the available precision.

    Carries ``bound``: the absolute precision exponent up to which the
    offending quantity is known to vanish (|x| <= p^-bound), when that
    information exists.
    """

    def __init__(self, message: str, bound: int | None = None):
        super().__init__(message)
        self.bound = bound


class DivisionByZeroAtPrecision(NonarchError):
    """Inversion of a value that is zero, or indistinguishable from zero."""


class UnboundedTail(NonarchError):
    """A tail rule admits no certified norm bound."""


class UnresolvedAtLevel(NonarchError):
    """A point cannot be placed in a partition at the requested level."""


class NotDisjoint(NonarchError):
    """Two ball families that were required to be disjoint intersect."""


class SeparationTooSmall(NonarchError):
    """No admissible separation radius exists below the certified distance."""


class OutsideCarrier(NonarchError):
    """A point is not covered by the partition at its resolution."""


class ResolutionTooCoarse(NonarchError):
    """The carrier cannot be refined to the scale a construction needs."""


class NoStabilization(NonarchError):
    """An infinite left product did not stabilize within the iteration cap."""


class ContractViolation(NonarchError):
    """A documented precondition or sampled side condition failed."""


class DomainEscape(NonarchError):
    """A perturbed probe point left the certified domain of the map."""
