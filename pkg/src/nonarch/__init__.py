"""Exact computation in non-Archimedean Banach and product spaces.

The library provides certified finite-precision arithmetic in Q_p and
F_p((t)), sequence vectors with decidable tail rules, clopen ball geometry
with separation functions, a staged locally constant extension of bounded
continuous maps, evaluatable isotopies with inverse evaluators, and the
explicit sequence-space transforms between partial-sum sets and products of
punctured balls.
"""

from .errors import (
    ContractViolation,
    DivisionByZeroAtPrecision,
    DomainEscape,
    NoStabilization,
    NonarchError,
    NotDisjoint,
    OutsideCarrier,
    PrecisionExhausted,
    ResolutionTooCoarse,
    SeparationTooSmall,
    UnboundedTail,
    UnresolvedAtLevel,
)
from .field import (
    DEFAULT_PRECISION,
    FieldBackend,
    NormExp,
    PadicNumber,
    add,
    agrees,
    arith,
    div,
    from_digits,
    from_integer,
    invert,
    mul,
    neg,
    norm_exp,
    one,
    sub,
    uniformizer,
    zero,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
