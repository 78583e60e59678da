"""Explicit homeomorphism segments between sequence-space subsets.

The two directions of the stick-breaking style transform:

  to_fractions    x -> y with y_1 = x_1 and
                  y_(m+1) = x_(m+1) / (1 - x_1 - ... - x_m),
                  carrying the monotone partial-sum set onto the proper
                  fraction sequences;

  from_fractions  y -> x with x_(m+1) = y_(m+1) * (1-y_m)...(1-y_1),
                  the exact inverse (products only, no division).

Either way the running remainder obeys the exact identity
(1-y_m)...(1-y_1) = 1 - x_1 - ... - x_m at every index.

The partial-sum homeomorphism between the never-hits-1 set and the
limit-one sequences with nonzero entries rides on partial_sums /
differences, with the extra conditions certified on the image.

A continuity probe perturbs certified inputs at prescribed sup-norm levels
and reports the observed output deviation exponents exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from .errors import ContractViolation, DomainEscape, PrecisionExhausted
from .field import (
    NormExp,
    PadicNumber,
    add,
    agrees,
    div,
    invert,
    mul,
    one,
    pow_int,
    sub,
    zero,
)
from .sequences import (
    MembershipVerdict,
    SeqVector,
    TailRule,
    differences,
    membership,
    partial_sums,
    sup_norm,
    vec_add,
    vec_sub,
)

DEFAULT_DEPTH = 12


def _require(verdict: MembershipVerdict, what: str):
    if not verdict.yes:
        raise ContractViolation(f"{what}: {verdict.reason}")


def _precision_budget(x: SeqVector, depth: int):
    """Fail fast when the remainder valuations will exhaust the precision.

    Dividing by the remainder 1 - x_1 - ... - x_m costs its valuation in
    relative precision; the total demand through ``depth`` is the deepest
    remainder valuation, known in advance from the coordinates and the tail.
    """
    be = x.backend
    unit = one(be)
    acc = zero(be)
    worst = 0
    budget = None
    for m in range(1, depth):
        xm = x.coordinate(m)
        if not xm.zero:
            budget = min(budget, xm.precision) if budget else xm.precision
        acc = add(acc, xm)
        rem = sub(unit, acc)
        if rem.zero:
            raise PrecisionExhausted(
                f"remainder at {m} has no certified digit", bound=rem.zero_bound
            )
        worst = max(worst, rem.valuation)
    if budget is not None and worst >= budget:
        raise PrecisionExhausted(
            f"depth {depth} demands {worst + 1} certified digits, inputs carry {budget}"
        )


def to_fractions(x: SeqVector, depth: int = DEFAULT_DEPTH) -> SeqVector:
    """Remainder-ratio transform of a monotone partial-sum vector.

    The input must certify membership in the monotone infinite-support set;
    the image certifies membership in the proper fraction sequences, with
    the remainder-product identity holding exactly at every index.
    """
    from .sequences import _as_affine

    depth = max(depth, x.prefix_len)
    _require(membership(x, "mono_to_one_inf", depth), "to_fractions domain")
    _precision_budget(x, depth)
    be = x.backend
    unit = one(be)
    ys = []
    rem = unit
    for m in range(1, depth + 1):
        xm = x.coordinate(m)
        ys.append(div(xm, rem) if m > 1 else xm)
        rem = sub(rem, xm)
    # the certified tail: once the remainder telescopes as E*ratio^m, every
    # later fraction is the constant 1 - ratio
    base, coeff, ratio = _as_affine(x.tail, be)
    if ratio is None or not base.zero or coeff.zero:
        raise ContractViolation("to_fractions needs a vanishing geometric tail")
    e_coeff = div(mul(coeff, ratio), sub(one(be, max(1, coeff.precision)), ratio))
    closure = sub(rem, mul(e_coeff, pow_int(ratio, depth)))
    if not closure.zero:
        raise ContractViolation("tail does not telescope against the explicit prefix")
    tail = TailRule.constant(sub(one(be, max(1, ratio.precision)), ratio))
    y = SeqVector(be, tuple(ys), tail, "s")
    _require(membership(y, "fractions_proper", depth), "to_fractions image")
    return y


def from_fractions(y: SeqVector, depth: int = DEFAULT_DEPTH) -> SeqVector:
    """Inverse transform: rebuild increments from fraction sequences.

    Products only, so no precision demand beyond the inputs'.  The image
    certifies membership in the monotone infinite-support set.
    """
    depth = max(depth, y.prefix_len)
    _require(membership(y, "fractions_proper", depth), "from_fractions domain")
    be = y.backend
    unit = one(be)
    xs = []
    prod = unit  # (1 - y_m) ... (1 - y_1)
    for m in range(1, depth + 1):
        ym = y.coordinate(m)
        xs.append(mul(ym, prod) if m > 1 else ym)
        prod = mul(prod, sub(unit, ym))
    t = y.tail
    if t.kind != "const":
        raise ContractViolation("from_fractions needs a constant tail")
    ratio = sub(one(be, max(1, t.value.precision)), t.value)
    scale = mul(prod, pow_int(invert(ratio), depth))
    x = SeqVector(be, tuple(xs), TailRule.geometric_diff(scale, ratio), "c0")
    _require(membership(x, "mono_to_one_inf", depth), "from_fractions image")
    return x


def remainder_identity_holds(x: SeqVector, y: SeqVector, depth: int) -> bool:
    """Exact check of (1-y_m)...(1-y_1) = 1 - x_1 - ... - x_m for m <= depth."""
    be = x.backend
    unit = one(be)
    prod, acc = unit, zero(be)
    for m in range(1, depth + 1):
        prod = mul(prod, sub(unit, y.coordinate(m)))
        acc = add(acc, x.coordinate(m))
        if not agrees(prod, sub(unit, acc)):
            return False
    return True


def to_sums(x: SeqVector, depth: int = DEFAULT_DEPTH) -> SeqVector:
    """Partial sums of a never-hits-1 vector: sup-norm 1, no zero entry.

    The image conditions (norm sup exactly 1, every entry certified nonzero
    through depth and beyond via the tail, limit 1) are verified and a
    violation raises rather than guessing.
    """
    _require(membership(x, "never_one", max(depth, x.prefix_len)), "to_sums domain")
    y = partial_sums(x)
    if sup_norm(y) != NormExp(0):
        raise ContractViolation("partial-sum image does not have sup-norm 1")
    for k in range(1, depth + 1):
        if y.coordinate(k).zero:
            raise ContractViolation(f"partial sum {k} vanishes at certified precision")
    if not agrees(y.tail.limit(y.backend), one(y.backend)):
        raise ContractViolation("partial sums do not tend to 1")
    return y


def from_sums(y: SeqVector, depth: int = DEFAULT_DEPTH) -> SeqVector:
    """Differences of a limit-one sequence; inverse of to_sums."""
    x = differences(y)
    _require(membership(x, "never_one", max(depth, x.prefix_len)), "from_sums image")
    return x


# ---------------------------------------------------------------------------
# segments and the continuity probe


@dataclass(frozen=True)
class ChainSegment:
    """A named map of the chain with its certified domain set."""

    name: str
    fn: Callable[[SeqVector, int], SeqVector]
    domain_set: str | None
    codomain_set: str | None


SEGMENTS = {
    "to_fractions": ChainSegment("to_fractions", to_fractions, "mono_to_one_inf", "fractions_proper"),
    "from_fractions": ChainSegment(
        "from_fractions", from_fractions, "fractions_proper", "mono_to_one_inf"
    ),
    "to_sums": ChainSegment("to_sums", to_sums, "never_one", None),
    "from_sums": ChainSegment("from_sums", from_sums, None, "never_one"),
}


@dataclass(frozen=True)
class ModulusRow:
    delta_exp: int
    max_deviation_exp: int | None  # None: all sampled deviations vanished
    samples_used: int
    escapes: int


@dataclass(frozen=True)
class ModulusTable:
    segment: str
    depth: int
    seed: int
    rows: tuple[ModulusRow, ...]

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "segment": self.segment,
            "depth": self.depth,
            "seed": self.seed,
            "rows": [
                {
                    "delta_exp": r.delta_exp,
                    "max_deviation_exp": r.max_deviation_exp,
                    "samples_used": r.samples_used,
                    "escapes": r.escapes,
                }
                for r in self.rows
            ],
        }


def _perturbation(backend, delta_exp: int, width: int, rng: random.Random, precision: int):
    """A finite sum-zero vector of sup-norm exactly p^-delta_exp.

    Zero coordinate sum keeps partial-sum closures intact, so perturbed
    points stay inside sum-constrained domains whenever the perturbation is
    small against the window's remainders.
    """
    from .field import from_digits, neg
    from .sequences import vector_of

    p = backend.p
    coords = []
    for i in range(max(1, width - 1)):
        extra = 0 if i == 0 else rng.randint(0, 3)  # the first slot attains the norm
        digits = [rng.randrange(1, p)] + [rng.randrange(p) for _ in range(precision - 1)]
        coords.append(from_digits(backend, delta_exp + extra, digits))
    total = coords[0]
    for c in coords[1:]:
        total = add(total, c)
    coords.append(neg(total))
    return vector_of(coords)


def continuity_probe(
    segment: ChainSegment,
    x: SeqVector,
    deltas: list[int],
    samples: int,
    depth: int = DEFAULT_DEPTH,
    seed: int = 0,
    precision: int | None = None,
) -> ModulusTable:
    """Observed output deviation exponents under certified perturbations.

    For each delta the input is shifted by random finite vectors of sup-norm
    exactly p^-delta; perturbed points that leave the certified domain are
    counted as escapes and skipped.  Deviations are exact sup-norm exponents
    of the output difference.
    """
    if segment.domain_set is not None:
        _require(membership(x, segment.domain_set, max(depth, x.prefix_len)), "probe base point")
    rng = random.Random(seed)
    precision = precision or max(
        (c.precision for c in x.prefix if not c.zero), default=16
    )
    base_image = segment.fn(x, depth)
    rows = []
    for delta in deltas:
        worst: int | None = None
        used = escapes = 0
        for _ in range(samples):
            w = _perturbation(x.backend, delta, min(depth, 6), rng, precision)
            xp = vec_add(x, w)
            try:
                if segment.domain_set is not None:
                    v = membership(xp, segment.domain_set, max(depth, xp.prefix_len))
                    if not v.yes:
                        raise DomainEscape(v.reason)
                image = segment.fn(xp, depth)
            except (DomainEscape, ContractViolation):
                escapes += 1
                continue
            used += 1
            dev = sup_norm(vec_sub(image.materialized(depth), base_image.materialized(depth)))
            if not dev.is_zero and (worst is None or dev.exp > worst):
                worst = dev.exp
        rows.append(ModulusRow(delta, worst, used, escapes))
    return ModulusTable(segment.name, depth, seed, tuple(rows))
