"""Evaluatable isotopies on sequence spaces, with exact inverse evaluators.

An isotopy here is a family (x, t) -> x' over times t in the closed unit
ball, equal to the identity at t = 0, together with the inverse family and a
declared support region.  Shipped constructions:

  * time-window reparametrization H[a,b] (identity until |t| passes |a|,
    frozen at the time-1 map once t is within |1-b| of 1);
  * infinite left products over the standard window ladder, which reduce to
    finite products away from t = 1 and run a pluggable stabilization
    certificate at t = 1;
  * the point-pushing isotopy on the slice {x : x_1 = 1}, its conjugate
    pushing the origin inside the unit ball of c0, and rescaled copies
    supported on arbitrarily small balls;
  * a fiberwise time-scaling combinator producing product-space isotopies
    that act in the first factor only;
  * a coordinatewise step-scaling family whose inverse family is not jointly
    continuous at (0, 0) - kept as a documented counterexample fixture.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import ContractViolation, NoStabilization, PrecisionExhausted
from .field import (
    DEFAULT_PRECISION,
    FieldBackend,
    NormExp,
    PadicNumber,
    add,
    agrees,
    div,
    invert,
    mul,
    norm_le_exp,
    one,
    pow_int,
    shift,
    sub,
    uniformizer,
    zero,
)
from .balls import BallSpec
from .sequences import SeqVector, sup_norm, vec_scale, zeros_vector

MAX_FACTORS = 64


@dataclass(frozen=True)
class Isotopy:
    """A named isotopy: forward and inverse evaluators plus support metadata.

    ``support`` None means the whole space; otherwise points outside the
    ball are fixed by every time slice.
    """

    name: str
    backend: FieldBackend
    eval_fn: Callable[[SeqVector, PadicNumber], SeqVector]
    inv_fn: Callable[[SeqVector, PadicNumber], SeqVector]
    support: BallSpec | None = None

    def eval(self, x: SeqVector, t: PadicNumber) -> SeqVector:
        return self.eval_fn(x, t)

    def inv(self, y: SeqVector, t: PadicNumber) -> SeqVector:
        return self.inv_fn(y, t)


@dataclass(frozen=True)
class TimeWindow:
    """A reparametrization window [a, b] inside the unit time ball."""

    a: PadicNumber
    b: PadicNumber

    def __post_init__(self):
        if not self.a.zero and self.a.valuation < 0:
            raise ValueError("|a| must be <= 1")
        gap = sub(one(self.b.backend, max(1, self.b.precision)), self.b)
        if not gap.zero and gap.valuation < 1:
            raise ValueError("|1 - b| must be < 1")
        if sub(self.a, self.b).zero:
            raise ValueError("window needs a != b")


def _require_unit_time(t: PadicNumber):
    if not t.zero and t.valuation < 0:
        raise ContractViolation("time parameter must satisfy |t| <= 1")


def window_time(w: TimeWindow, t: PadicNumber) -> PadicNumber | None:
    """Effective time for H[a,b] at t; None encodes the identity branch."""
    _require_unit_time(t)
    be = t.backend
    unit = one(be, max(1, t.precision, w.b.precision))
    gap_b = sub(unit, w.b)
    gap_t = sub(unit, t)
    if gap_t.zero or (not gap_b.zero and norm_le_exp(gap_t, -gap_b.valuation)):
        return unit  # inside B(1, |1-b|): the time-1 map
    in_a_ball = t.zero if w.a.zero else norm_le_exp(t, -w.a.valuation)
    if in_a_ball:
        return None
    return div(sub(t, w.a), sub(w.b, w.a))


def reparam(h: Isotopy, w: TimeWindow) -> Isotopy:
    """H[a,b]: identity before the window, H_1 past it, rescaled inside."""

    def fwd(x, t):
        s = window_time(w, t)
        return x if s is None else h.eval(x, s)

    def inv(y, t):
        s = window_time(w, t)
        return y if s is None else h.inv(y, s)

    return Isotopy(f"{h.name}[window]", h.backend, fwd, inv, h.support)


def standard_window(j: int, backend: FieldBackend, precision: int = DEFAULT_PRECISION) -> TimeWindow:
    """The j-th ladder window [1 - p^j, 1 - p^(j+1)] (j = 0 starts at 0)."""
    pi = uniformizer(backend, precision)
    unit = one(backend, precision)
    a = zero(backend) if j == 0 else sub(unit, pow_int(pi, j))
    return TimeWindow(a, sub(unit, pow_int(pi, j + 1)))


def _ladder_time(j: int, t: PadicNumber, k: int | None) -> PadicNumber | None:
    """Effective time of ladder factor j at t; k is the valuation of 1 - t.

    k None encodes t = 1 (every factor runs at time 1).  Otherwise factors
    below k run at 1, factor 0 interpolates when k = 0, everything else is
    the identity.
    """
    be = t.backend
    if k is None or j < k:
        return one(be, max(1, t.precision))
    if j == 0:
        if t.zero:
            return None
        return div(t, sub(one(be, max(1, t.precision)), uniformizer(be, max(1, t.precision))))
    return None


def left_product(
    factor_at: Callable[[int], Isotopy],
    t: PadicNumber,
    x: SeqVector,
    stabilized: Callable[[SeqVector, int], bool] | None = None,
    max_factors: int = MAX_FACTORS,
) -> tuple[SeqVector, int]:
    """Evaluate L-prod of factor_at(j) over the standard window ladder at t.

    Away from t = 1 the product certifies itself finite: with |1 - t| =
    p^-k exactly the factors past index k are the identity, so k + 1 windows
    are evaluated.  At t = 1 the caller must supply a stabilization
    certificate, which is consulted after every factor.

    Returns the image and the number of factors evaluated.
    """
    _require_unit_time(t)
    gap = sub(one(t.backend, max(1, t.precision)), t)
    if not gap.zero:
        k = gap.valuation
        for j in range(k + 1):
            s = _ladder_time(j, t, k)
            if s is not None:
                x = factor_at(j).eval(x, s)
        return x, k + 1
    if stabilized is None:
        raise NoStabilization("t = 1 needs a factor stream with a stabilization certificate")
    unit = one(t.backend, max(1, t.precision))
    for j in range(max_factors):
        x = factor_at(j).eval(x, unit)
        if stabilized(x, j):
            return x, j + 1
    raise NoStabilization(f"no stabilization within {max_factors} factors")


# ---------------------------------------------------------------------------
# the slice push


def _gap_to_one(x: PadicNumber) -> PadicNumber:
    return sub(one(x.backend, max(1, x.precision)), x)


def _in_shrinking_nbhd(coords: list[PadicNumber], i: int) -> bool:
    """Membership in U_i = {x : max over l in 2..i of |1 - x_l| < p^-i}."""
    return all(norm_le_exp(_gap_to_one(coords[l - 1]), -i - 1) for l in range(2, i + 1))


def _blocked_beyond(coords: list[PadicNumber], j: int) -> bool:
    """Certificate: every U_i with i >= j + 2 already excludes the point.

    A single coordinate l <= j + 2 with |1 - x_l| >= p^-(j+2) blocks all the
    later shrinking neighborhoods, and the remaining factors never touch it.
    """
    top = min(j + 2, len(coords))
    return any(
        not norm_le_exp(_gap_to_one(coords[l - 1]), -(j + 3)) for l in range(2, top + 1)
    )


def push_slice_isotopy(
    backend: FieldBackend, precision: int = DEFAULT_PRECISION, max_factors: int = MAX_FACTORS
) -> Isotopy:
    """Push the base point (1, 0, 0, ...) off the slice {x : x_1 = 1}.

    Ladder factor j applies H^(j+1): the first factor adds t to the second
    coordinate, factor i >= 2 adds (uniformizer * t) to coordinate i + 1 for
    points inside the shrinking neighborhood U_i, and fixes everything else.
    At t = 1 the blocked-coordinate certificate makes the product finite on
    every certified slice vector.
    """
    pi = uniformizer(backend, precision)

    def check_slice(v: SeqVector):
        if not agrees(v.coordinate(1), one(backend, precision)):
            raise ContractViolation("slice vectors need first coordinate 1")

    def fwd(x: SeqVector, t: PadicNumber) -> SeqVector:
        check_slice(x)
        _require_unit_time(t)
        gap = sub(one(backend, max(1, t.precision)), t)
        k = None if gap.zero else gap.valuation
        top = max_factors if k is None else max(k, 1)
        coords = list(x.coordinates(max(x.prefix_len, top + 2)))
        applied = 0
        for i in range(1, top + 1):
            s = _ladder_time(i - 1, t, k)
            if s is None:
                continue
            if i == 1:
                coords[1] = add(coords[1], s)
            elif _in_shrinking_nbhd(coords, i):
                coords[i] = add(coords[i], mul(pi, s))
            applied = i
            if k is None and _blocked_beyond(coords, i - 1):
                break
        else:
            if k is None:
                raise NoStabilization(f"no stabilization within {max_factors} factors")
        keep = max(x.prefix_len, applied + 1, 2)
        return SeqVector(backend, tuple(coords[:keep]), x.tail, x.tag)

    def inv(y: SeqVector, t: PadicNumber) -> SeqVector:
        check_slice(y)
        _require_unit_time(t)
        gap = sub(one(backend, max(1, t.precision)), t)
        k = None if gap.zero else gap.valuation
        top = max_factors if k is None else max(k, 1)
        coords = list(y.coordinates(max(y.prefix_len, top + 2)))
        out = list(coords)
        applied = 0
        for i in range(1, top + 1):
            s = _ladder_time(i - 1, t, k)
            if s is None:
                continue
            if i == 1:
                out[1] = sub(coords[1], s)
            elif _in_shrinking_nbhd(coords, i):
                out[i] = sub(coords[i], mul(pi, s))
            applied = i
            if k is None and _blocked_beyond(coords, i - 1):
                break
        else:
            if k is None:
                raise NoStabilization(f"no stabilization within {max_factors} factors")
        keep = max(y.prefix_len, applied + 1, 2)
        return SeqVector(backend, tuple(out[:keep]), y.tail, y.tag)

    return Isotopy("push_slice", backend, fwd, inv, support=None)


def push_slice_factors(backend: FieldBackend, precision: int = DEFAULT_PRECISION):
    """The slice push as a raw factor stream for ``left_product``.

    Returns (factor_at, stabilized): factor_at(j) is the j-th ladder factor
    as a standalone isotopy and stabilized is the blocked-coordinate
    certificate consulted at t = 1.
    """
    pi = uniformizer(backend, precision)

    def factor_at(j: int) -> Isotopy:
        i = j + 1  # this factor touches coordinate i + 1

        def fwd(x: SeqVector, s: PadicNumber) -> SeqVector:
            coords = list(x.coordinates(max(x.prefix_len, i + 1, 2)))
            if i == 1:
                coords[1] = add(coords[1], s)
            elif _in_shrinking_nbhd(coords, i):
                coords[i] = add(coords[i], mul(pi, s))
            return SeqVector(backend, tuple(coords), x.tail, x.tag)

        def inv(y: SeqVector, s: PadicNumber) -> SeqVector:
            coords = list(y.coordinates(max(y.prefix_len, i + 1, 2)))
            if i == 1:
                coords[1] = sub(coords[1], s)
            elif _in_shrinking_nbhd(coords, i):
                coords[i] = sub(coords[i], mul(pi, s))
            return SeqVector(backend, tuple(coords), y.tail, y.tag)

        return Isotopy(f"push_slice_factor_{j}", backend, fwd, inv)

    def stabilized(x: SeqVector, j: int) -> bool:
        coords = x.coordinates(max(x.prefix_len, j + 2))
        return _blocked_beyond(coords, j)

    return factor_at, stabilized


# ---------------------------------------------------------------------------
# pushing the origin inside the unit ball of c0


def shift_in(v: SeqVector, precision: int) -> SeqVector:
    """(y_1, y_2, ...) -> (1, y_1, y_2, ...)."""
    return SeqVector(
        v.backend, (one(v.backend, precision),) + v.prefix, v.tail.shifted(1), "c0"
    )


def shift_out(v: SeqVector) -> SeqVector:
    """(1, y_1, y_2, ...) -> (y_1, y_2, ...)."""
    if v.prefix_len < 1:
        v = v.materialized(1)
    return SeqVector(v.backend, v.prefix[1:], v.tail.shifted(-1), "c0")


def push_origin_isotopy(
    backend: FieldBackend, precision: int = DEFAULT_PRECISION, max_factors: int = MAX_FACTORS
) -> Isotopy:
    """Push the origin off c0, acting only inside the closed unit ball.

    Conjugates the slice push through y -> (1, y); the slice map moves each
    coordinate by at most |t| <= 1, so the unit ball is preserved setwise and
    the identity extension outside it is clopen-consistent.
    """
    slice_push = push_slice_isotopy(backend, precision, max_factors)
    support = BallSpec(zeros_vector(backend), 0)

    def fwd(x: SeqVector, t: PadicNumber) -> SeqVector:
        if sup_norm(x) > NormExp(0):
            return x
        return shift_out(slice_push.eval(shift_in(x, precision), t))

    def inv(y: SeqVector, t: PadicNumber) -> SeqVector:
        if sup_norm(y) > NormExp(0):
            return y
        return shift_out(slice_push.inv(shift_in(y, precision), t))

    return Isotopy("push_origin", backend, fwd, inv, support=support)


def conjugate_scale(h: Isotopy, r: PadicNumber) -> Isotopy:
    """Conjugate by coordinatewise scaling: support shrinks to radius |r|."""
    r_inv = invert(r)
    if h.support is None:
        support = None
    else:
        support = BallSpec(
            vec_scale(h.support.center, r), h.support.radius_exp - r.valuation
        )

    def fwd(x, t):
        return vec_scale(h.eval(vec_scale(x, r_inv), t), r)

    def inv(y, t):
        return vec_scale(h.inv(vec_scale(y, r_inv), t), r)

    return Isotopy(f"scaled[{h.name}]", h.backend, fwd, inv, support=support)


# ---------------------------------------------------------------------------
# fiberwise combination on product spaces


def default_time_product(t: PadicNumber, u: PadicNumber) -> PadicNumber:
    """The shipped two-time combiner w(t, u) = t*u."""
    return mul(t, u)


def default_fiber_gauge(r: PadicNumber, y: SeqVector) -> PadicNumber:
    """A gauge with value 1 exactly at the origin, locally constant elsewhere.

    Returns 1 - d where |d| = min(1, sup-norm of y); the r parameter is
    accepted for interface compatibility and the family is constant in it.
    """
    be = y.backend
    n = max(1, r.precision) if not r.zero else DEFAULT_PRECISION
    s = sup_norm(y)
    if s.is_zero:
        return one(be, n)
    delta = pow_int(uniformizer(be, n), max(0, -s.exp))
    return sub(one(be, n), delta)


@dataclass(frozen=True)
class PairIsotopy:
    """An isotopy of a product space, acting in the first factor only."""

    name: str
    eval_fn: Callable
    inv_fn: Callable

    def eval(self, pair: tuple[SeqVector, SeqVector], t: PadicNumber):
        return self.eval_fn(pair, t)

    def inv(self, pair: tuple[SeqVector, SeqVector], t: PadicNumber):
        return self.inv_fn(pair, t)


def fiber_family(
    h: Isotopy,
    gauge: Callable[[PadicNumber, SeqVector], PadicNumber] | None = None,
    combine: Callable[[PadicNumber, PadicNumber], PadicNumber] | None = None,
    sample_times: list[PadicNumber] | None = None,
):
    """Family r -> isotopy of pairs (x, y) -> (H at time w(t, gauge_r(y)), y).

    The gauge must send the second-factor origin to 1 and the combiner w
    must vanish whenever either argument vanishes, reach 1 exactly at
    (1, 1), and stay inside the unit ball.  These side conditions are
    checked on sample points when the family is built; violations raise
    ContractViolation.
    """
    be = h.backend
    gauge = gauge or default_fiber_gauge
    combine = combine or default_time_product
    n = DEFAULT_PRECISION
    unit, pi = one(be, n), uniformizer(be, n)
    times = sample_times or [zero(be), unit, pi, sub(unit, pi), add(unit, pi)]
    for u in times:
        if not combine(zero(be), u).zero:
            raise ContractViolation("combiner must vanish at time 0")
        if not combine(u, zero(be)).zero:
            raise ContractViolation("combiner must vanish on a zero gauge")
        if not u.zero and not norm_le_exp(combine(u, u), 0):
            raise ContractViolation("combiner must stay inside the unit ball")
    if not agrees(combine(unit, unit), unit):
        raise ContractViolation("combiner must reach 1 at (1, 1)")
    for u in times:
        for v in times:
            if u.zero or v.zero:
                continue
            both_one = sub(u, unit).zero and sub(v, unit).zero
            if sub(combine(u, v), unit).zero and not both_one:
                raise ContractViolation("combiner reaches 1 away from (1, 1) on samples")

    def family(r: PadicNumber) -> PairIsotopy:
        origin_gauge = gauge(r, zeros_vector(be))
        if not agrees(origin_gauge, unit):
            raise ContractViolation("gauge must equal 1 at the second-factor origin")

        def fwd(pair, t):
            x, y = pair
            return (h.eval(x, combine(t, gauge(r, y))), y)

        def inv(pair, t):
            x, y = pair
            return (h.inv(x, combine(t, gauge(r, y))), y)

        return PairIsotopy(f"fiber[{h.name}]", fwd, inv)

    return family


# ---------------------------------------------------------------------------
# the coordinatewise step-scaling fixture


def step_scaling_isotopy(backend: FieldBackend, precision: int = DEFAULT_PRECISION) -> Isotopy:
    """Scale coordinate j by p^j exactly when |t| = p^-j; identity otherwise.

    Each time slice is a bijection onto its image and the family is the
    identity at t = 0, but the inverse family blows small vectors up to unit
    size along t -> 0, so it is not jointly continuous at (0, 0); see
    ``step_scaling_witness``.
    """
    pi = uniformizer(backend, precision)

    def scale_coord(x: SeqVector, t: PadicNumber, direction: int) -> SeqVector:
        _require_unit_time(t)
        if t.zero:
            if t.zero_bound is not None:
                raise PrecisionExhausted(
                    "time indistinguishable from 0: scaling level unresolved",
                    bound=t.zero_bound,
                )
            return x
        j = t.valuation
        if j == 0:
            return x
        x = x.materialized(max(x.prefix_len, j))
        coords = list(x.prefix)
        coords[j - 1] = shift(coords[j - 1], direction * j)
        return SeqVector(backend, tuple(coords), x.tail, x.tag)

    return Isotopy(
        "step_scaling",
        backend,
        lambda x, t: scale_coord(x, t, +1),
        lambda y, t: scale_coord(y, t, -1),
        support=None,
    )


def step_scaling_witness(backend: FieldBackend, n: int, precision: int = DEFAULT_PRECISION):
    """(t_n, y_n) tending to (0, 0) whose inverse images keep sup-norm 1.

    t_n = p^n and y_n = p^n e_n, so the inverse slice divides coordinate n
    by p^n and returns e_n exactly.
    """
    from .sequences import basis_vector

    t = pow_int(uniformizer(backend, precision), n)
    y = vec_scale(basis_vector(backend, n, precision), t)
    return t, y
