"""Staged extension of a bounded locally constant map to a whole carrier.

Setting: a carrier X presented as a finite disjoint union of clopen balls in
a locally compact field, a closed subset M inside it presented the same way,
and a map f on M that is constant on each of M's balls with |f| <= p^c.

The construction runs in stages n = 1, 2, ...  At stage n the value ball
B(0, p^c) is split into residue balls of radius p^(c-n); the pieces of M are
grouped by which value ball their f-value occupies, every carrier ball at
scale p^(c-n-1) near such a group is assigned the group's canonical value
center (nearest group first in the canonical value order), and everything
that falls out of reach keeps the value it had - the zero default before any
stage could reach it.  Stage values only ever move within the value ball
chosen one stage earlier, which is what makes the staged functions a Cauchy
sequence, and points of M always evaluate through f itself, so the final
function restricts to f exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractViolation, OutsideCarrier, PrecisionExhausted, ResolutionTooCoarse
from .field import (
    FieldBackend,
    NormExp,
    NormSup,
    PadicNumber,
    add,
    from_digits,
    from_integer,
    mul,
    norm_le_exp,
    pow_int,
    sub,
    to_json as padic_to_json,
    uniformizer,
    zero,
)
from .balls import BallRelation, BallSpec, Partition, ball_relation, ball_to_json

DEFAULT_MIN_RADIUS_EXP = -64


@dataclass(frozen=True)
class PresentedSpace:
    """A carrier: finitely many disjoint clopen balls plus a refinement floor."""

    backend: FieldBackend
    carrier: tuple[BallSpec, ...]
    min_radius_exp: int = DEFAULT_MIN_RADIUS_EXP

    def __post_init__(self):
        if not self.carrier:
            raise ValueError("carrier needs at least one ball")
        Partition(self.carrier, label="carrier").validate_disjoint()


@dataclass(frozen=True)
class PresentedFunction:
    """Locally constant assignment ball -> value with a certified bound.

    Pieces are consulted in order, so earlier pieces may carve refinements
    out of later, coarser ones.  A None default means the function is only
    defined on its pieces.
    """

    pieces: tuple[tuple[BallSpec, PadicNumber], ...]
    bound_exp: int
    default: PadicNumber | None = None

    def __post_init__(self):
        for i, (_, value) in enumerate(self.pieces):
            if not norm_le_exp(value, self.bound_exp):
                raise ValueError(f"piece {i} value exceeds the bound p^{self.bound_exp}")
        if self.default is not None and not norm_le_exp(self.default, self.bound_exp):
            raise ValueError("default value exceeds the bound")

    def eval(self, x: PadicNumber) -> PadicNumber:
        for ball, value in self.pieces:
            if ball.contains(x):
                return value
        if self.default is not None:
            return self.default
        raise OutsideCarrier("point is outside the function's presented domain")

    def domain_partition(self) -> Partition:
        return Partition(tuple(b for b, _ in self.pieces), label="domain")


def refine_ball(ball: BallSpec, backend: FieldBackend, precision: int) -> list[BallSpec]:
    """Split a ball of radius p^e into its p children of radius p^(e-1)."""
    e = ball.radius_exp
    offsets = [mul(from_integer(d, backend, precision), pow_int(uniformizer(backend, precision), -e))
               for d in range(1, backend.p)]
    children = [BallSpec(ball.center, e - 1)]
    children += [BallSpec(add(ball.center, off), e - 1) for off in offsets]
    return children


# ---------------------------------------------------------------------------
# canonical value centers


def _value_digits(value: PadicNumber, lo: int, hi: int) -> list[int]:
    """Digits of ``value`` at absolute positions lo..hi-1 (must be certified)."""
    m = value.abs_precision
    if m is not None and m < hi:
        raise PrecisionExhausted(f"value certified mod p^{m}, stage needs {hi}", bound=m)
    if value.zero:
        return [0] * (hi - lo)
    out = []
    for pos in range(lo, hi):
        i = pos - value.valuation
        out.append(value.digits[i] if 0 <= i < len(value.digits) else 0)
    return out


def _value_key(value: PadicNumber, bound_exp: int, n: int, p: int) -> int:
    """Canonical index of the stage-n value ball containing ``value``.

    Digits run from the lowest admissible position upward, packed most
    significant first so that children of earlier parents enumerate earlier.
    """
    digits = _value_digits(value, -bound_exp, -bound_exp + n)
    idx = 0
    for d in digits:
        idx = idx * p + d
    return idx


def _value_center(value: PadicNumber, bound_exp: int, n: int, precision: int) -> PadicNumber:
    digits = _value_digits(value, -bound_exp, -bound_exp + n)
    if not any(digits):
        return zero(value.backend)
    return from_digits(value.backend, -bound_exp, digits, precision=precision)


def stage_value_groups(f: PresentedFunction, n: int, precision: int):
    """M's pieces grouped by their stage-n value ball, in canonical order.

    Returns a list of (index, center, balls) sorted by index.
    """
    grouped: dict[int, tuple[PadicNumber, list[BallSpec]]] = {}
    for ball, value in f.pieces:
        p = value.backend.p if not value.zero else ball.center.backend.p
        key = _value_key(value, f.bound_exp, n, p)
        if key not in grouped:
            center = _value_center(value, f.bound_exp, n, precision)
            grouped[key] = (center, [ball])
        else:
            grouped[key][1].append(ball)
    return [(k,) + grouped[k] for k in sorted(grouped)]


def _near_group(center: PadicNumber, balls: list[BallSpec], e: int) -> bool:
    return any(b.distance_to_point_le(center, e) for b in balls)


def _center_gap(old: PadicNumber, new: PadicNumber, bound_exp: int, n: int) -> NormExp | None:
    """|new - old| for two canonical value centers, exactly.

    Centers are finite digit truncations, so the difference is read off the
    first differing digit position; None means the truncations coincide.
    """
    a = _value_digits(old, -bound_exp, -bound_exp + n)
    b = _value_digits(new, -bound_exp, -bound_exp + n)
    for i, (da, db) in enumerate(zip(a, b)):
        if da != db:
            return NormExp(bound_exp - i)
    return None


def _classify(point: PadicNumber, groups, scale_exp: int) -> int | None:
    """Index (into groups) of the first group within p^scale_exp, or None."""
    for gi, (_, _, balls) in enumerate(groups):
        if _near_group(point, balls, scale_exp):
            return gi
    return None


# ---------------------------------------------------------------------------
# staging


@dataclass(frozen=True)
class StageRecord:
    n: int
    scale_exp: int
    active_count: int
    frozen_count: int
    step_diff: NormExp | None  # sup |stage_n - stage_(n-1)| over the carrier


@dataclass(frozen=True)
class ExtensionResult:
    function: PresentedFunction
    stages: tuple[StageRecord, ...]

    @property
    def final_scale_exp(self) -> int:
        return self.stages[-1].scale_exp


def _splits_domain(ball: BallSpec, f: PresentedFunction) -> bool:
    """True when some domain ball sits strictly inside ``ball``.

    Such a ball is the only kind whose points are at non-uniform distances
    from the domain; everything else classifies from its center alone, since
    two disjoint balls keep a single distance between all their point pairs.
    """
    return any(
        ball_relation(ball, mball) is BallRelation.B_IN_A for mball, _ in f.pieces
    )


def _descend(ball, value, f, groups, scale_exp, space, precision, active, frozen):
    """Split only around strictly contained domain balls; classify the rest."""
    if _splits_domain(ball, f):
        if ball.radius_exp - 1 < space.min_radius_exp:
            raise ResolutionTooCoarse(
                f"stage needs radius p^{ball.radius_exp - 1} below the carrier floor"
            )
        for child in refine_ball(ball, space.backend, precision):
            _descend(child, value, f, groups, scale_exp, space, precision, active, frozen)
        return
    gi = _classify(ball.center, groups, scale_exp)
    if gi is None:
        frozen.append((ball, value))
    else:
        active.append((ball, groups[gi][1]))


def _inside_domain(ball: BallSpec, f: PresentedFunction) -> bool:
    for mball, _ in f.pieces:
        if ball_relation(ball, mball) in (BallRelation.A_IN_B, BallRelation.EQUAL):
            return True
    return False


def extend(
    f: PresentedFunction,
    space: PresentedSpace,
    n_max: int,
    precision: int | None = None,
) -> ExtensionResult:
    """Run the staged construction to stage n_max.

    The result's pieces list M first (restriction exactness), then the
    frozen and still-active regions; together they cover the carrier.  The
    step_diff of stage n is the exact sup over the carrier of the difference
    between the stage-n and stage-(n-1) functions.
    """
    if n_max < 2:
        raise ContractViolation("n_max must be >= 2")
    precision = precision or max(
        (v.precision for _, v in f.pieces if not v.zero), default=12
    )
    _check_domain_inside(f, space)
    frozen: list[tuple[BallSpec, PadicNumber]] = []
    active: list[tuple[BallSpec, PadicNumber]] = []
    stages: list[StageRecord] = []
    h_default = zero(space.backend)

    groups = stage_value_groups(f, 1, precision)
    scale = f.bound_exp - 2
    for ball in space.carrier:
        _descend(ball, h_default, f, groups, scale, space, precision, active, frozen)
    stages.append(StageRecord(1, scale, len(active), len(frozen), None))

    for n in range(2, n_max + 1):
        groups = stage_value_groups(f, n, precision)
        scale = f.bound_exp - n - 1
        if scale < space.min_radius_exp:
            raise ResolutionTooCoarse(f"stage {n} needs radius p^{scale} below the floor")
        tracker = NormSup()
        next_active: list[tuple[BallSpec, PadicNumber]] = []
        for ball, value in active:
            gi = _classify(ball.center, groups, scale)
            if gi is None:
                frozen.append((ball, value))
            else:
                new_value = groups[gi][1]
                next_active.append((ball, new_value))
                if not _inside_domain(ball, f):
                    gap = _center_gap(value, new_value, f.bound_exp, n)
                    if gap is not None:
                        tracker.feed_exact(gap)
        active = next_active
        stages.append(StageRecord(n, scale, len(active), len(frozen), tracker.result()))

    pieces = tuple(f.pieces) + tuple(frozen) + tuple(active)
    g = PresentedFunction(pieces, f.bound_exp)
    return ExtensionResult(g, tuple(stages))


def _check_domain_inside(f: PresentedFunction, space: PresentedSpace):
    for mball, _ in f.pieces:
        if not any(
            ball_relation(mball, cb) in (BallRelation.A_IN_B, BallRelation.EQUAL)
            for cb in space.carrier
        ):
            raise ContractViolation("a domain ball lies outside the carrier")


def extend_step(
    f: PresentedFunction,
    space: PresentedSpace,
    n: int,
    precision: int | None = None,
) -> tuple[PresentedFunction, Partition]:
    """The stage-n function u_n and the clopen region it actively covers.

    u_n assigns each near-enough carrier ball the canonical center of the
    stage-n value ball of the closest value group (first in canonical order);
    outside the region it defaults to 0.  The region always contains M.
    """
    if n < 1:
        raise ContractViolation("stage index must be >= 1")
    precision = precision or max(
        (v.precision for _, v in f.pieces if not v.zero), default=12
    )
    _check_domain_inside(f, space)
    groups = stage_value_groups(f, n, precision)
    scale = f.bound_exp - n - 1
    if scale < space.min_radius_exp:
        raise ResolutionTooCoarse(f"stage {n} needs radius p^{scale} below the floor")
    active: list[tuple[BallSpec, PadicNumber]] = []
    discarded: list = []
    for ball in space.carrier:
        _descend(ball, zero(space.backend), f, groups, scale, space, precision, active, discarded)
    u_n = PresentedFunction(tuple(active), f.bound_exp, default=zero(space.backend))
    region = Partition(tuple(b for b, _ in active), resolution=scale, label=f"stage-{n}")
    return u_n, region


def stage_function(
    f: PresentedFunction, space: PresentedSpace, n: int, precision: int | None = None
) -> PresentedFunction:
    """The glued stage-n function (f on M, stage values near M, frozen past)."""
    if n == 1:
        u1, _ = extend_step(f, space, 1, precision)
        return PresentedFunction(tuple(f.pieces) + u1.pieces, f.bound_exp, default=u1.default)
    result = extend(f, space, n, precision)
    return result.function


def extension_to_json(result: ExtensionResult) -> dict:
    return {
        "schema_version": 1,
        "bound_exp": result.function.bound_exp,
        "stages": [
            {
                "n": s.n,
                "scale_exp": s.scale_exp,
                "active": s.active_count,
                "frozen": s.frozen_count,
                "step_diff_exp": None if s.step_diff is None else s.step_diff.exp,
            }
            for s in result.stages
        ],
        "pieces": [
            {"ball": ball_to_json(b), "value": padic_to_json(v)}
            for b, v in result.function.pieces
        ],
    }
