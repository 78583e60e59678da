"""Clopen balls, disjoint partitions, and locally constant separation maps.

Every ball here is the closed set {z : |z - center| <= p^e}, which in an
ultrametric space is simultaneously open, and any of its points can serve as
its center.  The module provides the exact ball trichotomy, certified lower
bounds for distances between disjoint ball unions, the canonical matched
partitions realizing the homeomorphism between the whole field and its
punctured unit ball, generic affine ball transport, and multi-valued
Urysohn-style separating functions.

Points may be field elements or sequence vectors; distances come from the
field norm or the sup norm respectively and are always exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field

from .errors import (
    NotDisjoint,
    OutsideCarrier,
    PrecisionExhausted,
    SeparationTooSmall,
    UnresolvedAtLevel,
)
from .field import (
    DEFAULT_PRECISION,
    FieldBackend,
    NormExp,
    PadicNumber,
    add,
    from_integer,
    from_json as padic_from_json,
    mul,
    norm_le_exp,
    one,
    pow_int,
    sub,
    to_json as padic_to_json,
    uniformizer,
    zero,
)
from .sequences import SeqVector, seq_from_json, seq_to_json, sup_norm, vec_sub

DESK_SCALE_CAP = 10_000

Point = PadicNumber | SeqVector


def point_difference(x: Point, y: Point):
    if isinstance(x, SeqVector) != isinstance(y, SeqVector):
        raise ValueError("cannot mix field points and sequence points")
    return vec_sub(x, y) if isinstance(x, SeqVector) else sub(x, y)


def certified_distance(x: Point, y: Point) -> NormExp:
    """Exact distance; raises when the points agree only at precision."""
    d = point_difference(x, y)
    if isinstance(d, SeqVector):
        return sup_norm(d)
    if d.is_exact_zero:
        return NormExp.zero()
    if d.zero:
        raise PrecisionExhausted(
            f"distance certified only below p^-{d.zero_bound}", bound=d.zero_bound
        )
    return d.norm()


def distance_le_exp(x: Point, y: Point, e: int) -> bool:
    """Certified test |x - y| <= p^e."""
    d = point_difference(x, y)
    if isinstance(d, SeqVector):
        return sup_norm(d) <= NormExp(e)
    return norm_le_exp(d, e)


class BallRelation(enum.Enum):
    DISJOINT = "disjoint"
    A_IN_B = "a_in_b"
    B_IN_A = "b_in_a"
    EQUAL = "equal"


@dataclass(frozen=True)
class BallSpec:
    """A clopen ball: center plus radius p^radius_exp."""

    center: Point
    radius_exp: int

    def contains(self, x: Point) -> bool:
        return distance_le_exp(x, self.center, self.radius_exp)

    def distance_to_point_le(self, x: Point, e: int) -> bool:
        """dist(x, ball) <= p^e, using that the distance is either 0 or |x - c|."""
        return distance_le_exp(x, self.center, max(self.radius_exp, e))


def ball_relation(a: BallSpec, b: BallSpec) -> BallRelation:
    """Exact trichotomy: two balls are disjoint, nested, or equal."""
    touching = distance_le_exp(a.center, b.center, max(a.radius_exp, b.radius_exp))
    if not touching:
        return BallRelation.DISJOINT
    if a.radius_exp == b.radius_exp:
        return BallRelation.EQUAL
    return BallRelation.A_IN_B if a.radius_exp < b.radius_exp else BallRelation.B_IN_A


@dataclass(frozen=True)
class Partition:
    """An enumerated disjoint family of clopen balls."""

    balls: tuple[BallSpec, ...]
    resolution: int = 0
    label: str = ""

    def __post_init__(self):
        if len(self.balls) > DESK_SCALE_CAP:
            raise ValueError(f"partition exceeds the desk-scale cap of {DESK_SCALE_CAP} balls")

    def validate_disjoint(self):
        for i, a in enumerate(self.balls):
            for b in self.balls[i + 1 :]:
                if ball_relation(a, b) is not BallRelation.DISJOINT:
                    raise NotDisjoint(f"balls {i} and beyond intersect in {self.label or 'partition'}")

    def locate(self, x: Point) -> int:
        for i, b in enumerate(self.balls):
            if b.contains(x):
                return i
        raise OutsideCarrier("point is not covered at this resolution")


def set_min_distance(a: Partition, b: Partition) -> NormExp:
    """Certified lower bound for dist(A, B) when the ball unions are disjoint.

    Disjoint unions of balls of radius >= p^e are at distance >= p^e, so the
    smallest radius present is a valid certificate.
    """
    for i, ba in enumerate(a.balls):
        for j, bb in enumerate(b.balls):
            if ball_relation(ba, bb) is not BallRelation.DISJOINT:
                raise NotDisjoint(f"ball {i} of A intersects ball {j} of B")
    min_exp = min(x.radius_exp for x in a.balls + b.balls)
    return NormExp(min_exp)


def min_center_distance(a: Partition, b: Partition) -> NormExp:
    """The exhibited distance between the families (exact for disjoint balls)."""
    return min(
        certified_distance(ba.center, bb.center) for ba in a.balls for bb in b.balls
    )


# ---------------------------------------------------------------------------
# the canonical field <-> punctured ball partitions


def _field_annulus_ball(backend, n: int, d: int, precision: int) -> BallSpec:
    # the sphere |x| = p^(n+1) splits into p-1 balls of radius p^n, one per
    # nonzero unit residue d
    center = PadicNumber(backend, -(n + 1), (d,) + (0,) * (precision - 1))
    return BallSpec(center, n)


def _punctured_annulus_ball(backend, m: int, e: int, precision: int) -> BallSpec:
    # the sphere |x - 1| = p^-m splits into p-1 balls of radius p^(-m-1)
    center = add(one(backend, precision), mul(from_integer(e, backend, precision), pow_int(uniformizer(backend, precision), m)))
    return BallSpec(center, -m - 1)


def matched_partitions(
    levels: int, backend: FieldBackend, precision: int = DEFAULT_PRECISION
) -> tuple[Partition, Partition, tuple[int, ...]]:
    """Canonical partitions of the field and of B(0,1) minus 1, index-paired.

    The field decomposes into the unit ball plus annuli of growing norm; the
    punctured unit ball into annuli shrinking toward 1.  Each annulus splits
    into p-1 residue balls, enumerated annulus-major, residue-minor,
    ascending, and the pairing matches the two flat enumerations index by
    index (the field's unit ball shifts everything by one slot).
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    p = backend.p
    count = 1 + levels * (p - 1)
    if count > DESK_SCALE_CAP:
        raise ValueError("levels exceed the desk-scale ball cap")
    field_balls = [BallSpec(zero(backend), 0)]
    for n in range(levels):
        for d in range(1, p):
            field_balls.append(_field_annulus_ball(backend, n, d, precision))
    ball_balls = []
    for i in range(count):
        m, e = divmod(i, p - 1)
        ball_balls.append(_punctured_annulus_ball(backend, m, e + 1, precision))
    pairing = tuple(range(count))
    return (
        Partition(tuple(field_balls), resolution=levels, label="field"),
        Partition(tuple(ball_balls), resolution=levels, label="punctured-ball"),
        pairing,
    )


def transport_affine(src: BallSpec, dst: BallSpec, x: Point) -> Point:
    """The unique center-to-center affine map with modulus the radius ratio."""
    if isinstance(src.center, SeqVector):
        raise ValueError("affine transport is defined for field carriers")
    backend = src.center.backend
    precision = max(1, src.center.precision, dst.center.precision)
    b = pow_int(uniformizer(backend, precision), src.radius_exp - dst.radius_exp)
    a = sub(dst.center, mul(b, src.center))
    return add(a, mul(b, x))


def _field_index(x: PadicNumber, levels: int, p: int) -> int:
    if norm_le_exp(x, 0):
        return 0
    n = -x.valuation - 1
    if n >= levels:
        raise UnresolvedAtLevel(f"|x| = p^{n + 1} needs more than {levels} levels")
    return 1 + n * (p - 1) + (x.digits[0] - 1)


def _punctured_index(y: PadicNumber, levels: int, p: int) -> int:
    if not norm_le_exp(y, 0):
        raise ValueError("point is outside the unit ball")
    w = sub(y, one(y.backend, max(1, y.precision)))
    if w.zero:
        raise UnresolvedAtLevel(
            "point is indistinguishable from 1 at certified precision"
        )
    i = w.valuation * (p - 1) + (w.digits[0] - 1)
    if i >= 1 + levels * (p - 1):
        raise UnresolvedAtLevel(f"|y - 1| = p^-{w.valuation} needs more levels")
    return i


def field_to_ball(x: PadicNumber, levels: int, precision: int = DEFAULT_PRECISION) -> PadicNumber:
    """The canonical homeomorphism from the field onto B(0,1) minus 1."""
    backend = x.backend
    fpart, bpart, pairing = matched_partitions(levels, backend, precision)
    i = _field_index(x, levels, backend.p)
    return transport_affine(fpart.balls[i], bpart.balls[pairing[i]], x)


def ball_to_field(y: PadicNumber, levels: int, precision: int = DEFAULT_PRECISION) -> PadicNumber:
    """Inverse of field_to_ball on B(0,1) minus 1."""
    backend = y.backend
    fpart, bpart, pairing = matched_partitions(levels, backend, precision)
    i = _punctured_index(y, levels, backend.p)
    return transport_affine(bpart.balls[pairing[i]], fpart.balls[i], y)


def ball_transport(src: Partition, dst: Partition, pairing, x: Point) -> Point:
    """Map x affinely from its src ball into the paired dst ball."""
    pairing = tuple(pairing)
    if len(pairing) != len(src.balls) or sorted(pairing) != list(range(len(dst.balls))):
        raise ValueError("pairing must be a bijection between the two ball families")
    i = src.locate(x)
    return transport_affine(src.balls[i], dst.balls[pairing[i]], x)


# ---------------------------------------------------------------------------
# separating functions


def partition_within(part: Partition, x: Point, e: int) -> bool:
    """Certified test dist(x, union of the partition's balls) <= p^e."""
    return any(b.distance_to_point_le(x, e) for b in part.balls)


def urysohn(sets: list[tuple[Partition, PadicNumber]], x: Point, r_exp: int) -> PadicNumber:
    """Locally constant map sending the r-neighborhood of each family to its value.

    The families must be pairwise disjoint ball unions separated by more than
    p^r_exp (certified through set_min_distance); the last family's value is
    the default outside every neighborhood.  Constancy on balls of radius
    p^r_exp makes the map continuous.
    """
    if len(sets) < 1:
        raise ValueError("need at least one (family, value) pair")
    r = NormExp(r_exp)
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            d = set_min_distance(sets[i][0], sets[j][0])
            if not r < d:
                raise SeparationTooSmall(
                    f"families {i},{j} certified apart only by {d.exp} <= radius {r_exp}"
                )
    for part, value in sets[:-1]:
        if partition_within(part, x, r_exp):
            return value
    return sets[-1][1]


# ---------------------------------------------------------------------------
# serialization


def ball_to_json(b: BallSpec) -> dict:
    center = (
        {"seq": seq_to_json(b.center)}
        if isinstance(b.center, SeqVector)
        else padic_to_json(b.center)
    )
    return {"center": center, "radius_exp": b.radius_exp}


def ball_from_json(obj: dict) -> BallSpec:
    c = obj["center"]
    center = seq_from_json(c["seq"]) if "seq" in c else padic_from_json(c)
    return BallSpec(center, int(obj["radius_exp"]))


def partition_to_json(p: Partition) -> dict:
    return {
        "balls": [ball_to_json(b) for b in p.balls],
        "resolution": p.resolution,
        "label": p.label,
    }


def partition_from_json(obj: dict) -> Partition:
    return Partition(
        tuple(ball_from_json(b) for b in obj["balls"]),
        int(obj.get("resolution", 0)),
        obj.get("label", ""),
    )
