"""Seeded, constructive generators for test points and fixture catalogs.

Domain samples are built constructively rather than by rejection: fraction
sequences are drawn coordinate by coordinate inside the punctured unit ball
with a contracting constant tail, and partial-sum domain points are pulled
back through the inverse fraction transform, which lands in the certified
domain by construction.  Everything is driven by an explicit random.Random
so identical seeds reproduce identical objects.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .balls import BallSpec, certified_distance
from .extension import PresentedFunction, PresentedSpace
from .field import (
    FieldBackend,
    NormExp,
    PadicNumber,
    add,
    from_digits,
    from_integer,
    mul,
    norm_le_exp,
    one,
    pow_int,
    sub,
    uniformizer,
    zero,
)
from .sequences import SeqVector, TailRule

QP3 = FieldBackend("qp", 3)
QP5 = FieldBackend("qp", 5)
FL3 = FieldBackend("fp_laurent", 3)

STANDARD_BACKENDS = (QP3, QP5, FL3)


def random_unit(backend: FieldBackend, precision: int, rng: random.Random) -> PadicNumber:
    p = backend.p
    digits = [rng.randrange(1, p)] + [rng.randrange(p) for _ in range(precision - 1)]
    return from_digits(backend, 0, digits)


def random_element(
    backend: FieldBackend,
    precision: int,
    rng: random.Random,
    vmin: int = -4,
    vmax: int = 4,
    allow_zero: bool = True,
) -> PadicNumber:
    if allow_zero and rng.random() < 0.05:
        return zero(backend)
    p = backend.p
    v = rng.randint(vmin, vmax)
    digits = [rng.randrange(1, p)] + [rng.randrange(p) for _ in range(precision - 1)]
    return from_digits(backend, v, digits)


def random_fraction_coord(backend: FieldBackend, precision: int, rng: random.Random) -> PadicNumber:
    """A coordinate certified in B(0,1) minus 1."""
    while True:
        x = random_element(backend, precision, rng, vmin=0, vmax=3)
        if x.zero:
            return x
        if not sub(x, one(backend, precision)).zero:
            return x


def random_proper_fractions(
    backend: FieldBackend,
    precision: int,
    rng: random.Random,
    prefix_len: int = 6,
    first_near_one: bool = False,
) -> SeqVector:
    """A certified member of the proper fraction sequences.

    The constant tail value sits at distance exactly 1/p from 1, which makes
    the remainder products vanish and keeps the support infinite.  With
    ``first_near_one`` the leading coordinate satisfies |1 - y_1| = 1/p, so
    the pulled-back increments keep every partial sum at norm exactly 1.
    """
    coords = [random_fraction_coord(backend, precision, rng) for _ in range(prefix_len)]
    if first_near_one:
        coords[0] = add(
            one(backend, precision),
            mul(uniformizer(backend, precision), random_unit(backend, precision, rng)),
        )
    tail_value = add(one(backend, precision), mul(uniformizer(backend, precision), random_unit(backend, precision, rng)))
    return SeqVector(backend, tuple(coords), TailRule.constant(tail_value), "s")


def random_monotone_increments(
    backend: FieldBackend,
    precision: int,
    rng: random.Random,
    prefix_len: int = 6,
    depth: int = 12,
    unit_sums: bool = False,
) -> SeqVector:
    """A certified member of the monotone partial-sum set, by pullback.

    ``unit_sums`` keeps every partial sum at norm exactly 1 (and hence
    nonzero), which is what the partial-sum homeomorphism needs.
    """
    from .chain import from_fractions

    y = random_proper_fractions(backend, precision, rng, prefix_len, first_near_one=unit_sums)
    return from_fractions(y, depth)


def random_c0_vector(
    backend: FieldBackend,
    precision: int,
    rng: random.Random,
    prefix_len: int = 6,
    geometric_tail: bool = False,
) -> SeqVector:
    prefix = tuple(
        random_element(backend, precision, rng, vmin=0, vmax=4) for _ in range(prefix_len)
    )
    if geometric_tail:
        tail = TailRule.geometric_diff(random_unit(backend, precision, rng), uniformizer(backend, precision))
    else:
        tail = TailRule.zero_tail()
    return SeqVector(backend, prefix, tail, "c0")


def telescoping_vector(backend: FieldBackend, precision: int) -> SeqVector:
    """x_m = p^(m-1) - p^m: remainders telescope to exactly p^k."""
    return SeqVector(
        backend,
        (),
        TailRule.geometric_diff(one(backend, precision), uniformizer(backend, precision)),
        "c0",
    )


def bouncing_never_one_vector(
    backend: FieldBackend, precision: int, rng: random.Random
) -> SeqVector:
    """In the never-hits-1 set but outside the monotone set.

    The remainder norms go p^-a, then up to p^-b with b < a, then telescope
    geometrically to zero.
    """
    pi = uniformizer(backend, precision)
    unit = one(backend, precision)
    b_exp = rng.randint(1, 2)
    a_exp = b_exp + rng.randint(1, 2)
    x1 = sub(unit, pow_int(pi, a_exp))
    x2 = sub(pow_int(pi, a_exp), pow_int(pi, b_exp))
    scale = pow_int(pi, b_exp - 2)
    return SeqVector(backend, (x1, x2), TailRule.geometric_diff(scale, pi), "c0")


def random_slice_vector(
    backend: FieldBackend, precision: int, rng: random.Random, prefix_len: int = 5
) -> SeqVector:
    """A c0 vector with first coordinate exactly 1."""
    coords = [one(backend, precision)]
    coords += [
        random_element(backend, precision, rng, vmin=0, vmax=4) for _ in range(prefix_len - 1)
    ]
    return SeqVector(backend, tuple(coords), TailRule.zero_tail(), "c0")


def random_unitball_vector(
    backend: FieldBackend, precision: int, rng: random.Random, prefix_len: int = 5
) -> SeqVector:
    coords = [
        random_element(backend, precision, rng, vmin=0, vmax=4) for _ in range(prefix_len)
    ]
    return SeqVector(backend, tuple(coords), TailRule.zero_tail(), "c0")


def random_ball(
    backend: FieldBackend, precision: int, rng: random.Random, emin: int = -5, emax: int = 5
) -> BallSpec:
    center = random_element(backend, precision, rng, vmin=emin, vmax=emax)
    return BallSpec(center, rng.randint(emin, emax))


def random_time(backend: FieldBackend, precision: int, rng: random.Random) -> PadicNumber:
    """A time parameter in the closed unit ball, mixing all the regimes."""
    pick = rng.random()
    unit = one(backend, precision)
    if pick < 0.1:
        return zero(backend)
    if pick < 0.3:
        return pow_int(uniformizer(backend, precision), rng.randint(1, 4))
    if pick < 0.5:
        k = rng.randint(1, 5)
        return sub(unit, mul(random_unit(backend, precision, rng), pow_int(uniformizer(backend, precision), k)))
    if pick < 0.6:
        return unit
    return random_unit(backend, precision, rng)


# ---------------------------------------------------------------------------
# the extension fixture catalog


@dataclass(frozen=True)
class ExtensionInstance:
    name: str
    space: PresentedSpace
    function: PresentedFunction


def _check_short_map(f: PresentedFunction):
    """The catalog keeps |f_i - f_j| <= dist(M_i, M_j) between components.

    For such presentations the staged values can only move within the value
    ball picked one stage earlier, which is what gives the exact per-stage
    Cauchy rate the acceptance suite pins down.
    """
    pieces = f.pieces
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            (bi, vi), (bj, vj) = pieces[i], pieces[j]
            gap = sub(vi, vj)
            if gap.zero:
                continue
            dist = certified_distance(bi.center, bj.center)
            if not NormExp(-gap.valuation) <= dist:
                raise ValueError(f"catalog instance is not a short map: pieces {i},{j}")


def _instance(name, backend, precision, carrier, pieces, bound_exp) -> ExtensionInstance:
    space = PresentedSpace(backend, tuple(carrier))
    fn = PresentedFunction(tuple(pieces), bound_exp)
    _check_short_map(fn)
    for mball, _ in fn.pieces:
        assert any(cb.contains(mball.center) for cb in space.carrier)
    return ExtensionInstance(name, space, fn)


def extension_catalog(precision: int = 24) -> list[ExtensionInstance]:
    """Twenty finitely presented (carrier, domain, map) fixtures."""
    out = []
    for backend in STANDARD_BACKENDS:
        p = backend.p
        tag = backend.label
        pi = uniformizer(backend, precision)
        unit = one(backend, precision)
        z = zero(backend)
        x_ball = BallSpec(z, 0)

        def fi(n):
            return from_integer(n, backend, precision)

        def elem(v, digits):
            return from_digits(backend, v, digits, precision=precision)

        # the whole carrier, constant value
        out.append(_instance(f"{tag}-const", backend, precision, [x_ball], [(x_ball, unit)], 0))
        # two components with values 0 and 1 at distance 1
        out.append(
            _instance(
                f"{tag}-two-balls",
                backend,
                precision,
                [x_ball],
                [(BallSpec(z, -1), z), (BallSpec(unit, -1), unit)],
                0,
            )
        )
        # the identity on the level-1 residue balls
        pieces = []
        for d in range(p):
            c = fi(d) if d else z
            pieces.append((BallSpec(c, -1), c))
        out.append(_instance(f"{tag}-identity-1", backend, precision, [x_ball], pieces, 0))
        # deep components carrying digit-rich values: several stages move
        deep_val = elem(0, [1, 1, 1, 1, 1, 1])
        out.append(
            _instance(
                f"{tag}-deep-digits",
                backend,
                precision,
                [x_ball],
                [(BallSpec(z, -7), z), (BallSpec(unit, -7), deep_val)],
                0,
            )
        )
    backend, pi = QP3, uniformizer(QP3, precision)
    z, unit = zero(QP3), one(QP3, precision)
    x_ball = BallSpec(z, 0)
    # identity on the level-2 residue balls
    pieces = []
    for n in range(9):
        c = from_integer(n, QP3, precision) if n else z
        pieces.append((BallSpec(c, -2), c))
    out.append(_instance("Q_3-identity-2", QP3, precision, [x_ball], pieces, 0))
    # a wider carrier with bound p and values of norm p
    wide = BallSpec(z, 1)
    inv_pi = pow_int(pi, -1)
    out.append(
        _instance(
            "Q_3-wide",
            QP3,
            precision,
            [wide],
            [(BallSpec(z, -2), z), (BallSpec(inv_pi, -2), inv_pi)],
            1,
        )
    )
    # components sharing one value (groups merge)
    out.append(
        _instance(
            "Q_3-merged-values",
            QP3,
            precision,
            [x_ball],
            [
                (BallSpec(z, -3), unit),
                (BallSpec(from_integer(2, QP3, precision), -3), unit),
                (BallSpec(unit, -3), z),
            ],
            0,
        )
    )
    # mixed radii, values = centers
    out.append(
        _instance(
            "Q_3-mixed-radii",
            QP3,
            precision,
            [x_ball],
            [
                (BallSpec(z, -2), z),
                (BallSpec(unit, -3), unit),
                (BallSpec(from_integer(2, QP3, precision), -4), from_integer(2, QP3, precision)),
            ],
            0,
        )
    )
    # disconnected carrier
    out.append(
        _instance(
            "Q_3-two-carrier-balls",
            QP3,
            precision,
            [BallSpec(z, -1), BallSpec(unit, -1)],
            [(BallSpec(z, -3), z), (BallSpec(unit, -3), from_digits(QP3, 0, [1, 2], precision=precision))],
            0,
        )
    )
    # five components in Q_5 with value = center (short map with equality)
    pieces5 = []
    for d in range(5):
        c = from_integer(d, QP5, precision) if d else zero(QP5)
        pieces5.append((BallSpec(c, -3), c))
    out.append(
        _instance("Q_5-identity-deep", QP5, precision, [BallSpec(zero(QP5), 0)], pieces5, 0)
    )
    # Laurent instance with a theta-rich value
    tl = from_digits(FL3, 0, [1, 1, 2], precision=precision)
    out.append(
        _instance(
            "F_3-deep-pair",
            FL3,
            precision,
            [BallSpec(zero(FL3), 0)],
            [(BallSpec(zero(FL3), -3), zero(FL3)), (BallSpec(one(FL3, precision), -3), tl)],
            0,
        )
    )
    # negative bound: everything lives at norm <= 1/p
    small = mul(pi, one(QP3, precision))
    out.append(
        _instance(
            "Q_3-contracted",
            QP3,
            precision,
            [BallSpec(z, -1)],
            [(BallSpec(z, -3), z), (BallSpec(small, -3), small)],
            -1,
        )
    )
    assert len(out) == 20
    return out


def unitball_sampler(ball: BallSpec, precision: int, rng: random.Random):
    """Deterministic sampler of points inside a field ball."""
    backend = ball.center.backend

    def draw() -> PadicNumber:
        offset = mul(
            random_element(backend, precision, rng, vmin=0, vmax=4),
            pow_int(uniformizer(backend, precision), -ball.radius_exp),
        )
        return add(ball.center, offset)

    return draw
