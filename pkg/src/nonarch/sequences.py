"""Sequence vectors over a local field, finitely presented with tail rules.

A SeqVector is an explicit prefix of field elements plus a rule for every
later coordinate.  The shipped rules (all decidable):

    zero         x_m = 0
    geom_diff    x_m = scale * (ratio^(m-1) - ratio^m)        |ratio| <= 1/p
    const        x_m = value                                   (generator)
    affine_geom  x_m = base + coeff * ratio^m                  (generator)

Because a rule closes the tail algebraically, norms, partial sums and set
membership can be certified for the whole infinite sequence, not just a
truncation.

Certification convention: all verdicts are statements at the certified
precision.  Equality-type conditions (a series summing to 1, a closure
constant cancelling) are decided through the shared digit window, and a
value that is zero-at-precision is treated as the zero of the presented
object.  Strict conditions (a remainder staying nonzero) are certified from
exact norms wherever the window reaches, with the algebraic tail closure
covering the rest.

Space tags follow the classical names: c0 (coordinates vanish), c (a limit
exists), s (every coordinate in the closed unit ball and distinct from 1).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import PrecisionExhausted
from .field import (
    NORM_ZERO,
    FieldBackend,
    NormExp,
    NormSup,
    PadicNumber,
    add,
    agrees,
    div,
    from_json as padic_from_json,
    mul,
    neg,
    one,
    pow_int,
    sub,
    to_json as padic_to_json,
    zero,
)

TAIL_KINDS = ("zero", "geom_diff", "const", "affine_geom")
SPACE_TAGS = ("c0", "c", "s", "none")

# Named subsets with decidable membership.  The x-side sets live in c0 and
# are cut out by partial-sum conditions; the y-side sets live in the product
# of punctured unit balls.
MEMBER_SETS = (
    "unit_sup",  # sup_k |x_1 + ... + x_k| = 1
    "mono_to_one",  # unit_sup, remainders 1 - sum shrink monotonically, sum = 1
    "mono_to_one_inf",  # mono_to_one minus the finitely supported points
    "never_one",  # unit_sup, partial sums avoid 1, sum = 1
    "fractions",  # every coordinate in B(0,1) \ {1}
    "fractions_proper",  # fractions, remainder products vanish, infinite support
)


@dataclass(frozen=True)
class TailRule:
    """Closed form for all coordinates beyond a vector's prefix."""

    kind: str
    scale: PadicNumber | None = None
    ratio: PadicNumber | None = None
    value: PadicNumber | None = None
    base: PadicNumber | None = None
    coeff: PadicNumber | None = None

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise ValueError(f"unknown tail kind {self.kind!r}")
        if self.kind in ("geom_diff", "affine_geom"):
            r = self.ratio
            if r is None or r.zero:
                raise ValueError("tail ratio must be certified nonzero")
            if r.valuation < 1:
                raise ValueError("tail ratio must have norm <= 1/p")
        if self.kind == "geom_diff" and self.scale is None:
            raise ValueError("geom_diff needs a scale")
        if self.kind == "const" and self.value is None:
            raise ValueError("const needs a value")
        if self.kind == "affine_geom" and (self.base is None or self.coeff is None):
            raise ValueError("affine_geom needs base and coeff")

    @classmethod
    def zero_tail(cls) -> "TailRule":
        return cls("zero")

    @classmethod
    def geometric_diff(cls, scale: PadicNumber, ratio: PadicNumber) -> "TailRule":
        return cls("geom_diff", scale=scale, ratio=ratio)

    @classmethod
    def constant(cls, value: PadicNumber) -> "TailRule":
        return cls("const", value=value)

    @classmethod
    def affine(cls, base: PadicNumber, coeff: PadicNumber, ratio: PadicNumber) -> "TailRule":
        return cls("affine_geom", base=base, coeff=coeff, ratio=ratio)

    def coordinate(self, m: int, backend: FieldBackend) -> PadicNumber:
        """The coordinate at global index m (1-based)."""
        if self.kind == "zero":
            return zero(backend)
        if self.kind == "const":
            return self.value
        if self.kind == "geom_diff":
            rm1 = pow_int(self.ratio, m - 1)
            return mul(self.scale, sub(rm1, mul(rm1, self.ratio)))
        return add(self.base, mul(self.coeff, pow_int(self.ratio, m)))

    def negated(self) -> "TailRule":
        if self.kind == "zero":
            return self
        if self.kind == "const":
            return replace(self, value=neg(self.value))
        if self.kind == "geom_diff":
            return replace(self, scale=neg(self.scale))
        return replace(self, base=neg(self.base), coeff=neg(self.coeff))

    def scaled(self, a: PadicNumber) -> "TailRule":
        if self.kind == "zero" or a.is_exact_zero:
            return TailRule.zero_tail()
        if self.kind == "const":
            return replace(self, value=mul(a, self.value))
        if self.kind == "geom_diff":
            return replace(self, scale=mul(a, self.scale))
        return replace(self, base=mul(a, self.base), coeff=mul(a, self.coeff))

    def shifted(self, delta: int) -> "TailRule":
        """Reindex so that coordinate m of the result is coordinate m - delta."""
        if self.kind in ("zero", "const"):
            return self
        adj = pow_int(self.ratio, -delta)
        if self.kind == "geom_diff":
            return replace(self, scale=mul(self.scale, adj))
        return replace(self, coeff=mul(self.coeff, adj))

    def vanishes(self) -> bool:
        """Certified: coordinates tend to zero."""
        if self.kind in ("zero", "geom_diff"):
            return True
        if self.kind == "const":
            return self.value.zero
        return self.base.zero

    def limit(self, backend: FieldBackend) -> PadicNumber:
        """The coordinate limit (every shipped rule converges)."""
        if self.kind in ("zero", "geom_diff"):
            return zero(backend)
        if self.kind == "const":
            return self.value
        return self.base


def tail_to_json(t: TailRule) -> dict:
    if t.kind == "zero":
        return {"kind": "zero"}
    if t.kind == "geom_diff":
        return {"kind": "geom_diff", "scale": padic_to_json(t.scale), "ratio": padic_to_json(t.ratio)}
    if t.kind == "const":
        return {"kind": "generator", "name": "const", "value": padic_to_json(t.value)}
    return {
        "kind": "generator",
        "name": "affine_geom",
        "base": padic_to_json(t.base),
        "coeff": padic_to_json(t.coeff),
        "ratio": padic_to_json(t.ratio),
    }


def tail_from_json(obj: dict) -> TailRule:
    kind = obj["kind"]
    if kind == "zero":
        return TailRule.zero_tail()
    if kind == "geom_diff":
        return TailRule.geometric_diff(padic_from_json(obj["scale"]), padic_from_json(obj["ratio"]))
    if kind == "generator":
        name = obj["name"]
        if name == "const":
            return TailRule.constant(padic_from_json(obj["value"]))
        if name == "affine_geom":
            return TailRule.affine(
                padic_from_json(obj["base"]),
                padic_from_json(obj["coeff"]),
                padic_from_json(obj["ratio"]),
            )
    raise ValueError(f"unknown tail {obj!r}")


@dataclass(frozen=True)
class SeqVector:
    """Prefix plus tail rule, optionally tagged with the space it lives in."""

    backend: FieldBackend
    prefix: tuple[PadicNumber, ...]
    tail: TailRule
    tag: str = "none"

    def __post_init__(self):
        if self.tag not in SPACE_TAGS:
            raise ValueError(f"unknown space tag {self.tag!r}")
        for x in self.prefix:
            if x.backend != self.backend:
                raise ValueError("prefix entry on a different backend")
        if self.tag == "c0" and not self.tail.vanishes():
            raise ValueError("c0 vector needs a vanishing tail")
        if self.tag == "s":
            bad = _fraction_conditions(self, self.prefix_len)
            if bad:
                raise ValueError(f"not a product-of-punctured-balls vector: {bad}")

    @property
    def prefix_len(self) -> int:
        return len(self.prefix)

    def coordinate(self, j: int) -> PadicNumber:
        if j < 1:
            raise ValueError("coordinates are 1-based")
        if j <= len(self.prefix):
            return self.prefix[j - 1]
        return self.tail.coordinate(j, self.backend)

    def coordinates(self, depth: int) -> list[PadicNumber]:
        return [self.coordinate(j) for j in range(1, depth + 1)]

    def with_tag(self, tag: str) -> "SeqVector":
        return SeqVector(self.backend, self.prefix, self.tail, tag)

    def materialized(self, depth: int) -> "SeqVector":
        """Extend the explicit prefix to ``depth`` without changing the object."""
        if depth <= len(self.prefix):
            return self
        extra = tuple(
            self.tail.coordinate(j, self.backend) for j in range(len(self.prefix) + 1, depth + 1)
        )
        return SeqVector(self.backend, self.prefix + extra, self.tail, self.tag)

    def __repr__(self):
        coords = ", ".join(repr(x) for x in self.prefix[:4])
        more = ", .." if len(self.prefix) > 4 else ""
        return f"SeqVector[{self.tag}]({coords}{more}; tail={self.tail.kind})"


def zeros_vector(backend: FieldBackend, tag: str = "c0") -> SeqVector:
    return SeqVector(backend, (), TailRule.zero_tail(), tag)


def basis_vector(backend: FieldBackend, j: int, precision: int, tag: str = "c0") -> SeqVector:
    coords = [zero(backend)] * j
    coords[j - 1] = one(backend, precision)
    return SeqVector(backend, tuple(coords), TailRule.zero_tail(), tag)


def vector_of(coords, tail: TailRule | None = None, tag: str = "c0") -> SeqVector:
    coords = tuple(coords)
    if not coords:
        raise ValueError("vector_of needs at least one coordinate")
    return SeqVector(coords[0].backend, coords, tail or TailRule.zero_tail(), tag)


def seq_to_json(v: SeqVector) -> dict:
    return {
        "prefix": [padic_to_json(x) for x in v.prefix],
        "tail": tail_to_json(v.tail),
        "tag": v.tag,
    }


def seq_from_json(obj: dict, backend: FieldBackend | None = None) -> SeqVector:
    prefix = tuple(padic_from_json(d, backend) for d in obj.get("prefix", []))
    tail = tail_from_json(obj.get("tail", {"kind": "zero"}))
    if backend is None:
        if prefix:
            backend = prefix[0].backend
        else:
            probe = next(
                (p for p in (tail.scale, tail.ratio, tail.value, tail.base, tail.coeff) if p is not None),
                None,
            )
            if probe is None:
                raise ValueError("cannot infer backend from an empty zero vector")
            backend = probe.backend
    return SeqVector(backend, prefix, tail, obj.get("tag", "none"))


# ---------------------------------------------------------------------------
# norms


def _feed_affine_terms(tracker: NormSup, base, coeff, ratio, start: int, backend):
    """Feed |base + coeff*ratio^m| for all m >= start into the tracker.

    Indices where the geometric term could tie or dominate |base| are fed
    explicitly; past them every term has norm exactly |base|.
    """
    if coeff.is_exact_zero or ratio is None:
        tracker.feed(base)
        return
    if coeff.zero:
        tracker.feed_upper(NormExp(-(coeff.zero_bound + ratio.valuation * start)))
        tracker.feed(base)
        return
    m = start
    while True:
        term = NormExp(-(coeff.valuation + ratio.valuation * m))
        if base.is_exact_zero:
            tracker.feed_exact(term)  # pure geometric part: first index dominates
            return
        if base.zero:
            if term < NormExp(-base.zero_bound):
                break
        elif term < base.norm():
            break
        tracker.feed(add(base, mul(coeff, pow_int(ratio, m))))
        m += 1
    tracker.feed(base)


def sup_norm(v: SeqVector) -> NormExp:
    """Exact supremum norm over all coordinates, tail included."""
    tracker = NormSup()
    for x in v.prefix:
        tracker.feed(x)
    t, L = v.tail, v.prefix_len
    if t.kind == "const":
        tracker.feed(t.value)
    elif t.kind != "zero":
        base, coeff, ratio = _as_affine(t, v.backend)
        _feed_affine_terms(tracker, base, coeff, ratio, L + 1, v.backend)
    return tracker.result()


def vec_norm_le_exp(v: SeqVector, e: int) -> bool:
    """Certified test sup_j |v_j| <= p^e."""
    return sup_norm(v) <= NormExp(e)


def project(v: SeqVector, j: int) -> PadicNumber:
    """The j-th coordinate, materializing the tail rule when needed."""
    return v.coordinate(j)


# ---------------------------------------------------------------------------
# linear structure


def vec_neg(v: SeqVector) -> SeqVector:
    return SeqVector(v.backend, tuple(neg(x) for x in v.prefix), v.tail.negated(), v.tag)


def vec_scale(v: SeqVector, a: PadicNumber) -> SeqVector:
    tag = v.tag if v.tag in ("c0", "c") else "none"
    return SeqVector(v.backend, tuple(mul(a, x) for x in v.prefix), v.tail.scaled(a), tag)


def _as_affine(t: TailRule, backend: FieldBackend):
    """(base, coeff, ratio) view of a tail; ratio None means no geometric part."""
    if t.kind == "zero":
        return zero(backend), zero(backend), None
    if t.kind == "const":
        return t.value, zero(backend), None
    if t.kind == "affine_geom":
        return t.base, t.coeff, t.ratio
    # geom_diff: scale*(r^(m-1) - r^m) = [scale*(1-r)/r] * r^m
    unit = one(backend, max(1, t.scale.precision))
    coeff = mul(t.scale, div(sub(unit, t.ratio), t.ratio))
    return zero(backend), coeff, t.ratio


def _combine_tails(a: TailRule, b: TailRule, backend: FieldBackend) -> TailRule:
    if a.kind == "zero":
        return b
    if b.kind == "zero":
        return a
    base_a, coeff_a, ra = _as_affine(a, backend)
    base_b, coeff_b, rb = _as_affine(b, backend)
    if ra is not None and rb is not None and not agrees(ra, rb):
        raise ValueError("cannot combine tails with different ratios")
    ratio = ra if ra is not None else rb
    base = add(base_a, base_b)
    coeff = add(coeff_a, coeff_b)
    if ratio is None or coeff.is_exact_zero:
        return TailRule.constant(base) if not base.is_exact_zero else TailRule.zero_tail()
    if coeff.zero:
        raise PrecisionExhausted(
            "combined tail coefficient cancels only at precision", bound=coeff.zero_bound
        )
    return TailRule.affine(base, coeff, ratio)


def vec_add(v: SeqVector, w: SeqVector) -> SeqVector:
    if v.backend != w.backend:
        raise ValueError("mixed backends")
    L = max(v.prefix_len, w.prefix_len)
    v, w = v.materialized(L), w.materialized(L)
    prefix = tuple(add(x, y) for x, y in zip(v.prefix, w.prefix))
    tail = _combine_tails(v.tail, w.tail, v.backend)
    if v.tag == w.tag and v.tag in ("c0", "c"):
        tag = v.tag
    elif {v.tag, w.tag} <= {"c0", "c"}:
        tag = "c"
    else:
        tag = "none"
    if tag == "c0" and not tail.vanishes():
        tag = "c"
    return SeqVector(v.backend, prefix, tail, tag)


def vec_sub(v: SeqVector, w: SeqVector) -> SeqVector:
    return vec_add(v, vec_neg(w))


# ---------------------------------------------------------------------------
# partial sums and differences


def partial_sums(x: SeqVector) -> SeqVector:
    """y with y_k = x_1 + ... + x_k; lands in c with limit the series sum."""
    if not x.tail.vanishes():
        raise ValueError("partial sums need a vector with vanishing tail")
    sums = []
    acc = zero(x.backend)
    for xj in x.prefix:
        acc = add(acc, xj)
        sums.append(acc)
    L = x.prefix_len
    t = x.tail
    if t.kind == "zero" or (t.kind == "const" and t.value.is_exact_zero):
        tail = TailRule.constant(acc) if not acc.is_exact_zero else TailRule.zero_tail()
    elif t.kind == "geom_diff":
        # sum over m in (L, k] of scale*(r^(m-1)-r^m) telescopes to scale*(r^L - r^k)
        tail = TailRule.affine(add(acc, mul(t.scale, pow_int(t.ratio, L))), neg(t.scale), t.ratio)
    else:
        # affine_geom with vanishing base: adds coeff*(r^(L+1)-r^(k+1))/(1-r)
        factor = div(t.coeff, sub(one(x.backend, max(1, t.coeff.precision)), t.ratio))
        tail = TailRule.affine(
            add(acc, mul(factor, pow_int(t.ratio, L + 1))),
            neg(mul(factor, t.ratio)),
            t.ratio,
        )
    return SeqVector(x.backend, tuple(sums), tail, "c")


def differences(y: SeqVector) -> SeqVector:
    """x with x_1 = y_1 and x_k = y_k - y_(k-1); inverse of partial_sums."""
    if y.prefix_len == 0:
        y = y.materialized(1)
    prefix = [y.prefix[0]]
    for k in range(1, y.prefix_len):
        prefix.append(sub(y.prefix[k], y.prefix[k - 1]))
    L = y.prefix_len
    t = y.tail
    # the first tail index subtracts the last explicit coordinate
    prefix.append(sub(t.coordinate(L + 1, y.backend), y.prefix[L - 1]))
    if t.kind in ("zero", "const"):
        tail = TailRule.zero_tail()
    else:
        _, coeff, ratio = _as_affine(t, y.backend)
        # y_k - y_(k-1) = coeff*(r^k - r^(k-1)) = (-coeff)*(r^(k-1) - r^k)
        tail = TailRule.geometric_diff(neg(coeff), ratio)
    return SeqVector(y.backend, tuple(prefix), tail, "c0")


# ---------------------------------------------------------------------------
# membership


@dataclass(frozen=True)
class MembershipVerdict:
    kind: str  # "yes" | "no" | "inconclusive"
    reason: str
    depth: int

    @property
    def yes(self) -> bool:
        return self.kind == "yes"

    @property
    def no(self) -> bool:
        return self.kind == "no"


def _yes(reason, depth):
    return MembershipVerdict("yes", reason, depth)


def _no(reason, depth):
    return MembershipVerdict("no", reason, depth)


def _coord_in_punctured_ball(x: PadicNumber, j: int) -> str | None:
    if not x.zero and x.valuation < 0:
        return f"coordinate {j} has norm > 1"
    d = sub(x, one(x.backend, max(1, x.precision)))
    if d.zero:
        return f"coordinate {j} equals 1 at certified precision"
    return None


def _fraction_conditions(v: SeqVector, depth: int) -> str | None:
    """None when every coordinate is certified in B(0,1) minus 1."""
    top = max(depth, v.prefix_len)
    for j in range(1, top + 1):
        bad = _coord_in_punctured_ball(v.coordinate(j), j)
        if bad:
            return bad
    t = v.tail
    if t.kind == "zero":
        return None
    if t.kind == "const":
        return _coord_in_punctured_ball(t.value, top + 1)
    base, coeff, ratio = _as_affine(t, v.backend)
    if coeff.is_exact_zero:
        return _coord_in_punctured_ball(base, top + 1)
    if coeff.zero:
        # geometric part below certification: judge by the limit alone
        return _coord_in_punctured_ball(base, top + 1)
    # only finitely many tail coordinates can have norm >= 1 or tie with
    # |1 - base|; check those explicitly, the rest is certified by norms
    unit = one(v.backend, max(1, coeff.precision))
    gap = sub(unit, base)  # coordinate m equals 1 iff coeff*r^m equals this
    m = top + 1
    while True:
        term_exp = -(coeff.valuation + ratio.valuation * m)
        ambiguous = (
            term_exp > 0
            or (not gap.zero and term_exp >= -gap.valuation)
            or (gap.zero and gap.zero_bound is not None and term_exp >= -gap.zero_bound)
        )
        if not ambiguous:
            break
        bad = _coord_in_punctured_ball(t.coordinate(m, v.backend), m)
        if bad:
            return bad
        m += 1
    if not base.zero and base.valuation < 0:
        return "tail limit has norm > 1"
    return None


def _partial_sum_closure(v: SeqVector, depth: int):
    """Partial sums and remainders through ``depth`` plus the tail closure.

    Returns (sums, rems, sum_limit, e_coeff, ratio): beyond depth the k-th
    partial sum is  sum_limit - e_coeff * ratio^k  (e_coeff = 0 and ratio
    None when the tail freezes the sums).  Requires a vanishing tail.
    """
    be = v.backend
    unit = one(be)
    sums, rems = [], []
    acc = zero(be)
    for k in range(1, depth + 1):
        acc = add(acc, v.coordinate(k))
        sums.append(acc)
        rems.append(sub(unit, acc))
    _, coeff, ratio = _as_affine(v.tail, be)
    if ratio is None or coeff.is_exact_zero:
        return sums, rems, acc, zero(be), None
    factor = div(coeff, sub(one(be, max(1, coeff.precision)), ratio))
    sum_limit = add(acc, mul(factor, pow_int(ratio, depth + 1)))
    return sums, rems, sum_limit, mul(factor, ratio), ratio


def _sums_sup(sums, sum_limit, e_coeff, ratio, depth: int, backend) -> NormExp:
    """Exact sup over all k of |partial sum up to k|."""
    tracker = NormSup()
    for s in sums:
        tracker.feed(s)
    if ratio is not None:
        _feed_affine_terms(tracker, sum_limit, neg(e_coeff), ratio, depth + 1, backend)
    else:
        tracker.feed(sum_limit)
    return tracker.result()


def membership(v: SeqVector, set_name: str, depth: int) -> MembershipVerdict:
    """Certified membership in one of the named subsets.

    ``depth`` bounds the explicitly checked window; the tail rule closes the
    conditions beyond it.  Yes/No verdicts carry the deciding condition and
    are read at the certified precision (see the module docstring).
    """
    if set_name not in MEMBER_SETS:
        raise ValueError(f"unknown set {set_name!r}; choose from {MEMBER_SETS}")
    if depth < v.prefix_len:
        raise ValueError("depth must cover the explicit prefix")

    if set_name == "fractions":
        bad = _fraction_conditions(v, depth)
        return _no(bad, depth) if bad else _yes("all coordinates in B(0,1) minus 1", depth)

    if set_name == "fractions_proper":
        bad = _fraction_conditions(v, depth)
        if bad:
            return _no(bad, depth)
        t = v.tail
        if t.vanishes():
            if _infinite_support(v)[0]:
                # |1 - y_m| -> 1, so remainder products stay away from 0
                return _no("tail coordinates vanish: remainder products do not", depth)
            return _no("finitely supported", depth)
        if t.kind == "const":
            gap = sub(one(v.backend), t.value)
            if not gap.zero and gap.valuation < 1:
                return _no("tail factors |1 - y| = 1: products cannot vanish", depth)
            return _yes("tail factors have norm < 1 and support is infinite", depth)
        limit_gap = sub(one(v.backend), t.limit(v.backend))
        if not limit_gap.zero and limit_gap.valuation < 1:
            return _no("tail factor norms tend to 1: products cannot vanish", depth)
        return _yes("tail factors eventually have norm < 1", depth)

    # partial-sum sets live in c0
    if not v.tail.vanishes():
        return _no("not a c0 presentation (tail does not vanish)", depth)
    sums, rems, sum_limit, e_coeff, ratio = _partial_sum_closure(v, depth)
    sup = _sums_sup(sums, sum_limit, e_coeff, ratio, depth, v.backend)

    if set_name == "unit_sup":
        if sup == NormExp(0):
            return _yes("sup of partial-sum norms is exactly 1", depth)
        return _no(f"sup of partial-sum norms is {sup.describe(v.backend.p)}", depth)

    if sup != NormExp(0):
        return _no(f"sup of partial-sum norms is {sup.describe(v.backend.p)}, not 1", depth)
    if not agrees(sum_limit, one(v.backend)):
        return _no("series does not sum to 1", depth)

    if set_name == "never_one":
        for k, rem in enumerate(rems, start=1):
            if rem.zero:
                return _no(f"partial sum reaches 1 at index {k}", depth)
        if ratio is None or e_coeff.zero:
            return _no("tail freezes the partial sums at 1", depth)
        infinite, why = _infinite_support(v)
        if not infinite:
            return _no(why, depth)
        return _yes("remainders certified nonzero, sum is 1", depth)

    # monotone remainder norms through the window and into the tail
    prev = None
    for k, rem in enumerate(rems, start=1):
        if prev is not None:
            if prev.zero:
                if not rem.zero:
                    return _no(f"remainder regrows at index {k} after reaching 1", depth)
            elif not rem.zero and rem.norm() > prev.norm():
                return _no(f"remainder norm grows at index {k}", depth)
        prev = rem
    if ratio is not None and not e_coeff.zero and prev is not None:
        first_tail = NormExp(-(e_coeff.valuation + ratio.valuation * (depth + 1)))
        if prev.zero:
            bound = NORM_ZERO if prev.zero_bound is None else NormExp(-prev.zero_bound)
            if first_tail > bound:
                return _no("remainder regrows entering the tail", depth)
        elif first_tail > prev.norm():
            return _no("remainder norm grows entering the tail", depth)
    if set_name == "mono_to_one":
        return _yes("remainder norms shrink monotonically and the sum is 1", depth)

    infinite, why = _infinite_support(v)
    if not infinite:
        return _no(why, depth)
    return _yes("monotone remainders, sum 1, infinite support", depth)


def _infinite_support(v: SeqVector) -> tuple[bool, str]:
    t = v.tail
    if t.kind == "zero":
        return False, "finitely supported (zero tail)"
    if t.kind == "const":
        if t.value.zero:
            return False, "finitely supported (zero tail value)"
        return True, "constant nonzero tail"
    if t.kind == "geom_diff":
        if t.scale.zero:
            return False, "finitely supported (zero tail scale)"
        return True, "geometric tail with nonzero scale"
    if t.base.zero and t.coeff.zero:
        return False, "finitely supported (vanishing tail)"
    return True, "affine tail with nonzero data"


# ---------------------------------------------------------------------------
# the product-space metric


def s_metric(
    x: SeqVector, y: SeqVector, depth: int, literal_inverse: bool = False
) -> tuple[Fraction, Fraction]:
    """Metric on the countable product: sum_j min(p^-j, |x_j - y_j|).

    Returns (value over indices <= depth, certified bound for the rest).
    With ``literal_inverse`` the per-term distance is replaced by its
    reciprocal |x_j - y_j|^(-1) (capping 1/0 at the p^-j term); that variant
    fails the identity axiom by design and is exposed for inspection only.
    """
    if x.backend != y.backend:
        raise ValueError("mixed backends")
    p = x.backend.p
    total = Fraction(0)
    for j in range(1, depth + 1):
        d = sub(x.coordinate(j), y.coordinate(j))
        cap = Fraction(1, p**j)
        if d.is_exact_zero:
            term = cap if literal_inverse else Fraction(0)
        elif d.zero:
            raise PrecisionExhausted(
                f"coordinate {j} difference certified only below p^-{d.zero_bound}",
                bound=d.zero_bound,
            )
        else:
            dist = Fraction(p) ** (-d.valuation)
            term = min(cap, 1 / dist) if literal_inverse else min(cap, dist)
        total += term
    same_tail = x.tail == y.tail and x.prefix_len <= depth and y.prefix_len <= depth
    tail_bound = Fraction(0) if (same_tail and not literal_inverse) else Fraction(1, (p**depth) * (p - 1))
    return total, tail_bound


def seq_agrees(v: SeqVector, w: SeqVector, depth: int) -> bool:
    """Coordinates agree at certified precision through depth, tails included.

    Structurally equal tails certify the whole object; otherwise a window of
    extra coordinates past ``depth`` is compared.
    """
    for j in range(1, depth + 1):
        if not agrees(v.coordinate(j), w.coordinate(j)):
            return False
    if v.tail == w.tail and max(v.prefix_len, w.prefix_len) <= depth:
        return True
    for j in range(depth + 1, depth + 9):
        if not agrees(v.coordinate(j), w.coordinate(j)):
            return False
    return True
