"""Exact arithmetic in discretely valued non-Archimedean local fields.

Two locally compact backends are supported: the field of p-adic numbers
("qp", carry-propagating base-p digits) and formal Laurent series over the
prime field F_p ("fp_laurent", carry-free coefficients).  A nonzero element
is stored as  uniformizer^v * unit  with the unit known through its first N
digits, so the value is certified modulo uniformizer^(v+N).  N is the
relative precision; the norm |x| = p^(-v) is exact for every certified
nonzero value.

A computation that cancels everything inside the certified window produces a
value that is *zero at precision*: known to satisfy |x| <= p^(-bound), and a
distinct state from the exact zero made by constructors.  Operations that
need a certified nonzero input raise instead of guessing.

All values are immutable; every operation is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering

from .errors import DivisionByZeroAtPrecision, PrecisionExhausted

DEFAULT_PRECISION = 32

QP = "qp"
FP_LAURENT = "fp_laurent"


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


@dataclass(frozen=True)
class FieldBackend:
    """A concrete local field: which arithmetic plus the residue prime p."""

    kind: str
    p: int

    def __post_init__(self):
        if self.kind not in (QP, FP_LAURENT):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if not _is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")

    @property
    def label(self) -> str:
        return f"Q_{self.p}" if self.kind == QP else f"F_{self.p}((t))"


@total_ordering
@dataclass(frozen=True)
class NormExp:
    """An exact norm value: either 0, or p^exp for an integer exp.

    Totally ordered with 0 below every power; multiplication of norms is
    addition of exponents.
    """

    exp: int | None = None  # None encodes the norm value 0

    @classmethod
    def zero(cls) -> "NormExp":
        return cls(None)

    @classmethod
    def of(cls, exp: int) -> "NormExp":
        return cls(exp)

    @property
    def is_zero(self) -> bool:
        return self.exp is None

    def __lt__(self, other: "NormExp") -> bool:
        if self.exp is None:
            return other.exp is not None
        if other.exp is None:
            return False
        return self.exp < other.exp

    def times(self, other: "NormExp") -> "NormExp":
        if self.exp is None or other.exp is None:
            return NormExp.zero()
        return NormExp(self.exp + other.exp)

    def as_fraction(self, p: int):
        from fractions import Fraction

        if self.exp is None:
            return Fraction(0)
        return Fraction(p) ** self.exp

    def describe(self, p: int) -> str:
        return "0" if self.exp is None else f"{p}^{self.exp}"


NORM_ZERO = NormExp.zero()


@dataclass(frozen=True)
class PadicNumber:
    """A field element at certified relative precision.

    For a nonzero value, ``digits`` holds the unit part little-endian by
    ascending power starting at ``valuation``; the first digit is nonzero and
    the value is certified modulo p^(valuation + len(digits)).  A zero value
    has empty digits; ``zero_bound`` is the absolute certification exponent
    (None means exactly zero).
    """

    backend: FieldBackend
    valuation: int
    digits: tuple[int, ...]
    zero: bool = False
    zero_bound: int | None = None

    def __post_init__(self):
        p = self.backend.p
        if self.zero:
            if self.digits:
                raise ValueError("zero value must have empty digits")
        else:
            if not self.digits:
                raise ValueError("nonzero value needs at least one digit")
            if self.digits[0] == 0:
                raise ValueError("leading digit of the unit must be nonzero")
            if any(d < 0 or d >= p for d in self.digits):
                raise ValueError(f"digits must lie in [0, {p})")

    @property
    def precision(self) -> int:
        """Relative precision: number of certified unit digits."""
        return len(self.digits)

    @property
    def abs_precision(self) -> int | None:
        """Absolute exponent m such that the value is known mod p^m."""
        if self.zero:
            return self.zero_bound
        return self.valuation + len(self.digits)

    @property
    def is_exact_zero(self) -> bool:
        return self.zero and self.zero_bound is None

    def norm(self) -> NormExp:
        return NORM_ZERO if self.zero else NormExp(-self.valuation)

    def __repr__(self):
        if self.zero:
            tag = "0" if self.zero_bound is None else f"0(mod^{self.zero_bound})"
            return f"<{self.backend.label} {tag}>"
        head = ",".join(str(d) for d in self.digits[:6])
        more = ".." if len(self.digits) > 6 else ""
        return f"<{self.backend.label} v={self.valuation} [{head}{more}] N={self.precision}>"


# ---------------------------------------------------------------------------
# constructors


def zero(backend: FieldBackend, bound: int | None = None) -> PadicNumber:
    """The zero element; a finite ``bound`` marks it as zero-at-precision."""
    return PadicNumber(backend, 0, (), zero=True, zero_bound=bound)


def _digits_of_int(u: int, p: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        u, d = divmod(u, p)
        out.append(d)
    return tuple(out)


def _int_of_digits(digits: tuple[int, ...], p: int) -> int:
    acc = 0
    for d in reversed(digits):
        acc = acc * p + d
    return acc


def from_integer(n: int, backend: FieldBackend, precision: int = DEFAULT_PRECISION) -> PadicNumber:
    """Digit expansion of a rational integer to relative precision N.

    In the Laurent backend the integer lands in the residue field, so any
    multiple of p is exactly zero there.
    """
    if precision < 1:
        raise ValueError("precision must be >= 1")
    p = backend.p
    if backend.kind == FP_LAURENT:
        c = n % p
        if c == 0:
            return zero(backend)
        return PadicNumber(backend, 0, (c,) + (0,) * (precision - 1))
    if n == 0:
        return zero(backend)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    unit = n % (p**precision)
    return PadicNumber(backend, v, _digits_of_int(unit, p, precision))


def from_digits(
    backend: FieldBackend, valuation: int, digits, precision: int | None = None
) -> PadicNumber:
    """Build a value from explicit unit digits (little-endian at ``valuation``).

    Leading zeros are stripped into the valuation; trailing zeros pad up to
    ``precision`` when given.
    """
    ds = list(digits)
    shift = 0
    while ds and ds[0] == 0:
        ds.pop(0)
        shift += 1
    if not ds:
        return zero(backend)
    if precision is not None and len(ds) < precision:
        ds.extend([0] * (precision - len(ds)))
    return PadicNumber(backend, valuation + shift, tuple(ds))


def one(backend: FieldBackend, precision: int = DEFAULT_PRECISION) -> PadicNumber:
    return PadicNumber(backend, 0, (1,) + (0,) * (precision - 1))


def uniformizer(backend: FieldBackend, precision: int = DEFAULT_PRECISION) -> PadicNumber:
    """The value-group generator: p itself for Q_p, t for Laurent series."""
    return PadicNumber(backend, 1, (1,) + (0,) * (precision - 1))


# ---------------------------------------------------------------------------
# arithmetic


def _require_same_backend(a: PadicNumber, b: PadicNumber):
    if a.backend != b.backend:
        raise ValueError(f"mixed backends: {a.backend.label} vs {b.backend.label}")


def _min_abs(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def neg(a: PadicNumber) -> PadicNumber:
    if a.zero:
        return a
    p = a.backend.p
    if a.backend.kind == QP:
        n = len(a.digits)
        u = (-_int_of_digits(a.digits, p)) % (p**n)
        return PadicNumber(a.backend, a.valuation, _digits_of_int(u, p, n))
    return PadicNumber(a.backend, a.valuation, tuple((-d) % p for d in a.digits))


def _window_coeffs(x: PadicNumber, base: int, m: int) -> list[int]:
    """Laurent coefficients of x over absolute positions [base, m)."""
    out = [0] * (m - base)
    for i, d in enumerate(x.digits):
        pos = x.valuation + i
        if base <= pos < m:
            out[pos - base] = d
    return out


def add(a: PadicNumber, b: PadicNumber) -> PadicNumber:
    """Exact sum at the largest common certified precision.

    Cancellation below the common window yields a zero-at-precision value
    carrying its absolute bound.
    """
    _require_same_backend(a, b)
    if a.is_exact_zero:
        return b
    if b.is_exact_zero:
        return a
    m = _min_abs(a.abs_precision, b.abs_precision)
    assert m is not None
    if a.zero and b.zero:
        return zero(a.backend, m)
    parts = [x for x in (a, b) if not x.zero]
    base = min(x.valuation for x in parts)
    if base >= m:
        return zero(a.backend, m)
    p = a.backend.p
    if a.backend.kind == QP:
        total = 0
        for x in parts:
            total += _int_of_digits(x.digits, p) * p ** (x.valuation - base)
        total %= p ** (m - base)
        if total == 0:
            return zero(a.backend, m)
        v = 0
        while total % p == 0:
            total //= p
            v += 1
        return PadicNumber(a.backend, base + v, _digits_of_int(total, p, m - base - v))
    coeffs = [0] * (m - base)
    for x in parts:
        for i, c in enumerate(_window_coeffs(x, base, m)):
            coeffs[i] = (coeffs[i] + c) % p
    return from_digits(a.backend, base, coeffs) if any(coeffs) else zero(a.backend, m)


def sub(a: PadicNumber, b: PadicNumber) -> PadicNumber:
    return add(a, neg(b))


def _laurent_mul_units(da: tuple[int, ...], db: tuple[int, ...], p: int, n: int) -> tuple[int, ...]:
    # Kronecker substitution: pack coefficients into an integer with enough
    # headroom that convolution digits never collide, then reduce mod p.
    bits = ((p - 1) * (p - 1) * max(len(da), len(db))).bit_length() + 1
    base = 1 << bits
    ia = sum(c << (bits * i) for i, c in enumerate(da))
    ib = sum(c << (bits * i) for i, c in enumerate(db))
    prod = ia * ib
    out = []
    for _ in range(n):
        prod, c = divmod(prod, base)
        out.append(c % p)
    return tuple(out)


def mul(a: PadicNumber, b: PadicNumber) -> PadicNumber:
    """Exact product; valuations add, precision is the minimum of the two."""
    _require_same_backend(a, b)
    if a.is_exact_zero or b.is_exact_zero:
        return zero(a.backend)
    if a.zero or b.zero:
        bounds = []
        for x, y in ((a, b), (b, a)):
            if x.zero:
                assert x.zero_bound is not None
                bounds.append(x.zero_bound + (0 if y.zero else y.valuation))
        return zero(a.backend, min(bounds))
    n = min(len(a.digits), len(b.digits))
    v = a.valuation + b.valuation
    p = a.backend.p
    if a.backend.kind == QP:
        u = (_int_of_digits(a.digits, p) * _int_of_digits(b.digits, p)) % (p**n)
        return PadicNumber(a.backend, v, _digits_of_int(u, p, n))
    return PadicNumber(a.backend, v, _laurent_mul_units(a.digits, b.digits, p, n))


def invert(a: PadicNumber) -> PadicNumber:
    """Multiplicative inverse at the same relative precision."""
    if a.zero:
        raise DivisionByZeroAtPrecision(
            "cannot invert a value with no certified digit"
            + ("" if a.zero_bound is None else f" (|x| <= p^-{a.zero_bound})")
        )
    p = a.backend.p
    n = len(a.digits)
    if a.backend.kind == QP:
        u = pow(_int_of_digits(a.digits, p), -1, p**n)
        return PadicNumber(a.backend, -a.valuation, _digits_of_int(u, p, n))
    inv0 = pow(a.digits[0], -1, p)
    w = [inv0] + [0] * (n - 1)
    for k in range(1, n):
        s = sum(a.digits[i] * w[k - i] for i in range(1, k + 1))
        w[k] = (-inv0 * s) % p
    return PadicNumber(a.backend, -a.valuation, tuple(w))


def div(a: PadicNumber, b: PadicNumber) -> PadicNumber:
    return mul(a, invert(b))


def arith(op: str, a: PadicNumber, b: PadicNumber) -> PadicNumber:
    """Dispatch by name; the CLI entry point for binary field operations."""
    try:
        fn = {"add": add, "sub": sub, "mul": mul, "div": div}[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    return fn(a, b)


def shift(a: PadicNumber, k: int) -> PadicNumber:
    """Multiply by uniformizer^k exactly (no precision cost)."""
    if a.zero:
        return a if a.zero_bound is None else zero(a.backend, a.zero_bound + k)
    return PadicNumber(a.backend, a.valuation + k, a.digits)


def pow_int(a: PadicNumber, k: int) -> PadicNumber:
    """a^k for integer k (negative k inverts first)."""
    if k < 0:
        return pow_int(invert(a), -k)
    acc = one(a.backend, max(1, a.precision))
    base = a
    while k:
        if k & 1:
            acc = mul(acc, base)
        base = mul(base, base)
        k >>= 1
    return acc


# ---------------------------------------------------------------------------
# comparisons and queries


def norm_exp(a: PadicNumber) -> NormExp:
    """Exact norm as a value-group exponent; 0 for anything zero-certified."""
    return a.norm()


def agrees(a: PadicNumber, b: PadicNumber) -> bool:
    """True when a and b coincide through their shared certified window."""
    return sub(a, b).zero


def is_certified_nonzero(a: PadicNumber) -> bool:
    return not a.zero


def norm_le_exp(a: PadicNumber, e: int) -> bool:
    """Certified test |a| <= p^e.

    Raises PrecisionExhausted when a is zero-at-precision with a bound too
    weak to decide.
    """
    if a.zero:
        if a.zero_bound is None or -a.zero_bound <= e:
            return True
        raise PrecisionExhausted(
            f"|x| <= p^-{a.zero_bound} cannot be compared against p^{e}",
            bound=a.zero_bound,
        )
    return -a.valuation <= e


def norm_gt_exp(a: PadicNumber, e: int) -> bool:
    return not norm_le_exp(a, e)


def truncate_abs(a: PadicNumber, cut: int) -> PadicNumber:
    """The digits of a strictly below absolute position ``cut``, exactly.

    The input must be certified through ``cut``; the result keeps the input's
    digit-window length so later arithmetic stays inside certified territory.
    """
    m = a.abs_precision
    if m is not None and m < cut:
        raise PrecisionExhausted(f"value certified only mod p^{m}, need {cut}", bound=m)
    if a.zero or a.valuation >= cut:
        return zero(a.backend)
    kept = a.digits[: cut - a.valuation]
    return from_digits(a.backend, a.valuation, kept, precision=len(a.digits))


class NormSup:
    """Collects exact norms and mere upper bounds, certifying the final sup.

    Zero-at-precision inputs only contribute an upper bound; the sup is
    certified when some exact norm dominates every bound.
    """

    def __init__(self):
        self.exact: NormExp = NORM_ZERO
        self.upper: NormExp = NORM_ZERO

    def feed(self, x: PadicNumber):
        if x.zero:
            if x.zero_bound is not None:
                self.upper = max(self.upper, NormExp(-x.zero_bound))
        else:
            self.exact = max(self.exact, x.norm())

    def feed_exact(self, n: NormExp):
        self.exact = max(self.exact, n)

    def feed_upper(self, n: NormExp):
        self.upper = max(self.upper, n)

    def result(self) -> NormExp:
        if self.upper <= self.exact:
            return self.exact
        raise PrecisionExhausted(
            f"sup certified only between p^{self.exact.exp} and p^{self.upper.exp}"
        )


# ---------------------------------------------------------------------------
# serialization

SCHEMA_BACKENDS = {QP: QP, FP_LAURENT: FP_LAURENT}


def to_json(a: PadicNumber) -> dict:
    return {
        "backend": a.backend.kind,
        "p": a.backend.p,
        "valuation": a.valuation if not a.zero else 0,
        "digits": list(a.digits),
        "precision": (a.zero_bound if a.zero else len(a.digits)),
        "zero": a.zero,
    }


def from_json(obj: dict, backend: FieldBackend | None = None) -> PadicNumber:
    kind = obj.get("backend", QP)
    if kind not in SCHEMA_BACKENDS:
        raise ValueError(f"unknown backend {kind!r}")
    be = FieldBackend(kind, int(obj["p"]))
    if backend is not None and be != backend:
        raise ValueError(f"backend mismatch: {be.label} vs {backend.label}")
    if obj.get("zero"):
        bound = obj.get("precision")
        return zero(be, None if bound in (None, 0) else int(bound))
    return PadicNumber(be, int(obj["valuation"]), tuple(int(d) for d in obj["digits"]))
