"""Exact p-adic valuations on rationals and unimodular 2x2 matrices.

All arithmetic is exact: values are `fractions.Fraction`, valuations are
Python integers, and the valuation of zero is a distinguished infinity
object that compares above every integer.  No floating point is used
anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class _ValuationInfinity:
    """Singleton valuation of zero; greater than every integer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __eq__(self, other) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash("padyn-valuation-infinity")

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return other is self

    def __gt__(self, other) -> bool:
        return other is not self

    def __ge__(self, other) -> bool:
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __neg__(self):
        raise ArithmeticError("cannot negate the infinite valuation")


INFINITY = _ValuationInfinity()

Valuation = Union[int, _ValuationInfinity]

RationalLike = Union[int, Fraction, "PadicNumber"]


_POWER_LADDERS: dict[int, list[int]] = {}


def int_valuation(num: int, p: int) -> tuple[int, int]:
    """Return (v, u) with num = u * p**v and p not dividing u.

    Uses repeated squaring of the divisor so very large powers of p are
    stripped in O(log v) big divisions rather than v of them; the
    [p, p**2, p**4, ...] ladder is cached per prime because witness
    realizations hit the same prime with huge exponents over and over.
    """
    if num == 0:
        raise ValueError("valuation of zero is infinite; handle separately")
    if num % p:
        return 0, num
    powers = _POWER_LADDERS.setdefault(p, [p])
    # grow the ladder until its top square no longer divides, so the
    # remaining exponent is below twice the top entry; the cheap
    # top-divides guard keeps small inputs from ever squaring the top
    while num % powers[-1] == 0 and num % (powers[-1] * powers[-1]) == 0:
        powers.append(powers[-1] * powers[-1])
    # binary descent: strip each power at most once, top down
    v = 0
    for k in range(len(powers) - 1, -1, -1):
        if num % powers[k] == 0:
            num //= powers[k]
            v += 1 << k
    return v, num


def _coerce_fraction(x: RationalLike) -> Fraction:
    if isinstance(x, PadicNumber):
        return x.value
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected a rational value, got {type(x).__name__}")


def fraction_valuation(x: Fraction, p: int) -> Valuation:
    """p-adic valuation of an exact rational; INFINITY for zero."""
    if x == 0:
        return INFINITY
    vn, _ = int_valuation(x.numerator, p)
    if vn > 0:
        return vn
    vd, _ = int_valuation(x.denominator, p)
    return -vd


def fraction_unit_part(x: Fraction, p: int) -> Fraction:
    """The unit u with x = u * p**v(x); requires x != 0."""
    if x == 0:
        raise ZeroDivisionError("zero has no unit part")
    vn, un = int_valuation(x.numerator, p)
    vd, ud = int_valuation(x.denominator, p)
    return Fraction(un, ud)


def unit_residue(x: Fraction, p: int, modulus: int) -> int:
    """unit_part(x) reduced modulo `modulus` (a power of p); x != 0.

    Computed modularly so huge scale factors p**(+-k) never have to be
    expanded: only the prime-to-p parts of numerator and denominator
    enter, via a modular inverse.
    """
    if x == 0:
        raise ZeroDivisionError("zero has no unit residue")
    _, un = int_valuation(x.numerator, p)
    _, ud = int_valuation(x.denominator, p)
    return (un % modulus) * pow(ud, -1, modulus) % modulus


def parse_rational(text: str) -> Fraction:
    """Parse 'num' or 'num/den' decimal strings into an exact rational."""
    body = text.strip()
    if "/" in body:
        num_s, den_s = body.split("/", 1)
        return Fraction(int(num_s), int(den_s))
    return Fraction(int(body))


def format_rational(x: Fraction) -> str:
    """Render an exact rational as 'num' or 'num/den' (bit-exact roundtrip)."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class PadicNumber:
    """An exact rational viewed as an element of Q_p.

    The value is a plain Fraction; the prime fixes which valuation the
    convenience methods use.  Equality is exact equality of rationals
    with matching primes.
    """

    value: Fraction
    prime: int

    @classmethod
    def of(cls, x: RationalLike, p: int) -> "PadicNumber":
        return cls(_coerce_fraction(x), p)

    @classmethod
    def parse(cls, text: str, p: int) -> "PadicNumber":
        return cls(parse_rational(text), p)

    def __str__(self) -> str:
        return format_rational(self.value)

    def is_zero(self) -> bool:
        return self.value == 0

    def valuation(self) -> Valuation:
        return fraction_valuation(self.value, self.prime)

    def unit_part(self) -> "PadicNumber":
        return PadicNumber(fraction_unit_part(self.value, self.prime), self.prime)

    def _check_prime(self, other: "PadicNumber") -> None:
        if self.prime != other.prime:
            raise ValueError("mixed primes in p-adic arithmetic")

    def __add__(self, other: "PadicNumber") -> "PadicNumber":
        self._check_prime(other)
        return PadicNumber(self.value + other.value, self.prime)

    def __sub__(self, other: "PadicNumber") -> "PadicNumber":
        self._check_prime(other)
        return PadicNumber(self.value - other.value, self.prime)

    def __mul__(self, other: "PadicNumber") -> "PadicNumber":
        self._check_prime(other)
        return PadicNumber(self.value * other.value, self.prime)

    def __truediv__(self, other: "PadicNumber") -> "PadicNumber":
        self._check_prime(other)
        return PadicNumber(self.value / other.value, self.prime)

    def __neg__(self) -> "PadicNumber":
        return PadicNumber(-self.value, self.prime)


def valuation(x: RationalLike, p: int | None = None) -> Valuation:
    """Module-level valuation; prime comes from the value or the argument."""
    if isinstance(x, PadicNumber):
        return x.valuation()
    if p is None:
        raise ValueError("prime required for bare rational values")
    return fraction_valuation(_coerce_fraction(x), p)


def unit_part(x: RationalLike, p: int | None = None) -> Fraction:
    if isinstance(x, PadicNumber):
        return x.unit_part().value
    if p is None:
        raise ValueError("prime required for bare rational values")
    return fraction_unit_part(_coerce_fraction(x), p)


class SingularMatrixError(ValueError):
    """Raised when a matrix that must be invertible has determinant zero."""


@dataclass(frozen=True)
class PadicMatrix2:
    """Exact 2x2 rational matrix with p-adic helper predicates."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    prime: int

    @classmethod
    def of(cls, rows, p: int) -> "PadicMatrix2":
        (a, b), (c, d) = rows
        return cls(
            _coerce_fraction(a),
            _coerce_fraction(b),
            _coerce_fraction(c),
            _coerce_fraction(d),
            p,
        )

    @classmethod
    def identity(cls, p: int) -> "PadicMatrix2":
        one, zero = Fraction(1), Fraction(0)
        return cls(one, zero, zero, one, p)

    @classmethod
    def parse_json(cls, payload, p: int) -> "PadicMatrix2":
        """Accept row-major [[a,b],[c,d]] or flat [a,b,c,d] string arrays."""
        if len(payload) == 2:
            flat = [payload[0][0], payload[0][1], payload[1][0], payload[1][1]]
        elif len(payload) == 4:
            flat = list(payload)
        else:
            raise ValueError("matrix JSON must be 2x2 nested or flat length 4")
        vals = [parse_rational(str(s)) for s in flat]
        return cls(vals[0], vals[1], vals[2], vals[3], p)

    def to_json(self) -> list[list[str]]:
        return [
            [format_rational(self.a), format_rational(self.b)],
            [format_rational(self.c), format_rational(self.d)],
        ]

    def rows(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        return ((self.a, self.b), (self.c, self.d))

    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "PadicMatrix2") -> "PadicMatrix2":
        if self.prime != other.prime:
            raise ValueError("mixed primes in matrix arithmetic")
        return PadicMatrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            self.prime,
        )

    def inverse(self) -> "PadicMatrix2":
        det = self.det()
        if det == 0:
            raise SingularMatrixError("matrix has determinant zero")
        return PadicMatrix2(self.d / det, -self.b / det, -self.c / det, self.a / det, self.prime)

    def entries(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def is_integral(self) -> bool:
        """All entries lie in Z_p (no p in any denominator)."""
        p = self.prime
        return all(e == 0 or fraction_valuation(e, p) >= 0 for e in self.entries())

    def is_unimodular_integral(self) -> bool:
        return self.is_integral() and self.det() == 1

    def is_upper_triangular(self) -> bool:
        return self.c == 0

    def congruent_to_identity(self, k: int) -> bool:
        """Entrywise valuation of (self - I) is at least k."""
        p = self.prime
        diffs = (self.a - 1, self.b, self.c, self.d - 1)
        return all(e == 0 or fraction_valuation(e, p) >= k for e in diffs)

    def max_entry_valuation_magnitude(self) -> int:
        """max |v(entry)| over nonzero entries; 0 for the zero matrix."""
        p = self.prime
        mags = [abs(fraction_valuation(e, p)) for e in self.entries() if e != 0]
        return max(mags, default=0)
