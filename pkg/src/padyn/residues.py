"""Finite power-residue class groups K*/(K*)^n over Q_p, exactly.

An nth-power test for units reduces to a residue test at the modulus
p**(2*v_p(n) + 1): if a unit is an nth power to that precision it lifts
to an exact nth power (strong Hensel bound for y**n - u, whose derivative
has valuation v_p(n) at units).  Everything else is built from that test:
canonical class representatives, the full multiplication table, and the
induced valuation map.  Group orders are discovered by enumeration and
merging, never taken from a closed formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from padyn.padic import (
    INFINITY,
    PadicNumber,
    RationalLike,
    _coerce_fraction,
    fraction_valuation,
    int_valuation,
    unit_residue,
)


def hensel_modulus(p: int, n: int) -> int:
    """Modulus p**(2*v_p(n)+1) at which unit nth powers are decided."""
    e, _ = int_valuation(n, p) if n % p == 0 else (0, n)
    return p ** (2 * e + 1)


@lru_cache(maxsize=None)
def _unit_power_residues(p: int, n: int, modulus: int) -> frozenset[int]:
    """All residues a**n mod `modulus` for units a; exhaustive enumeration."""
    out = set()
    for a in range(1, modulus):
        if a % p == 0:
            continue
        out.add(pow(a, n, modulus))
    return frozenset(out)


def is_nth_power(x: RationalLike, n: int, p: int | None = None) -> bool:
    """Exact membership test x in (Q_p*)^n for a nonzero rational x.

    True iff n divides v(x) and the unit part of x is an nth-power
    residue at the Hensel modulus.
    """
    if isinstance(x, PadicNumber):
        p = x.prime
    if p is None:
        raise ValueError("prime required")
    if n < 1:
        raise ValueError("power level must be >= 1")
    value = _coerce_fraction(x)
    if value == 0:
        raise ValueError("zero is not in the multiplicative group")
    v = fraction_valuation(value, p)
    if v % n != 0:
        return False
    modulus = hensel_modulus(p, n)
    return unit_residue(value, p, modulus) in _unit_power_residues(p, n, modulus)


@dataclass(frozen=True)
class ResidueClass:
    """A power-residue class, keyed by its canonical representative.

    The canonical representative is the smallest positive integer of the
    form u * p**e with 0 <= e < n, u the smallest positive integer unit
    in the class of the unit part.
    """

    prime: int
    level_n: int
    representative: int

    def __mul__(self, other: "ResidueClass") -> "ResidueClass":
        if (self.prime, self.level_n) != (other.prime, other.level_n):
            raise ValueError("mixed residue levels")
        return class_of(
            Fraction(self.representative * other.representative),
            self.level_n,
            self.prime,
        )

    def inverse(self) -> "ResidueClass":
        return class_of(Fraction(1, self.representative), self.level_n, self.prime)

    def is_identity(self) -> bool:
        return self.representative == 1

    def contains(self, x: RationalLike) -> bool:
        value = _coerce_fraction(x)
        return is_nth_power(value / self.representative, self.level_n, self.prime)

    def __str__(self) -> str:
        return str(self.representative)


@lru_cache(maxsize=None)
def _canonical_unit_rep(p: int, n: int, residue: int) -> int:
    """Smallest positive integer unit whose class matches `residue`.

    `residue` is a unit residue at the Hensel modulus; w matches iff
    w/residue is an nth power there.
    """
    modulus = hensel_modulus(p, n)
    powers = _unit_power_residues(p, n, modulus)
    inv = pow(residue, -1, modulus)
    for w in range(1, modulus + 1):
        if w % p == 0:
            continue
        if (w * inv) % modulus in powers:
            return w
    raise AssertionError("unit residue search exhausted; unreachable")


def class_of(x: RationalLike, n: int, p: int | None = None) -> ResidueClass:
    """Canonical power-residue class of a nonzero rational."""
    if isinstance(x, PadicNumber):
        p = x.prime
    if p is None:
        raise ValueError("prime required")
    value = _coerce_fraction(x)
    if value == 0:
        raise ValueError("zero has no residue class")
    v = fraction_valuation(value, p)
    e = v % n
    modulus = hensel_modulus(p, n)
    u = _canonical_unit_rep(p, n, unit_residue(value, p, modulus))
    return ResidueClass(p, n, u * p**e)


class ResidueGroup:
    """The finite group K*/(K*)^n with a fully tabulated product.

    The element list and table are built by enumeration; the group
    axioms are verified exhaustively at construction time.
    """

    def __init__(self, p: int, n: int, elements: list[ResidueClass]):
        self.prime = p
        self.level_n = n
        self.elements = sorted(elements, key=lambda c: c.representative)
        self.identity = class_of(1, n, p)
        reps = [c.representative for c in self.elements]
        self._index = {r: i for i, r in enumerate(reps)}
        self.table: dict[tuple[int, int], int] = {}
        for s in self.elements:
            for t in self.elements:
                self.table[(s.representative, t.representative)] = (s * t).representative
        self._verify_axioms()

    @property
    def order(self) -> int:
        return len(self.elements)

    def by_rep(self, rep: int) -> ResidueClass:
        if rep not in self._index:
            raise KeyError(f"{rep} is not a canonical representative at this level")
        return self.elements[self._index[rep]]

    def mul(self, s: ResidueClass, t: ResidueClass) -> ResidueClass:
        return self.by_rep(self.table[(s.representative, t.representative)])

    def inverse(self, s: ResidueClass) -> ResidueClass:
        return self.by_rep(s.inverse().representative)

    def _verify_axioms(self) -> None:
        elems = self.elements
        reps = set(self._index)
        # closure and well-defined table
        for key, val in self.table.items():
            assert val in reps, f"product {key} left the element set"
        # identity
        for s in elems:
            assert self.table[(1, s.representative)] == s.representative
            assert self.table[(s.representative, 1)] == s.representative
        # inverses
        for s in elems:
            inv = s.inverse().representative
            assert inv in reps
            assert self.table[(s.representative, inv)] == 1
        # associativity, exhaustive
        for s in elems:
            for t in elems:
                st = self.table[(s.representative, t.representative)]
                for u in elems:
                    tu = self.table[(t.representative, u.representative)]
                    lhs = self.table[(st, u.representative)]
                    rhs = self.table[(s.representative, tu)]
                    assert lhs == rhs, "associativity failed"

    def to_json(self) -> dict:
        reps = [str(c.representative) for c in self.elements]
        table = [
            [str(self.table[(s.representative, t.representative)]) for t in self.elements]
            for s in self.elements
        ]
        vmap = induced_valuation_map(self)
        return {
            "order": self.order,
            "representatives": reps,
            "table": table,
            "v_map": {str(k): v for k, v in vmap.mapping.items()},
            "v_map_injective": vmap.injective,
        }


@lru_cache(maxsize=None)
def build_group(p: int, n: int, max_level: int = 12) -> ResidueGroup:
    """Enumerate the classes of K*/(K*)^n and tabulate the product.

    Candidates u * p**e with u ranging over unit residues and e over
    [0, n) cover every class; duplicates collapse through the canonical
    representative.  The resulting order is cross-checked against an
    independent merge of a concrete value set in `brute_force_order`.
    """
    if n < 1 or n > max_level:
        raise ValueError(f"residue level must be in [1, {max_level}]")
    modulus = hensel_modulus(p, n)
    seen: dict[int, ResidueClass] = {}
    for e in range(n):
        for u in range(1, modulus):
            if u % p == 0:
                continue
            c = class_of(Fraction(u * p**e), n, p)
            seen[c.representative] = c
    return ResidueGroup(p, n, list(seen.values()))


def brute_force_order(p: int, n: int) -> int:
    """Order of K*/(K*)^n by merging concrete values with quotient tests.

    Takes a value set that meets every class (all u * p**e for unit
    residues u below the Hensel modulus and 0 <= e < n, plus small
    integers for good measure) and merges values whose quotient is an
    nth power.  No group structure is used: just the membership test.
    """
    modulus = hensel_modulus(p, n)
    values: list[Fraction] = []
    for e in range(n):
        for u in range(1, modulus):
            if u % p == 0:
                continue
            values.append(Fraction(u * p**e))
    values.extend(Fraction(k) for k in range(1, min(p**3, 200)) if k % p != 0)
    buckets: list[Fraction] = []
    for x in values:
        if not any(is_nth_power(x / b, n, p) for b in buckets):
            buckets.append(x)
    return len(buckets)


@dataclass(frozen=True)
class ValuationMapReport:
    """The map class -> v(representative) mod n, with kernel data."""

    mapping: dict  # representative -> valuation mod n
    kernel: tuple  # representatives with trivial image
    injective: bool


def induced_valuation_map(group: ResidueGroup) -> ValuationMapReport:
    """Compute the valuation-induced map onto Z/n and report its kernel.

    The map is a surjective homomorphism; whether it is injective is a
    computed fact of the level, not an assumption (at p = 5, n = 2 the
    kernel has a nontrivial unit class, so the map is 2-to-1).
    """
    n = group.level_n
    p = group.prime
    mapping = {}
    for c in group.elements:
        v = fraction_valuation(Fraction(c.representative), p)
        assert v is not INFINITY
        mapping[c.representative] = v % n
    kernel = tuple(sorted(r for r, img in mapping.items() if img == 0))
    injective = len(kernel) == 1
    return ValuationMapReport(mapping=mapping, kernel=kernel, injective=injective)
