"""Invertible upper-triangular pairs and their truncated-type flow group.

An element is a pair (a, c) with a != 0, multiplying like the matrix
[[a, c], [0, 1/a]].  At residue level n the truncated type of such a pair
is determined by the power-residue class of `a` alone: the additive
coordinate ranges over a connected group and carries no level-n data.

The distinguished family of types is witnessed by pairs whose diagonal
part sits near 0 and whose off-diagonal part sits near infinity, the
infinite coordinate realized on a strictly higher ladder rung so that it
dominates every scale derivable from the diagonal one.  The `star`
product realizes the left factor low on the ladder and the right factor
on rungs separated from everything the left factor can reach, multiplies
the concrete pairs, and classifies the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .padic import PadicMatrix2, RationalLike, _coerce_fraction
from .residues import ResidueClass, build_group, class_of
from .types1 import ScaleLadder, TruncType1, realize

DEFAULT_LADDER = ScaleLadder.build(gap=8, window_w=2, length=4)


@dataclass(frozen=True)
class BorelElem:
    """Pair (a, c), a != 0, with the upper-triangular product law."""

    a: Fraction
    c: Fraction

    def __post_init__(self) -> None:
        if self.a == 0:
            raise ValueError("diagonal part must be invertible")

    @classmethod
    def of(cls, a: RationalLike, c: RationalLike) -> "BorelElem":
        return cls(_coerce_fraction(a), _coerce_fraction(c))

    def _rows(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        return ((self.a, self.c), (Fraction(0), 1 / self.a))

    def mul(self, other: "BorelElem") -> "BorelElem":
        pair = BorelElem(self.a * other.a, self.a * other.c + self.c / other.a)
        # self-test: the closed pair law must match generic 2x2 multiplication
        left, right = self._rows(), other._rows()
        product = tuple(
            tuple(sum(left[i][k] * right[k][j] for k in range(2)) for j in range(2))
            for i in range(2)
        )
        if pair._rows() != product:
            raise ArithmeticError("pair law diverged from the matrix law")
        return pair

    def inverse(self) -> "BorelElem":
        return BorelElem(1 / self.a, -self.c)

    def to_matrix(self, p: int) -> PadicMatrix2:
        return PadicMatrix2.of(self._rows(), p)


@dataclass(frozen=True)
class BorelTruncType:
    """Truncated type of a pair, keyed by the class of the diagonal part."""

    a_class: ResidueClass
    structure_tag: str = "minimal-flow-family"
    witness_recipe: str = "at-infinity-rung-above-near-rung"

    @classmethod
    def identity(cls, level_n: int, p: int) -> "BorelTruncType":
        return cls(class_of(1, level_n, p))

    def __str__(self) -> str:
        return f"BorelType({self.a_class.representative})"


def witness(t: BorelTruncType, ladder: ScaleLadder, rung_index: int = 0) -> BorelElem:
    """Concrete pair realizing t: diagonal part near 0 in t's class at the
    given rung, off-diagonal part at infinity in the same class one rung up.

    The off-diagonal coordinate takes the higher rung: downstream
    factorizations divide scales derived from the diagonal part by it and
    need the quotient to stay small.
    """
    if rung_index + 1 >= len(ladder.rungs):
        raise ValueError("ladder exhausted: a witness needs two free rungs")
    alpha = realize(TruncType1.near(0, t.a_class), rung_index, ladder)
    beta = realize(TruncType1.at_infinity(t.a_class), rung_index + 1, ladder)
    return BorelElem(alpha, beta)


def classify(g: BorelElem, level_n: int, p: int) -> BorelTruncType:
    return BorelTruncType(class_of(g.a, level_n, p))


def star(s: BorelTruncType, t: BorelTruncType, ladder: ScaleLadder) -> BorelTruncType:
    """Product of truncated types via witnesses, right factor on the rungs
    above everything derivable from the left factor's block."""
    key = (s.a_class.prime, s.a_class.level_n)
    if key != (t.a_class.prime, t.a_class.level_n):
        raise ValueError("mixed residue levels")
    left = witness(s, ladder, 0)
    right = witness(t, ladder, 2)
    return classify(left.mul(right), s.a_class.level_n, s.a_class.prime)


def left_translate(g: BorelElem, t: BorelTruncType) -> BorelTruncType:
    """Translating by g multiplies the class by class_of(g.a); nth-power
    diagonal parts fix every type."""
    return BorelTruncType(class_of(g.a, t.a_class.level_n, t.a_class.prime) * t.a_class)


class FlowGroup:
    """All truncated types at one level under `star`, fully tabulated.

    Built exhaustively through witness realization; construction verifies
    the group axioms on the resulting table and its identification with
    the residue-class group via the diagonal class.
    """

    def __init__(self, p: int, n: int, ladder: ScaleLadder):
        self.prime = p
        self.level_n = n
        self.ladder = ladder
        self.residue_group = build_group(p, n)
        self.elements = tuple(BorelTruncType(c) for c in self.residue_group.elements)
        self.identity = BorelTruncType(self.residue_group.identity)
        self._by_rep = {t.a_class.representative: t for t in self.elements}
        self.table: dict[tuple[int, int], int] = {}
        for s in self.elements:
            for t in self.elements:
                result = star(s, t, ladder)
                key = (s.a_class.representative, t.a_class.representative)
                self.table[key] = result.a_class.representative
        self._verify()

    @property
    def order(self) -> int:
        return len(self.elements)

    def star_of(self, s: BorelTruncType, t: BorelTruncType) -> BorelTruncType:
        rep = self.table[(s.a_class.representative, t.a_class.representative)]
        return self._by_rep[rep]

    def idempotent_check(self) -> bool:
        one = self.identity.a_class.representative
        return self.table[(one, one)] == one

    def isomorphic_to_residue_group(self) -> bool:
        return self.table == self.residue_group.table

    def _verify(self) -> None:
        reps = set(self._by_rep)
        one = self.identity.a_class.representative
        for key, val in self.table.items():
            assert val in reps, f"product {key} left the element set"
        for r in reps:
            assert self.table[(one, r)] == r
            assert self.table[(r, one)] == r
            assert one in {self.table[(r, other)] for other in reps}
        for r in reps:
            for s in reps:
                rs = self.table[(r, s)]
                for t in reps:
                    st = self.table[(s, t)]
                    assert self.table[(rs, t)] == self.table[(r, st)]
        assert self.idempotent_check()
        assert self.isomorphic_to_residue_group()

    def to_json(self) -> dict:
        reps = [t.a_class.representative for t in self.elements]
        return {
            "order": self.order,
            "representatives": [str(r) for r in reps],
            "table": [[str(self.table[(r, s)]) for s in reps] for r in reps],
            "idempotent_check": self.idempotent_check(),
            "iso_to_residue_group": self.isomorphic_to_residue_group(),
        }


@lru_cache(maxsize=None)
def build_flow_group(p: int, n: int, ladder: ScaleLadder | None = None) -> FlowGroup:
    return FlowGroup(p, n, ladder if ladder is not None else DEFAULT_LADDER)
