"""Symbolic truncated 1-types over Q_p with a realization oracle.

A nonrealized type at residue level n either sits infinitesimally close
to a base point in a fixed residue class, or lives at infinity in a
fixed class.  Realization produces a concrete rational witness whose
distance scale is drawn from a ladder of valuation magnitudes; the
ladder's separation law (each rung at least gap times the previous rung
plus the window) is what stands in for "realize the next point much
closer / much farther than everything so far".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from padyn.config import GlobalConfig
from padyn.padic import (
    INFINITY,
    RationalLike,
    _coerce_fraction,
    format_rational,
    fraction_valuation,
)
from padyn.residues import ResidueClass, build_group, class_of

REALIZED = "realized"
NEAR = "near"
AT_INFINITY = "at_infinity"


class WindowTooCoarseError(ValueError):
    """Two base points both claim a point; the window cannot separate them."""


@dataclass(frozen=True)
class ScaleLadder:
    """Strictly increasing valuation magnitudes with multiplicative gaps.

    rungs[i] >= gap * (rungs[i-1] + window_w), and the first rung clears
    the window, so a witness at any rung is invisible to classification
    at every lower rung.
    """

    rungs: tuple[int, ...]
    gap: int
    window_w: int

    def __post_init__(self) -> None:
        if len(self.rungs) < 2:
            raise ValueError("a ladder needs at least two rungs")
        if self.gap < 1 or self.window_w < 1:
            raise ValueError("gap and window must be positive")
        if self.rungs[0] <= self.window_w:
            raise ValueError("first rung must clear the window")
        for lo, hi in zip(self.rungs, self.rungs[1:]):
            if hi < self.gap * (lo + self.window_w):
                raise ValueError(f"rung {hi} too close to {lo} at gap {self.gap}")

    @classmethod
    def build(cls, gap: int, window_w: int, length: int = 6, base: int | None = None) -> "ScaleLadder":
        # base rung is gap-independent so doubled-gap reruns share it
        rung = base if base is not None else window_w + 8
        rungs = [rung]
        for _ in range(length - 1):
            rung = gap * (rung + window_w)
            rungs.append(rung)
        return cls(tuple(rungs), gap, window_w)

    @classmethod
    def from_config(cls, config: GlobalConfig, length: int = 6) -> "ScaleLadder":
        return cls.build(config.ladder_gap, config.valuation_window_w, length)

    def doubled_gap(self) -> "ScaleLadder":
        return ScaleLadder.build(2 * self.gap, self.window_w, len(self.rungs), self.rungs[0])

    def magnitude(self, rung_index: int) -> int:
        return self.rungs[rung_index]


@dataclass(frozen=True)
class TruncType1:
    """Realized(a) | Near(a, C) | AtInfinity(C), structural equality."""

    kind: str
    base: Fraction | None
    klass: ResidueClass | None

    @classmethod
    def realized(cls, a: RationalLike) -> "TruncType1":
        return cls(REALIZED, _coerce_fraction(a), None)

    @classmethod
    def near(cls, a: RationalLike, klass: ResidueClass) -> "TruncType1":
        return cls(NEAR, _coerce_fraction(a), klass)

    @classmethod
    def at_infinity(cls, klass: ResidueClass) -> "TruncType1":
        return cls(AT_INFINITY, None, klass)

    def is_realized(self) -> bool:
        return self.kind == REALIZED

    def base_points(self) -> tuple[Fraction, ...]:
        return () if self.base is None else (self.base,)

    def to_json(self) -> dict:
        if self.kind == REALIZED:
            return {"kind": REALIZED, "value": format_rational(self.base)}
        if self.kind == NEAR:
            return {
                "kind": NEAR,
                "base": format_rational(self.base),
                "class": str(self.klass.representative),
                "n": self.klass.level_n,
            }
        return {
            "kind": AT_INFINITY,
            "class": str(self.klass.representative),
            "n": self.klass.level_n,
        }

    def __str__(self) -> str:
        if self.kind == REALIZED:
            return f"Realized({format_rational(self.base)})"
        if self.kind == NEAR:
            return f"Near({format_rational(self.base)}, {self.klass.representative})"
        return f"AtInfinity({self.klass.representative})"

    def sort_key(self) -> tuple:
        base = self.base if self.base is not None else Fraction(0)
        rep = self.klass.representative if self.klass is not None else 0
        return (self.kind, base, rep)


def _witness_scale(klass: ResidueClass, magnitude: int, toward_infinity: bool) -> Fraction:
    """rep(C) * p**(+-nk), the least level-multiple putting the witness
    at distance at least `magnitude` on the requested side."""
    n = klass.level_n
    p = klass.prime
    rep_val = fraction_valuation(Fraction(klass.representative), p)
    if toward_infinity:
        nk = n * -(-(magnitude + rep_val) // n)
        return Fraction(klass.representative) * Fraction(p) ** (-nk)
    nk = n * -(-magnitude // n)
    return Fraction(klass.representative) * Fraction(p) ** nk


def realize(t: TruncType1, rung_index: int, ladder: ScaleLadder) -> Fraction:
    """Concrete rational witness of t at the given ladder rung."""
    if t.kind == REALIZED:
        return t.base
    magnitude = ladder.magnitude(rung_index)
    if t.kind == NEAR:
        return t.base + _witness_scale(t.klass, magnitude, toward_infinity=False)
    return _witness_scale(t.klass, magnitude, toward_infinity=True)


def classify(
    x: RationalLike,
    base_points,
    window_w: int,
    level_n: int,
    p: int,
) -> TruncType1:
    """Sort a concrete rational into the truncated type catalogue.

    Exact hits are realized; valuation below -window_w is at infinity;
    a unique base point closer than the window gives a near type.  Two
    base points inside the window mean the base set was not separated.
    """
    value = _coerce_fraction(x)
    bases = [_coerce_fraction(a) for a in base_points]
    if value in bases:
        return TruncType1.realized(value)
    v = fraction_valuation(value, p)
    if v is not INFINITY and v < -window_w:
        return TruncType1.at_infinity(class_of(value, level_n, p))
    hits = [a for a in bases if fraction_valuation(value - a, p) > window_w]
    if len(hits) > 1:
        raise WindowTooCoarseError(f"window {window_w} cannot separate {hits}")
    if hits:
        return TruncType1.near(hits[0], class_of(value - hits[0], level_n, p))
    return TruncType1.realized(value)


def roundtrip_check(t: TruncType1, ladder: ScaleLadder, level_n: int, p: int) -> bool:
    """classify(realize(t)) == t at every rung above the first."""
    for rung_index in range(1, len(ladder.rungs)):
        witness = realize(t, rung_index, ladder)
        back = classify(witness, t.base_points(), ladder.window_w, level_n, p)
        if back != t:
            return False
    return True


def enumerate_types(base_points, level_n: int, p: int) -> list[TruncType1]:
    """The full nonrealized catalogue over a base set: (|bases|+1)*|group|."""
    group = build_group(p, level_n)
    out = [
        TruncType1.near(_coerce_fraction(a), c)
        for a in base_points
        for c in group.elements
    ]
    out.extend(TruncType1.at_infinity(c) for c in group.elements)
    return out
