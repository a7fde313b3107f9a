"""Truncated 1-types on the projective line under the det-1 action.

Points are canonical homogeneous pairs ([x : 1] or [1 : 0]); a truncated
type is either a realized point or the family infinitesimally near one,
with class data measured in the reciprocal chart beyond the integral
window so the family at infinity behaves like any other.

The action moves Near types symbolically: the class picks up the class
of the exact chart-to-chart derivative, which makes the action an exact
group action on exact-point types and O(1) per step.  `classify_value`
is the honest truncation of an exact value (window residue plus the
class of the deviation) and is total, since the deviation from a
value's own residue always has valuation at least the window.

Two product operators drive the collapse: `triangular_star` sends every
type not based at infinity into the infinity family (the diagonal/corner
mix of the triangular witness dominates), and `compact_star` sends the
whole infinity family to one distinguished type (the input's own witness
is congruent to the identity at the compact level, so it is absorbed).
Their composite is a constant map on all truncated types, which is both
the collapse check and the proximality witness of the flow report.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ._graph import strongly_connected_components
from .borel import BorelTruncType
from .borel import witness as borel_witness
from .padic import PadicMatrix2, _coerce_fraction, fraction_valuation
from .residues import ResidueClass, build_group, class_of
from .sl2 import GFlowPoint, KLevelElem, flow_generators
from .types1 import ScaleLadder, TruncType1, realize

DEFAULT_LADDER = ScaleLadder.build(gap=8, window_w=2, length=4)

_ID = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
_SWAP = ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))


@dataclass(frozen=True)
class ProjPoint:
    """Point of the projective line in canonical homogeneous form."""

    x0: Fraction
    x1: Fraction

    def __post_init__(self) -> None:
        if not (self.x1 == 1 or (self.x0 == 1 and self.x1 == 0)):
            raise ValueError("points must be canonical: [x : 1] or [1 : 0]")

    @classmethod
    def of(cls, x0, x1) -> "ProjPoint":
        x0, x1 = _coerce_fraction(x0), _coerce_fraction(x1)
        if x0 == 0 and x1 == 0:
            raise ValueError("[0 : 0] is not a projective point")
        if x1 == 0:
            return cls(Fraction(1), Fraction(0))
        return cls(x0 / x1, Fraction(1))

    @classmethod
    def infinity(cls) -> "ProjPoint":
        return cls(Fraction(1), Fraction(0))

    @property
    def is_infinity(self) -> bool:
        return self.x1 == 0

    def apply(self, g: PadicMatrix2) -> "ProjPoint":
        return ProjPoint.of(
            g.a * self.x0 + g.b * self.x1, g.c * self.x0 + g.d * self.x1
        )

    def __str__(self) -> str:
        return "inf" if self.is_infinity else str(self.x0)


@dataclass(frozen=True)
class ProjTruncType:
    """A realized point, or the family infinitesimally near one."""

    point: ProjPoint
    near_class: ResidueClass | None = None

    @classmethod
    def realized(cls, point: ProjPoint) -> "ProjTruncType":
        return cls(point)

    @classmethod
    def near(cls, point: ProjPoint, c: ResidueClass) -> "ProjTruncType":
        return cls(point, c)

    @property
    def is_realized(self) -> bool:
        return self.near_class is None

    def __str__(self) -> str:
        if self.is_realized:
            return f"Realized({self.point})"
        return f"Near({self.point}, class {self.near_class.representative})"


@dataclass(frozen=True)
class ProjLevel:
    """Finite resolution of the line: class level n and window w."""

    prime: int
    level_n: int
    window_w: int

    def __post_init__(self) -> None:
        if self.window_w < 1:
            raise ValueError("window must be at least 1")
        build_group(self.prime, self.level_n)

    @property
    def modulus(self) -> int:
        return self.prime**self.window_w

    def base_points(self) -> tuple[ProjPoint, ...]:
        """The residues of the integral projective line at resolution w:
        the window residues in the standard chart, then infinity and the
        points whose reciprocal is divisible by p."""
        std = [ProjPoint.of(a, 1) for a in range(self.modulus)]
        inverted = [ProjPoint.infinity()]
        inverted += [
            ProjPoint.of(1, self.prime * b)
            for b in range(1, self.modulus // self.prime)
        ]
        return tuple(std + inverted)

    def classes(self) -> tuple[ResidueClass, ...]:
        return build_group(self.prime, self.level_n).elements


def _inverted_chart(pt: ProjPoint, p: int) -> bool:
    return pt.is_infinity or fraction_valuation(pt.x0, p) < 0


def _chart_coordinate(pt: ProjPoint, p: int) -> Fraction:
    if pt.is_infinity:
        return Fraction(0)
    return 1 / pt.x0 if _inverted_chart(pt, p) else pt.x0


def _residue(x: Fraction, mod: int) -> int:
    return x.numerator * pow(x.denominator, -1, mod) % mod


def classify_value(x, level: ProjLevel) -> ProjTruncType:
    """The truncated type of an exact value: its window residue plus the
    class of the deviation, realized when the deviation vanishes."""
    x = _coerce_fraction(x)
    p = level.prime
    if x != 0 and fraction_valuation(x, p) < 0:
        y = 1 / x
        r = _residue(y, level.modulus)
        pt = ProjPoint.infinity() if r == 0 else ProjPoint.of(1, r)
        dev = y - r
    else:
        r = _residue(x, level.modulus)
        pt = ProjPoint.of(r, 1)
        dev = x - r
    if dev == 0:
        return ProjTruncType.realized(pt)
    return ProjTruncType.near(pt, class_of(dev, level.level_n, p))


def _classify_vector(x0: Fraction, x1: Fraction, level: ProjLevel) -> ProjTruncType:
    if x1 == 0:
        return ProjTruncType.realized(ProjPoint.infinity())
    return classify_value(x0 / x1, level)


def _realize_type(
    t: ProjTruncType, level: ProjLevel, ladder: ScaleLadder, rung_index: int
) -> Fraction:
    """An exact value realizing the Near family at the given rung,
    produced in the base point's own chart."""
    if t.is_realized:
        raise ValueError("realized types need no witnesses")
    pt = t.point
    if _inverted_chart(pt, level.prime):
        y0 = Fraction(0) if pt.is_infinity else 1 / pt.x0
        return 1 / realize(TruncType1.near(y0, t.near_class), rung_index, ladder)
    return realize(TruncType1.near(pt.x0, t.near_class), rung_index, ladder)


def snap_type(t: ProjTruncType, level: ProjLevel, ladder: ScaleLadder) -> ProjTruncType:
    """Project a type onto the level's state space by realizing it at the
    deepest rung and classifying the value; realized finite points are
    reclassified directly."""
    if t.is_realized:
        if t.point.is_infinity:
            return t
        return classify_value(t.point.x0, level)
    return classify_value(
        _realize_type(t, level, ladder, len(ladder.rungs) - 1), level
    )


def _mat_mul(left, right):
    return tuple(
        tuple(sum(left[i][k] * right[k][j] for k in range(2)) for j in range(2))
        for i in range(2)
    )


def act_proj(g: PadicMatrix2, t: ProjTruncType) -> ProjTruncType:
    """Möbius action on truncated types.

    Near classes pick up the class of the exact chart-to-chart derivative
    at the base point; the chain rule is exact on rationals, so this is a
    genuine group action on exact-point types.
    """
    if g.det() != 1:
        raise ValueError("need determinant one")
    image = t.point.apply(g)
    if t.is_realized:
        return ProjTruncType.realized(image)
    p = g.prime
    chart_in = _SWAP if _inverted_chart(t.point, p) else _ID
    chart_out = _SWAP if _inverted_chart(image, p) else _ID
    e = _mat_mul(chart_out, _mat_mul(g.rows(), chart_in))
    u0 = _chart_coordinate(t.point, p)
    denom = e[1][0] * u0 + e[1][1]
    if denom == 0:
        raise ArithmeticError("chart selection failed to keep the image finite")
    det = e[0][0] * e[1][1] - e[0][1] * e[1][0]
    twist = class_of(det / denom**2, t.near_class.level_n, p)
    return ProjTruncType.near(image, twist * t.near_class)


def flow_star(
    source: GFlowPoint, t: ProjTruncType, level: ProjLevel, ladder: ScaleLadder
) -> ProjTruncType:
    """Product of a paired flow point with a projective type through
    concrete witnesses: the flow point is realized on the first rung
    block, the input on the block above everything the witness spans."""
    p = level.prime
    if source.k.prime != p or source.j.a_class.level_n != level.level_n:
        raise ValueError("mixed truncation levels")
    left = source.k.lift() @ borel_witness(source.j, ladder, 0).to_matrix(p)
    if t.is_realized and t.point.is_infinity:
        vec = (Fraction(1), Fraction(0))
    elif t.is_realized:
        vec = (t.point.x0, Fraction(1))
    else:
        vec = (_realize_type(t, level, ladder, 2), Fraction(1))
    return _classify_vector(
        left.a * vec[0] + left.b * vec[1], left.c * vec[0] + left.d * vec[1], level
    )


def triangular_star(
    t: ProjTruncType, level: ProjLevel, ladder: ScaleLadder | None = None
) -> ProjTruncType:
    """Product with the triangular flow's generic point.

    Every input not based at infinity lands in the infinity family: the
    witness turns a realization a into a·alpha² + alpha·beta, and the
    exact valuation comparison picks the dominant term.  Infinity itself
    is fixed, and infinity-based families stay within the family.
    """
    ladder = ladder if ladder is not None else DEFAULT_LADDER
    source = GFlowPoint(
        KLevelElem.identity(level.prime, 1),
        BorelTruncType.identity(level.level_n, level.prime),
    )
    return flow_star(source, t, level, ladder)


def fiber_star(
    t: ProjTruncType,
    klass: ResidueClass,
    level: ProjLevel,
    ladder: ScaleLadder | None = None,
) -> ProjTruncType:
    """Product with the near-identity integral family of a given class.

    The witness is a lower-corner perturbation of the identity whose
    corner realizes the class at the first rung; the input is realized
    two blocks above, so the corner dominates everything the input
    contributes below the window.  Sweeping the class over the level
    group walks the whole identity fiber of generic products, which is
    what the orbit closure contributes beyond single group elements.
    """
    ladder = ladder if ladder is not None else DEFAULT_LADDER
    corner = realize(TruncType1.near(0, klass), 0, ladder)
    if t.is_realized and t.point.is_infinity:
        return classify_value(1 / corner, level)
    value = t.point.x0 if t.is_realized else _realize_type(t, level, ladder, 2)
    denom = corner * value + 1
    if denom == 0:
        return ProjTruncType.realized(ProjPoint.infinity())
    return classify_value(value / denom, level)


def compact_star(
    t: ProjTruncType,
    level: ProjLevel,
    ladder: ScaleLadder | None = None,
    level_m: int = 1,
) -> ProjTruncType:
    """Product with the integral group's generic point.

    On the infinity family the output is one distinguished type,
    independent of the input: the input's own witness is congruent to
    the identity at the compact level (checked en route), so it is
    absorbed by the generic perturbation.  Elsewhere the composition is
    computed generically and no collapse is claimed.
    """
    ladder = ladder if ladder is not None else DEFAULT_LADDER
    p = level.prime
    if t.point.is_infinity and not t.is_realized:
        c_value = _realize_type(t, level, ladder, 2)
        absorbed = PadicMatrix2.of(((1, 0), (1 / c_value, 1)), p)
        assert absorbed.congruent_to_identity(level_m)
    return fiber_star(t, class_of(1, level.level_n, p), level, ladder)


def nonalgebraic_states(level: ProjLevel) -> tuple[ProjTruncType, ...]:
    return tuple(
        ProjTruncType.near(pt, c)
        for pt in level.base_points()
        for c in level.classes()
    )


def all_states(level: ProjLevel) -> tuple[ProjTruncType, ...]:
    realized = tuple(ProjTruncType.realized(pt) for pt in level.base_points())
    return realized + nonalgebraic_states(level)


def boundary_flagged(level: ProjLevel) -> tuple[str, ...]:
    """Base points whose chart coordinate sits within one valuation step
    of the window boundary: the dominance comparison is decided by exact
    arithmetic there, and reports surface them."""
    flagged = []
    for pt in level.base_points():
        u = _chart_coordinate(pt, level.prime)
        if u == 0:
            continue
        if abs(fraction_valuation(u, level.prime)) >= level.window_w - 1:
            flagged.append(str(pt))
    return tuple(sorted(flagged))


@dataclass(frozen=True)
class CollapseReport:
    level: ProjLevel
    states_checked: int
    collapsed: bool
    collapsed_type: ProjTruncType | None
    boundary_flags: tuple

    def to_json(self) -> dict:
        return {
            "states": self.states_checked,
            "collapsed": self.collapsed,
            "collapsed_type": None
            if self.collapsed_type is None
            else str(self.collapsed_type),
            "boundary_flags": list(self.boundary_flags),
        }


def collapse_check(
    level: ProjLevel,
    ladder: ScaleLadder | None = None,
    level_m: int = 1,
    states=None,
) -> CollapseReport:
    """Apply the composite product operator to every truncated type at
    the level and confirm a single output value."""
    ladder = ladder if ladder is not None else DEFAULT_LADDER
    states = all_states(level) if states is None else tuple(states)
    outputs = {
        compact_star(triangular_star(t, level, ladder), level, ladder, level_m)
        for t in states
    }
    collapsed = len(outputs) <= 1
    value = outputs.pop() if len(outputs) == 1 else None
    return CollapseReport(
        level, len(states), collapsed, value, boundary_flagged(level)
    )


@dataclass(frozen=True)
class ProjFlowReport:
    level: ProjLevel
    size: int
    strongly_connected: bool
    proximal: bool
    collapsed_type: ProjTruncType | None
    boundary_flags: tuple

    def to_json(self) -> dict:
        return {
            "states": self.size,
            "strongly_connected": self.strongly_connected,
            "proximal": self.proximal,
            "collapsed_type": None
            if self.collapsed_type is None
            else str(self.collapsed_type),
            "boundary_flags": list(self.boundary_flags),
        }


def minimality_proximality_report(
    level: ProjLevel,
    level_m: int = 1,
    ladder: ScaleLadder | None = None,
    states=None,
) -> ProjFlowReport:
    """Strong connectivity of the nonalgebraic truncated types under the
    generator action plus the orbit-closure transitions (the triangular
    generic product and the identity-fiber family), with proximality
    witnessed by the collapse of the composite operator.

    The fiber transitions are load-bearing: determinant-one derivatives
    only twist classes by squares, so the action alone cannot cross
    between class fibers away from collapsing boundary deviations."""
    ladder = ladder if ladder is not None else DEFAULT_LADDER
    states = nonalgebraic_states(level) if states is None else tuple(states)
    index = set(states)
    gens = flow_generators(level.prime, level_m + level.window_w)
    successors = {}
    for s in states:
        outs = [snap_type(act_proj(g, s), level, ladder) for g in gens]
        outs.append(triangular_star(s, level, ladder))
        outs.extend(fiber_star(s, c, level, ladder) for c in level.classes())
        successors[s] = [o for o in outs if o in index]
    components = strongly_connected_components(states, lambda s: successors[s])
    collapse = collapse_check(level, ladder, level_m)
    return ProjFlowReport(
        level=level,
        size=len(states),
        strongly_connected=len(components) == 1,
        proximal=collapse.collapsed,
        collapsed_type=collapse.collapsed_type,
        boundary_flags=collapse.boundary_flags,
    )
