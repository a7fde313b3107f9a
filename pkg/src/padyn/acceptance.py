"""Acceptance battery: the ten exact checks this package ships against.

Every check returns a plain dict with at least ``passed`` and
``seconds`` so the same battery backs both the test suite and the
command-line ``verify`` subcommand.  All comparisons are exact — there
are no numeric tolerances anywhere — and each check carries a wall-time
budget that the caller is expected to enforce.

The residue-oracle check deserves a note on method.  The full grid of
rationals with numerator and denominator up to p**4 is far too large to
test pointwise, but membership in (Q_p*)^n only depends on the
valuation and on the unit part at a fixed finite modulus.  The check
therefore enumerates every (valuation, unit residue) signature the grid
can produce — at a modulus two p-digits finer than the one the
implementation decides at — and tests one concrete grid representative
per signature against an independently enumerated power-residue set.
A direct, reduction-free sweep over the smaller num, den <= p**2 grid
backs that accounting up pointwise.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction

from padyn.borel import (
    BorelTruncType,
    build_flow_group,
    star as borel_star,
    witness as borel_witness,
)
from padyn.config import GlobalConfig
from padyn.flows import act_add, minimal_subflows
from padyn.padic import PadicMatrix2, fraction_valuation
from padyn.proj import (
    ProjLevel,
    all_states,
    collapse_check,
    compact_star,
    minimality_proximality_report,
    triangular_star,
)
from padyn.residues import brute_force_order, build_group, hensel_modulus, is_nth_power
from padyn.sl2 import (
    borel_past_integral,
    ellis_group,
    iwasawa,
    k_level_group,
    minimal_flow,
)
from padyn.types1 import ScaleLadder, TruncType1, enumerate_types, roundtrip_check

DEFAULT_SEED = 20260814
DEFAULT_LADDER = ScaleLadder.build(gap=8, window_w=2, length=4)


def _strip(k: int, p: int) -> tuple[int, int]:
    """(valuation, unit part) of a positive integer, by plain division."""
    v = 0
    while k % p == 0:
        k //= p
        v += 1
    return v, k


def check_residue_oracle() -> dict:
    """Power test against enumerated residues over the full grid, by
    signature completeness, plus a pointwise sweep of the small grid and
    exhaustive group-axiom and order verification at every level."""
    start = time.perf_counter()
    primes = (3, 5, 7)
    levels = (1, 2, 3, 4, 5, 6)
    pairs = []
    mismatches = 0
    for p in primes:
        bound = p**4
        # one oracle modulus per distinct Hensel modulus at this prime,
        # always two digits finer than the implementation's
        moduli = sorted({hensel_modulus(p, n) * p * p for n in levels})
        composed_by_modulus = {}
        for m_oracle in moduli:
            side: dict[tuple[int, int], int] = {}
            for a in range(1, bound + 1):
                v, u = _strip(a, p)
                side.setdefault((v, u % m_oracle), a)
            inverses = {key: pow(key[1], -1, m_oracle) for key in side}
            composed: dict[tuple[int, int], tuple[int, int]] = {}
            for (v1, u1), a in side.items():
                for key2, b in side.items():
                    q = (u1 * inverses[key2]) % m_oracle
                    dv = v1 - key2[0]
                    for sig, num in (((dv, q), a), ((dv, m_oracle - q), -a)):
                        if sig not in composed:
                            composed[sig] = (num, b)
            composed_by_modulus[m_oracle] = composed
        for n in levels:
            m_oracle = hensel_modulus(p, n) * p * p
            powers = {pow(u, n, m_oracle) for u in range(1, m_oracle) if u % p}
            composed = composed_by_modulus[m_oracle]
            bad = 0
            for (dv, q), (num, den) in composed.items():
                expected = dv % n == 0 and q in powers
                if is_nth_power(Fraction(num, den), n, p) is not expected:
                    bad += 1
            direct_bad = 0
            small = p * p
            for num in range(-small, small + 1):
                if num == 0:
                    continue
                v1, u1 = _strip(abs(num), p)
                for den in range(1, small + 1):
                    v2, u2 = _strip(den, p)
                    q = (num // abs(num)) * u1 * pow(u2, -1, m_oracle) % m_oracle
                    expected = (v1 - v2) % n == 0 and q in powers
                    if is_nth_power(Fraction(num, den), n, p) is not expected:
                        direct_bad += 1
            group = build_group(p, n)
            group._verify_axioms()
            order_agrees = brute_force_order(p, n) == group.order
            mismatches += bad + direct_bad + (0 if order_agrees else 1)
            pairs.append(
                {
                    "p": p,
                    "n": n,
                    "grid_rationals": 2 * bound * bound,
                    "signatures": len(composed),
                    "signature_mismatches": bad,
                    "direct_grid_mismatches": direct_bad,
                    "group_order": group.order,
                    "order_agrees": order_agrees,
                }
            )
    return {
        "passed": mismatches == 0,
        "seconds": round(time.perf_counter() - start, 3),
        "pairs": pairs,
    }


def check_type_roundtrip() -> dict:
    """classify(realize(t)) == t for every truncated type over integer
    bases |a| <= 25, all levels n <= 4, windows w <= 3, two ladder gaps."""
    start = time.perf_counter()
    p = 5
    bases = tuple(Fraction(a) for a in range(-25, 26))
    cases = 0
    failures = 0
    for gap in (8, 16):
        for w in (1, 2, 3):
            ladder = ScaleLadder.build(gap=gap, window_w=w, length=3)
            for n in (1, 2, 3, 4):
                catalogue = enumerate_types(bases, n, p)
                catalogue.extend(TruncType1.realized(a) for a in bases)
                for t in catalogue:
                    cases += 1
                    if not roundtrip_check(t, ladder, n, p):
                        failures += 1
    return {
        "passed": failures == 0,
        "seconds": round(time.perf_counter() - start, 3),
        "cases": cases,
        "failures": failures,
    }


def check_affine_flows(seed: int = DEFAULT_SEED) -> dict:
    """Translations fix every type at infinity; the multiplicative flow
    splits into exactly two minimal subflows of residue-group size."""
    start = time.perf_counter()
    rng = random.Random(seed)
    p = 5
    group = build_group(p, 2)
    at_infinity = [TruncType1.at_infinity(c) for c in group.elements]
    moved = 0
    trials = 1000
    for _ in range(trials):
        b = Fraction(rng.randint(-(p**6), p**6), rng.randint(1, p**6))
        b *= Fraction(p) ** rng.randint(-6, 6)
        for t in at_infinity:
            if act_add(b, t) != t:
                moved += 1
    subflow_shapes = {}
    shapes_ok = True
    for n in (1, 2, 3):
        config = GlobalConfig(prime=p, residue_level_n=n)
        report = minimal_subflows("gm", config)
        sizes = sorted(len(family) for family in report.minimal_subflows)
        order = build_group(p, n).order
        subflow_shapes[n] = {"count": len(sizes), "sizes": sizes, "group_order": order}
        if sizes != [order, order]:
            shapes_ok = False
    return {
        "passed": moved == 0 and shapes_ok,
        "seconds": round(time.perf_counter() - start, 3),
        "translations": trials,
        "types_moved": moved,
        "gm_subflows": subflow_shapes,
    }


def check_borel_flow_groups() -> dict:
    """Basepoint idempotent and flow-group/residue-group isomorphism for
    n <= 6, with identical tables after doubling the ladder gap."""
    start = time.perf_counter()
    p = 5
    ladders = (DEFAULT_LADDER, DEFAULT_LADDER.doubled_gap())
    tables: dict[int, list] = {n: [] for n in range(1, 7)}
    ok = True
    orders = {}
    for ladder in ladders:
        for n in range(1, 7):
            fg = build_flow_group(p, n, ladder)
            p0 = fg.identity
            if borel_star(p0, p0, ladder) != p0:
                ok = False
            if not (fg.idempotent_check() and fg.isomorphic_to_residue_group()):
                ok = False
            tables[n].append(fg.table)
            orders[n] = fg.order
    stable = all(tables[n][0] == tables[n][1] for n in range(1, 7))
    return {
        "passed": ok and stable,
        "seconds": round(time.perf_counter() - start, 3),
        "orders": orders,
        "gap_doubling_stable": stable,
    }


def _random_det_one(rng: random.Random, p: int) -> PadicMatrix2:
    while True:
        a = Fraction(rng.randint(-30, 30), rng.choice((1, 1, 1, p, 2 * p)))
        a *= Fraction(p) ** rng.randint(-2, 2)
        b = Fraction(rng.randint(-30, 30), rng.choice((1, 1, 3)))
        c = Fraction(rng.randint(-30, 30), rng.choice((1, 1, p)))
        if a == 0:
            if b == 0:
                continue
            return PadicMatrix2.of(((a, b), (-1 / b, rng.randint(-3, 3))), p)
        return PadicMatrix2.of(((a, b), (c, (1 + b * c) / a)), p)


def check_iwasawa_and_rewrite(seed: int = DEFAULT_SEED) -> dict:
    """Exact g = t·h reconstruction on random determinant-one matrices,
    and the corner rewrite formula reproduced entry-for-entry on every
    level-1 compact element against every identity-class witness block,
    with the lower-unipotent factor congruent to the identity."""
    start = time.perf_counter()
    p = 5
    rng = random.Random(seed + 1)
    reconstruction_failures = 0
    trials = 10_000
    for _ in range(trials):
        g = _random_det_one(rng, p)
        t, h = iwasawa(g)
        if (
            (t @ h).rows() != g.rows()
            or not t.is_unimodular_integral()
            or not h.is_upper_triangular()
        ):
            reconstruction_failures += 1
    ident = BorelTruncType.identity(2, p)
    formula_failures = 0
    formula_cases = 0
    pass_through_cases = 0
    min_corner_valuation = None
    compact = k_level_group(p, 1)
    for block in (0, 1, 2):
        h = borel_witness(ident, DEFAULT_LADDER, block).to_matrix(p)
        a, c = h.a, h.b
        for k in compact:
            tmat = k.lift()
            t2, h2 = borel_past_integral(h, tmat)
            if (t2 @ h2).rows() != (h @ tmat).rows() or not h2.is_upper_triangular():
                formula_failures += 1
                continue
            u1, u2, u3, u4 = tmat.entries()
            if u3 == 0:
                # upper-triangular right factors pass through whole
                pass_through_cases += 1
                if t2.rows() != tmat.rows():
                    formula_failures += 1
                continue
            formula_cases += 1
            lead = a * u1 + c * u3
            want_t2 = PadicMatrix2.of(((1, 0), (u3 / (a * lead), 1)), p)
            want_h2 = PadicMatrix2.of(((lead, a * u2 + c * u4), (0, 1 / lead)), p)
            if t2.rows() != want_t2.rows() or h2.rows() != want_h2.rows():
                formula_failures += 1
                continue
            if not t2.congruent_to_identity(1):
                formula_failures += 1
                continue
            depth = fraction_valuation(t2.c, p)
            if min_corner_valuation is None or depth < min_corner_valuation:
                min_corner_valuation = depth
    return {
        "passed": reconstruction_failures == 0 and formula_failures == 0,
        "seconds": round(time.perf_counter() - start, 3),
        "reconstructions": trials,
        "reconstruction_failures": reconstruction_failures,
        "formula_cases": formula_cases,
        "pass_through_cases": pass_through_cases,
        "formula_failures": formula_failures,
        "min_corner_valuation": min_corner_valuation,
    }


def check_main_flow() -> dict:
    """Basepoint idempotent through the witness path and the full
    480-state flow strongly connected at levels (n, m) = (2, 1)."""
    start = time.perf_counter()
    report = minimal_flow(5, 2, 1)
    return {
        "passed": report.size == 480 and report.strongly_connected and report.idempotent,
        "seconds": round(time.perf_counter() - start, 3),
        "states": report.size,
        "strongly_connected": report.strongly_connected,
        "idempotent": report.idempotent,
    }


def check_ellis_tower() -> dict:
    """Identity-fiber products form a group isomorphic to the residue
    group at every level n <= 4, with commuting reduction maps between
    divisor levels.  Valuation injectivity is reported, not asserted."""
    start = time.perf_counter()
    per_level = {}
    ok = True
    for n in (1, 2, 3, 4):
        report = ellis_group(5, n, 1)
        iso_ok = all(report.iso_by_level.values())
        tower_ok = all(flag for (_, _, flag) in report.tower)
        order_ok = report.order == build_group(5, n).order
        if not (iso_ok and tower_ok and order_ok):
            ok = False
        per_level[n] = {
            "order": report.order,
            "iso_all_levels": iso_ok,
            "tower_commutes": tower_ok,
            "valuation_injective": dict(report.valuation_injective_by_level),
        }
    return {
        "passed": ok,
        "seconds": round(time.perf_counter() - start, 3),
        "levels": per_level,
    }


def check_projective_collapse() -> dict:
    """The composite operator is constant on all 150 truncated
    projective types at (p, n, w) = (5, 2, 2); the triangular product
    lands in the family at infinity on every input, and the compact
    product is constant on that family."""
    start = time.perf_counter()
    level = ProjLevel(5, 2, 2)
    report = collapse_check(level)
    states = all_states(level)
    triangular_in_family = all(
        triangular_star(t, level).point.is_infinity for t in states
    )
    omega = report.collapsed_type
    at_infinity = [t for t in states if t.point.is_infinity]
    compact_constant = all(compact_star(t, level) == omega for t in at_infinity)
    return {
        "passed": (
            report.collapsed
            and report.states_checked == 150
            and triangular_in_family
            and compact_constant
        ),
        "seconds": round(time.perf_counter() - start, 3),
        "states": report.states_checked,
        "collapsed": report.collapsed,
        "collapsed_type": str(omega),
        "triangular_image_at_infinity": triangular_in_family,
        "compact_constant_on_family": compact_constant,
    }


def check_projective_minimality() -> dict:
    """The 120 nonalgebraic projective types are strongly connected
    under the generator and closure moves, and the flow is proximal."""
    start = time.perf_counter()
    report = minimality_proximality_report(ProjLevel(5, 2, 2))
    return {
        "passed": report.size == 120 and report.strongly_connected and report.proximal,
        "seconds": round(time.perf_counter() - start, 3),
        "states": report.size,
        "strongly_connected": report.strongly_connected,
        "proximal": report.proximal,
    }


def _symbolic_snapshot(ladder: ScaleLadder) -> dict:
    """Ladder-independent outputs of the flow-group, main-flow,
    identity-fiber, and collapse computations."""
    level = ProjLevel(5, 2, 2)
    return {
        "borel": {n: build_flow_group(5, n, ladder).to_json() for n in range(1, 7)},
        "main_flow": minimal_flow(5, 2, 1, ladder).to_json(),
        "ellis": {n: ellis_group(5, n, 1, ladder).to_json() for n in range(1, 5)},
        "collapse": collapse_check(level, ladder=ladder).to_json(),
        "triangular_images": [
            str(triangular_star(t, level, ladder)) for t in all_states(level)
        ],
    }


def check_ladder_stability() -> dict:
    """Checks 4, 6, 7 and 8 produce identical symbolic output when the
    ladder gap is doubled and when every rung magnitude is doubled."""
    start = time.perf_counter()
    base = DEFAULT_LADDER
    doubled_gap = base.doubled_gap()
    doubled_rungs = ScaleLadder(
        tuple(2 * r for r in base.rungs), base.gap, base.window_w
    )
    reference = _symbolic_snapshot(base)
    gap_stable = _symbolic_snapshot(doubled_gap) == reference
    magnitude_stable = _symbolic_snapshot(doubled_rungs) == reference
    return {
        "passed": gap_stable and magnitude_stable,
        "seconds": round(time.perf_counter() - start, 3),
        "rungs": {
            "default": list(base.rungs),
            "doubled_gap": list(doubled_gap.rungs),
            "doubled_magnitude": list(doubled_rungs.rungs),
        },
        "gap_doubling_stable": gap_stable,
        "magnitude_doubling_stable": magnitude_stable,
    }


# name, wall-time budget in seconds, runner (every runner takes the seed;
# deterministic checks ignore it)
CHECKS = (
    ("residue-oracle", 30.0, lambda seed: check_residue_oracle()),
    ("type-roundtrip", 10.0, lambda seed: check_type_roundtrip()),
    ("affine-flows", 10.0, lambda seed: check_affine_flows(seed)),
    ("borel-flow-group", 20.0, lambda seed: check_borel_flow_groups()),
    ("iwasawa-rewrite", 30.0, lambda seed: check_iwasawa_and_rewrite(seed)),
    ("main-flow", 60.0, lambda seed: check_main_flow()),
    ("ellis-tower", 60.0, lambda seed: check_ellis_tower()),
    ("projective-collapse", 30.0, lambda seed: check_projective_collapse()),
    ("projective-minimality", 30.0, lambda seed: check_projective_minimality()),
    ("ladder-stability", 120.0, lambda seed: check_ladder_stability()),
)


def run_all(seed: int = DEFAULT_SEED, only: str | None = None) -> dict:
    """Run the battery in order; `only` restricts to a single named check."""
    names = [name for name, _, _ in CHECKS]
    if only is not None and only not in names:
        raise ValueError(f"unknown check {only!r}; expected one of {names}")
    results = []
    for name, budget, fn in CHECKS:
        if only is not None and name != only:
            continue
        outcome = fn(seed)
        outcome["check"] = name
        outcome["budget_seconds"] = budget
        outcome["within_budget"] = outcome["seconds"] < budget
        results.append(outcome)
    total = round(sum(r["seconds"] for r in results), 3)
    return {
        "passed": all(r["passed"] and r["within_budget"] for r in results),
        "total_seconds": total,
        "results": results,
    }
