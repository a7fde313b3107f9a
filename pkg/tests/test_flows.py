"""Affine flow dynamics, validated against the realization oracle."""

import random
from fractions import Fraction

import pytest

from padyn.config import GlobalConfig
from padyn.flows import (
    GA,
    GM,
    ZP_ADD,
    ZP_MUL,
    act_add,
    act_mul,
    closure_transitions,
    default_base_points,
    minimal_subflows,
    normalize_group_tag,
    state_space,
)
from padyn.padic import valuation
from padyn.residues import build_group, class_of
from padyn.types1 import ScaleLadder, TruncType1, classify, enumerate_types, realize

CFG = GlobalConfig()
GROUP = build_group(5, 2)
C1 = class_of(1, 2, 5)
C2 = class_of(2, 2, 5)
C5 = class_of(5, 2, 5)


def all_near_zero():
    return {TruncType1.near(Fraction(0), c) for c in GROUP.elements}


def all_at_infinity():
    return {TruncType1.at_infinity(c) for c in GROUP.elements}


def test_normalize_group_tag():
    assert normalize_group_tag("zp-add") == ZP_ADD
    assert normalize_group_tag("GA") == GA
    assert normalize_group_tag("ZpMul") == ZP_MUL
    with pytest.raises(ValueError):
        normalize_group_tag("sl2")


def test_act_add_pinned():
    t = TruncType1.at_infinity(C1)
    assert act_add(3, t) == t
    near = TruncType1.near(7, C2)
    assert act_add(0, near) == near
    assert act_add(3, near) == TruncType1.near(10, C2)
    assert act_add(Fraction(1, 2), TruncType1.realized(3)) == TruncType1.realized(
        Fraction(7, 2)
    )


def test_act_mul_pinned():
    assert act_mul(5, TruncType1.near(0, C1)) == TruncType1.near(0, C5)
    near = TruncType1.near(1, C1)
    assert act_mul(1, near) == near
    assert act_mul(2, near) == TruncType1.near(2, C2)
    assert act_mul(2, TruncType1.at_infinity(C5)) == TruncType1.at_infinity(C2 * C5)
    with pytest.raises(ValueError):
        act_mul(0, near)


def test_action_tables_agree_with_realization_oracle():
    rng = random.Random(20260814)
    short = ScaleLadder.build(8, 2, length=4)
    doubled = ScaleLadder.build(8, 2, length=3).doubled_gap()
    types = enumerate_types(range(8), 2, 5)
    types += [TruncType1.realized(k) for k in range(1, 5)]
    for ladder in (short, doubled):
        for _ in range(500):
            t = rng.choice(types)
            g = Fraction(rng.randrange(1, 100), rng.randrange(1, 100))
            g *= Fraction(5) ** rng.randrange(-2, 3)
            if rng.random() < 0.3:
                g = -g
            rung = rng.randrange(1, len(ladder.rungs))
            if rng.random() < 0.5:
                expected = act_add(g, t)
                moved = realize(t, rung, ladder) + g
            else:
                expected = act_mul(g, t)
                moved = realize(t, rung, ladder) * g
            if (
                expected.kind == "near"
                and expected.base != 0
                and valuation(expected.base, 5) < -2
            ):
                continue  # base fell out of the window; see coarsening test
            back = classify(moved, expected.base_points(), 2, 2, 5)
            assert back == expected, (str(t), g)


def test_deep_multipliers_coarsen_near_types_to_infinity():
    # a multiplier dragging the base below the window leaves a value the
    # truncation can only describe as at-infinity, in the moved class
    t = TruncType1.near(2, C1)
    g = Fraction(-72, 125)
    moved = realize(t, 1, ScaleLadder.build(8, 2, length=4)) * g
    got = classify(moved, [2 * g], 2, 2, 5)
    assert got == TruncType1.at_infinity(class_of(moved, 2, 5))


def test_closure_tables_pinned():
    assert closure_transitions(TruncType1.realized(1), GM, CFG) == (
        all_near_zero() | all_at_infinity()
    )
    assert closure_transitions(TruncType1.realized(0), GA, CFG) == all_at_infinity()
    assert closure_transitions(TruncType1.near(0, C2), GM, CFG) == frozenset()
    assert closure_transitions(TruncType1.at_infinity(C2), GM, CFG) == frozenset()
    bases = default_base_points(CFG)
    assert closure_transitions(TruncType1.realized(3), ZP_ADD, CFG) == {
        TruncType1.near(a, c) for a in bases for c in GROUP.elements
    }
    assert closure_transitions(TruncType1.near(3, C1), ZP_ADD, CFG) == frozenset()
    unit_bases = [a for a in bases if a % 5 != 0]
    assert closure_transitions(TruncType1.realized(2), ZP_MUL, CFG) == {
        TruncType1.near(a, c) for a in unit_bases for c in GROUP.elements
    }


def test_closure_tables_match_extreme_valuation_sampling():
    # drive group elements far past every scale and classify the result
    n, w, p = 2, 2, 5
    deep = w + 2 * n + 5
    ladder = ScaleLadder.build(8, w, length=4)

    for a in (Fraction(1), Fraction(7)):
        observed = set()
        for c in GROUP.elements:
            for sign in (deep, -deep):
                moved = Fraction(c.representative) * Fraction(p) ** sign * a
                observed.add(classify(moved, [Fraction(0)], w, n, p))
        assert observed == closure_transitions(TruncType1.realized(a), GM, CFG)

    source = TruncType1.near(2, C2)
    observed = set()
    for c in GROUP.elements:
        b = Fraction(c.representative) * Fraction(p) ** -deep
        moved = realize(source, 2, ladder) + b
        observed.add(classify(moved, [], w, n, p))
    assert observed == closure_transitions(source, GA, CFG)

    bases = default_base_points(CFG)
    nk = n * -(-deep // n)
    observed = set()
    for a_new in bases:
        for c in GROUP.elements:
            moved = a_new + Fraction(c.representative) * Fraction(p) ** nk
            observed.add(classify(moved, bases, w, n, p))
    assert observed == closure_transitions(TruncType1.realized(3), ZP_ADD, CFG)

    unit_bases = [a for a in bases if a % 5 != 0]
    observed = set()
    for a_new in unit_bases:
        for c in GROUP.elements:
            scale = (a_new / 2) * (1 + Fraction(c.representative) * Fraction(p) ** nk)
            observed.add(classify(2 * scale, unit_bases, w, n, p))
    assert observed == closure_transitions(TruncType1.realized(2), ZP_MUL, CFG)


def test_gm_has_exactly_two_minimal_subflows():
    report = minimal_subflows(GM, CFG)
    assert len(report.minimal_subflows) == 2
    families = [set(f) for f in report.minimal_subflows]
    assert {len(f) for f in families} == {GROUP.order}
    assert all_near_zero() in families
    assert all_at_infinity() in families
    # each family is a single transitive orbit of the class action
    assert len(report.orbits) == 2
    assert {frozenset(o) for o in report.orbits} == {
        frozenset(f) for f in families
    }
    union = report.minimal_union()
    assert all(report.fgeneric_flags[s] == (s in union) for s in report.states)
    assert not report.fgeneric_flags[TruncType1.realized(1)]


def test_ga_minimal_subflows_are_at_infinity_fixed_points():
    report = minimal_subflows(GA, CFG)
    assert len(report.minimal_subflows) == GROUP.order
    for family in report.minimal_subflows:
        assert len(family) == 1
        (state,) = family
        assert state.kind == "at_infinity"
    rng = random.Random(5)
    for _ in range(200):
        b = Fraction(rng.randrange(-999, 1000), rng.randrange(1, 50))
        for state in all_at_infinity():
            assert act_add(b, state) == state
    flags = report.fgeneric_flags
    assert all(flags[s] == (s.kind == "at_infinity") for s in report.states)


def test_ga_trivial_level_has_single_fixed_point():
    report = minimal_subflows(GA, GlobalConfig(residue_level_n=1))
    assert len(report.minimal_subflows) == 1
    assert len(report.minimal_subflows[0]) == 1


def test_zp_add_worked_example():
    cfg = GlobalConfig(valuation_window_w=1)
    report = minimal_subflows(ZP_ADD, cfg)
    assert len(report.minimal_union()) == 5 * 4
    assert all(s.kind == "near" for s in report.minimal_union())
    assert len(report.orbits) == 4
    for orbit in report.orbits:
        classes = {s.klass for s in orbit}
        assert len(classes) == 1  # one orbit per class, all five bases
        assert {s.base for s in orbit} == {Fraction(i) for i in range(5)}


def test_zp_mul_orbits_have_twisted_class_form():
    report = minimal_subflows(ZP_MUL, CFG)
    assert len(report.orbits) == 4
    assert {frozenset(f) for f in report.minimal_subflows} == {
        frozenset(o) for o in report.orbits
    }
    for orbit in report.orbits:
        assert len(orbit) == 20
        tags = {class_of(s.base, 2, 5).inverse() * s.klass for s in orbit}
        assert len(tags) == 1  # orbit is {Near(a, class(a) * C)} for fixed C


def test_reports_stable_under_gap_doubling():
    doubled = GlobalConfig(ladder_gap=16)
    for tag in (GA, GM, ZP_ADD, ZP_MUL):
        assert minimal_subflows(tag, CFG) == minimal_subflows(tag, doubled)


def test_flow_report_json_shape():
    payload = minimal_subflows(GM, CFG).to_json()
    assert payload["group_tag"] == "Gm"
    assert payload["minimal_state_count"] == 8
    assert payload["orbit_count"] == 2
    assert payload["state_count"] == len(state_space(GM, CFG))
    assert set(payload)
    flags = payload["f_generic"]
    assert flags["Near(0, 2)"] is True
    assert flags["Realized(1)"] is False
