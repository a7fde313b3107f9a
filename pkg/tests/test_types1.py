"""Truncated 1-types: ladder, realization witnesses, classifier."""

from fractions import Fraction

import pytest

from padyn.config import GlobalConfig
from padyn.padic import valuation
from padyn.residues import build_group, class_of
from padyn.types1 import (
    ScaleLadder,
    TruncType1,
    WindowTooCoarseError,
    classify,
    enumerate_types,
    realize,
    roundtrip_check,
)

CFG = GlobalConfig()


def default_ladder() -> ScaleLadder:
    return ScaleLadder.from_config(CFG)


def test_ladder_rungs_from_default_config():
    ladder = default_ladder()
    assert ladder.rungs == (10, 96, 784, 6288, 50320, 402576)


def test_ladder_separation_enforced():
    with pytest.raises(ValueError):
        ScaleLadder((10, 20), 8, 2)  # 20 < 8 * 12
    with pytest.raises(ValueError):
        ScaleLadder((2, 96), 8, 2)  # first rung inside the window
    with pytest.raises(ValueError):
        ScaleLadder((96, 10), 1, 2)
    with pytest.raises(ValueError):
        ScaleLadder((10,), 8, 2)


def test_doubled_gap_keeps_base_rung():
    ladder = default_ladder()
    doubled = ladder.doubled_gap()
    assert doubled.gap == 16
    assert doubled.rungs[0] == ladder.rungs[0]
    assert doubled.rungs[1] == 192
    assert len(doubled.rungs) == len(ladder.rungs)


def test_realize_pinned_witnesses():
    ladder = ScaleLadder.build(8, 2, base=10)
    c2 = class_of(2, 2, 5)
    c1 = class_of(1, 2, 5)
    assert realize(TruncType1.realized(7), 3, ladder) == 7
    assert realize(TruncType1.near(0, c2), 0, ladder) == 2 * Fraction(5) ** 10
    assert realize(TruncType1.at_infinity(c1), 0, ladder) == Fraction(5) ** -10


def test_realize_respects_scale_and_class():
    # exhaustive sweep on a short ladder; tall rungs are for ordering,
    # not for routine realization
    ladder = ScaleLadder.build(8, 2, length=4)
    for t in enumerate_types(range(5), 2, 5):
        for rung_index in range(len(ladder.rungs)):
            magnitude = ladder.magnitude(rung_index)
            witness = realize(t, rung_index, ladder)
            if t.kind == "near":
                gap_val = valuation(witness - t.base, 5)
                assert gap_val >= magnitude
                assert class_of(witness - t.base, 2, 5) == t.klass
            else:
                assert valuation(witness, 5) <= -magnitude
                assert class_of(witness, 2, 5) == t.klass


def test_realize_at_a_deep_rung():
    ladder = default_ladder()
    c10 = class_of(10, 2, 5)
    witness = realize(TruncType1.near(3, c10), 4, ladder)
    assert valuation(witness - 3, 5) == 50321  # rep 10 adds 1 to the even scale
    assert classify(witness, [Fraction(3)], 2, 2, 5) == TruncType1.near(3, c10)


def test_classify_pinned_cases():
    c1 = class_of(1, 2, 5)
    c2 = class_of(2, 2, 5)
    assert classify(Fraction(5) ** -10, [], 3, 2, 5) == TruncType1.at_infinity(c1)
    x = 7 + 2 * Fraction(5) ** 10
    assert classify(x, [Fraction(7)], 3, 2, 5) == TruncType1.near(7, c2)
    assert classify(Fraction(3), [Fraction(7)], 3, 2, 5) == TruncType1.realized(3)
    assert classify(Fraction(7), [Fraction(7)], 3, 2, 5) == TruncType1.realized(7)
    assert classify(Fraction(0), [], 2, 2, 5) == TruncType1.realized(0)


def test_classify_rejects_unseparated_bases():
    x = Fraction(5) ** 5 + Fraction(5) ** 10
    with pytest.raises(WindowTooCoarseError):
        classify(x, [Fraction(0), Fraction(5) ** 5], 3, 2, 5)


def test_roundtrip_over_full_catalogue():
    ladder = ScaleLadder.build(8, 2, length=4)
    types = enumerate_types(range(25), 2, 5)
    types.append(TruncType1.realized(Fraction(3, 4)))
    for t in types:
        assert roundtrip_check(t, ladder, 2, 5), str(t)


def test_roundtrip_stable_under_gap_doubling():
    ladder = ScaleLadder.build(8, 2, length=4).doubled_gap()
    assert ladder.rungs == (10, 192, 3104, 49696)
    for t in enumerate_types(range(5), 3, 5):
        assert roundtrip_check(t, ladder, 3, 5), str(t)


def test_catalogue_size_matches_level():
    group = build_group(5, 2)
    types = enumerate_types(range(25), 2, 5)
    assert len(types) == (25 + 1) * group.order
    assert len(set(types)) == len(types)


def test_type_json_shapes():
    c2 = class_of(2, 2, 5)
    assert TruncType1.near(7, c2).to_json() == {
        "kind": "near",
        "base": "7",
        "class": "2",
        "n": 2,
    }
    assert TruncType1.at_infinity(c2).to_json() == {
        "kind": "at_infinity",
        "class": "2",
        "n": 2,
    }
    assert TruncType1.realized(Fraction(3, 4)).to_json() == {
        "kind": "realized",
        "value": "3/4",
    }
