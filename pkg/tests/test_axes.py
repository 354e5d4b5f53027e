from fractions import Fraction

import pytest

from arbor.axes import (
    AxisRelation,
    InconsistentLengths,
    classify_pair,
    elliptic_product_prediction,
    pair_pingpong,
    relation_from_lengths,
)
from arbor.exact import IDENTITY, Mat2, ValidationError
from arbor.isometry import Isometry
from arbor.tree import OverlapBeyondCutoff, apply, distance, elliptic_product_offset, predict_product_length
from conftest import elliptic_product_pairs, hyperbolic_pairs


def test_same_element_is_large_overlap(quint7):
    for g in quint7:
        r = classify_pair(g, g)
        assert r.kind == "large_overlap" and r.same_orientation
        assert r.delta_lower_bound == g.length
        assert not pair_pingpong(g, g)


def test_decision_table_examples():
    assert relation_from_lengths(2, 2, 8, 8) == AxisRelation("disjoint", d=2)
    assert relation_from_lengths(2, 2, 4, 4).kind == "touch"
    r = relation_from_lengths(4, 2, 6, 4)
    assert (r.kind, r.delta, r.same_orientation) == ("overlap", 1, True)
    assert r.to_json() == {"kind": "overlap", "delta": 1, "sameOrientation": True}
    assert relation_from_lengths(4, 2, 2, 6).same_orientation is False
    assert relation_from_lengths(4, 2, 6, 2).kind == "large_overlap"
    assert relation_from_lengths(3, 3, 0, 6).to_json() == {"kind": "large_overlap", "deltaLowerBound": 3, "sameOrientation": False}


@pytest.mark.parametrize("lengths", [(2, 2, 8, 10), (2, 2, 3, 4), (2, 2, 4, 6), (2, 4, 5, 6), (0, 2, 2, 2)])
def test_inconsistent_lengths(lengths):
    with pytest.raises(InconsistentLengths):
        relation_from_lengths(*lengths)


def test_classify_rejects_elliptic(triple5):
    with pytest.raises(ValidationError):
        classify_pair(triple5[0], Isometry(IDENTITY, 5))


def test_example_pairs(triple5, quint7):
    assert classify_pair(triple5[0], triple5[2]).kind == "touch"
    assert classify_pair(triple5[0], triple5[1]).to_json() == {"kind": "overlap", "delta": 1, "sameOrientation": True}
    assert pair_pingpong(quint7[0], quint7[4])


def test_symmetry_and_inverse():
    for g1, g2 in hyperbolic_pairs(3, 4, 80, seed=11):
        a, b = classify_pair(g1, g2), classify_pair(g2, g1)
        assert a == b
        flipped = classify_pair(g1, g2.inverse())
        assert flipped.kind == a.kind
        if a.same_orientation is not None and a.kind != "touch":
            assert flipped.same_orientation == (not a.same_orientation)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_table_agrees_with_measured_geometry(p):
    cases = set()
    for g1, g2 in hyperbolic_pairs(p, 3, 60, seed=20 + p):
        pred = predict_product_length(g1, g2)
        assert pred.length == (g1 @ g2).length
        cases.add(pred.case)
        rel, m = classify_pair(g1, g2), pred.measured
        if rel.kind == "disjoint":
            assert m.kind == "disjoint" and m.distance == rel.d
        elif rel.kind == "touch":
            assert m.kind == "overlap" and m.delta == 0
        elif rel.kind == "overlap":
            assert m.kind == "overlap" and m.delta == rel.delta
            assert m.same_orientation == rel.same_orientation
        else:
            assert m.kind == "beyond_cutoff" or m.delta >= rel.delta_lower_bound
            assert m.same_orientation == rel.same_orientation
    assert "1" in cases


def test_elliptic_product_prediction():
    g = Isometry(Mat2.of(5, 0, 0, Fraction(1, 5)), 5)
    assert elliptic_product_prediction(g, g.inverse()) == 0
    # g^{-1} composed with a rotation about a point off the axis
    g2 = Isometry.from_rows([["6/125", "661/3125"], ["-5", "-6/5"]], 5)
    assert (g2.length, (g @ g2).length) == (6, 0)
    assert elliptic_product_prediction(g, g2) == 2
    q, fv, d = elliptic_product_offset(g, g2)
    assert d == 2
    with pytest.raises(ValidationError):
        elliptic_product_prediction(g, g)


@pytest.mark.parametrize("p", [2, 3])
def test_fixed_vertex_offset(p):
    checked = 0
    for g1, g2 in elliptic_product_pairs(p, 20, seed=p):
        try:
            q, fv, d = elliptic_product_offset(g1, g2)
        except OverlapBeyondCutoff:
            continue
        assert apply(g1 @ g2, fv) == fv
        assert d == distance(q, fv) == elliptic_product_prediction(g1, g2)
        checked += 1
    assert checked >= 15
