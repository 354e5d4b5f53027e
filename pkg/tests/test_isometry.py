import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arbor.exact import IDENTITY, Mat2, ValidationError
from arbor.isometry import (
    Isometry,
    TrackedElement,
    evaluate_word,
    is_elliptic,
    is_hyperbolic,
    length_from_trace,
    reduce_word,
    tracked_inv,
    tracked_mul,
    translation_length,
)
from conftest import random_det1


def test_length_examples(triple5, quint7):
    assert translation_length(triple5[2]) == 2
    assert translation_length(Isometry(IDENTITY, 7)) == 0
    assert translation_length(quint7[0]) == 4
    assert translation_length(quint7[4]) == 2


def test_elliptic_examples(triple5):
    assert is_elliptic(Isometry(IDENTITY, 3))
    assert is_hyperbolic(triple5[2])
    rot = Isometry(Mat2.of(0, 1, -1, 0), 2)
    assert is_elliptic(rot) and rot.length == 0


def test_length_from_trace():
    assert length_from_trace(0, 5) == 0
    assert length_from_trace("26/5", 5) == 2
    assert length_from_trace("1/125", 5) == 6
    assert length_from_trace(250, 5) == 0


def test_isometry_validation():
    with pytest.raises(ValidationError):
        Isometry(Mat2.of(2, 0, 0, 1), 3)
    with pytest.raises(ValidationError):
        Isometry(IDENTITY, 6)
    with pytest.raises(ValidationError):
        Isometry(IDENTITY, 3) @ Isometry(IDENTITY, 5)


def test_json_round_trip(quint7):
    for g in quint7:
        assert Isometry.from_json(g.to_json()) == g


def _tracked(gs):
    return [TrackedElement.generator(g, i) for i, g in enumerate(gs, start=1)]


def test_tracked_words(quint7):
    t = _tracked(quint7)
    x = tracked_mul(t[4], t[0])
    assert x.word == (5, 1)
    y = tracked_mul(tracked_mul(t[4], t[2]), tracked_inv(t[4]))
    assert y.word == (5, 3, -5)
    e = tracked_mul(x, tracked_inv(x))
    assert e.word == () and e.matrix == IDENTITY
    gens = [g.matrix for g in quint7]
    for el in (x, y, e):
        assert evaluate_word(el.word, gens) == el.matrix


def test_reduce_word():
    assert reduce_word([1, 2, -2, -1, 3]) == (3,)
    assert reduce_word([]) == ()
    with pytest.raises(ValidationError):
        reduce_word([0])


def test_evaluate_word_range():
    with pytest.raises(ValidationError):
        evaluate_word([3], [IDENTITY])


seeds = st.integers(0, 2 ** 32 - 1)


@settings(max_examples=300, deadline=None)
@given(seeds, st.sampled_from([2, 3, 5, 7]))
def test_length_inverse_and_conjugation_invariant(seed, p):
    rng = np.random.default_rng(seed)
    g, h = random_det1(rng, p), random_det1(rng, p)
    assert g.inverse().length == g.length
    assert (h @ g @ h.inverse()).length == g.length
    assert (g @ h).length == (h @ g).length


@settings(max_examples=200, deadline=None)
@given(seeds, st.lists(st.integers(-3, 3).filter(bool), max_size=8))
def test_tracked_words_evaluate(seed, letters):
    rng = np.random.default_rng(seed)
    gens = [random_det1(rng, 3) for _ in range(3)]
    t = _tracked(gens)
    acc = TrackedElement(Isometry(IDENTITY, 3), ())
    for x in letters:
        el = t[abs(x) - 1]
        acc = tracked_mul(acc, el if x > 0 else tracked_inv(el))
    assert acc.word == reduce_word(letters)
    assert evaluate_word(acc.word, [g.matrix for g in gens]) == acc.matrix
