import numpy as np
from hypothesis import given, settings, strategies as st

from crib.dessert import jaccard
from crib.language import score_sentence, uncreative_max_language
from crib.narrative import score_story
from crib.painting import score_canvas
from crib.seqscore import lcs_length, proportional_lcs

from oracles import (
    best_kb_sentence,
    longest_common_subsequence,
    naive_canvas_score,
    proportional_score,
    set_jaccard,
)

pixels = st.integers(0, 255)


@settings(max_examples=200)
@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_canvas_score_matches_double_loop(w, h, data):
    shape = (h, w, 3)
    a = np.array(data.draw(st.lists(pixels, min_size=h * w * 3, max_size=h * w * 3)),
                 dtype=np.uint8).reshape(shape)
    b = np.array(data.draw(st.lists(pixels, min_size=h * w * 3, max_size=h * w * 3)),
                 dtype=np.uint8).reshape(shape)
    assert score_canvas(a, b) == naive_canvas_score(a.tolist(), b.tolist())


def test_canvas_score_extremes():
    white = np.full((64, 64, 3), 255, dtype=np.uint8)
    black = np.zeros_like(white)
    assert score_canvas(white, white) == 1.0
    assert score_canvas(black, white) == 0.0
    one_off = white.copy()
    one_off[10, 20] = (0, 0, 0)
    assert score_canvas(one_off, white) == 1 - 765 / (64 * 64 * 3 * 255)
    assert abs(score_canvas(one_off, white) - 0.999756) < 1e-6


seqs = st.lists(st.sampled_from("abc"), max_size=7)


@given(seqs, seqs)
def test_lcs_matches_subsequence_search(xs, ys):
    assert lcs_length(xs, ys) == longest_common_subsequence(xs, ys)


@given(seqs, seqs)
def test_proportional_lcs_matches_oracle(xs, ys):
    assert proportional_lcs(xs, ys) == proportional_score(xs, ys)


@given(seqs, seqs)
def test_proportional_lcs_bounds_and_symmetry(xs, ys):
    s = proportional_lcs(xs, ys)
    assert 0.0 <= s <= 1.0
    if xs and ys:
        assert s == proportional_lcs(ys, xs)
    assert (s == 1.0) == (bool(xs) and xs == ys)


def test_sentence_examples():
    goal = ["WAZZ", "BYXBYW", "XDWB"]
    assert score_sentence(goal, goal) == 1.0
    assert score_sentence(["BYXBYW", "XDWB"], goal) == 2 / 3
    assert score_sentence([], goal) == 0.0


def test_story_examples():
    goal = ["e1", "e2", "e3", "e4", "e5", "e6"]
    assert score_story(goal, goal) == 1.0
    assert score_story(None, goal) == 0.0
    assert score_story(["e1", "x", "e3", "y", "e5", "z"], goal) == 0.5


ingredient_sets = st.frozensets(st.sampled_from([f"i{k}" for k in range(12)]), max_size=10)


@given(ingredient_sets, ingredient_sets)
def test_jaccard_matches_set_arithmetic(a, b):
    assert jaccard(a, b) == set_jaccard(a, b)
    assert jaccard(a, b) == jaccard(b, a)
    if a or b:
        assert (jaccard(a, b) == 1.0) == (a == b)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["P", "Q", "R", "S"]), min_size=1, max_size=3),
       st.sets(st.sampled_from(["P", "Q", "R", "S", "T"]), min_size=1, max_size=4))
def test_language_baseline_matches_brute_force(goal, kb):
    kb = sorted(kb)
    assert uncreative_max_language(goal, kb) == best_kb_sentence(goal, kb, len(goal) + 1)


def test_language_baseline_worked_instance():
    goal = ["WAZZ", "BYXBYW", "XDWB"]
    kb = ["BYXBYW", "XDWB", "WA", "ZZ"]
    assert uncreative_max_language(goal, kb) == 2 / 3
    assert best_kb_sentence(goal, kb, 4) == 2 / 3
