import numpy as np
import pytest
from hypothesis import given, strategies as st

from crib.core import KnowledgeElement, Problem, open_session, replay
from crib.errors import InvalidAction, InvalidCombination, InvalidReference
from crib.painting import (
    COLOR_WHEEL,
    COVERAGE_RANGE,
    WHITE,
    Painting,
    blank_canvas,
    index_to_unit,
    mix,
    uncreative_max_painting,
    unit_to_index,
)

RED, BLUE = (255, 0, 0), (0, 0, 255)


def make_problem(goal, palette):
    h, w = goal.shape[:2]
    kb = [KnowledgeElement(f"k{i}", c) for i, c in enumerate(palette)]
    return Problem("t", "painting", kb, goal, 0, 0, params={"width": w, "height": h})


def canvas_of(session):
    # read back the private state only to check paint placement
    return session._state.to_array()


def test_mix_examples():
    assert mix(RED, BLUE, "additive") == (255, 0, 255)
    assert mix((255, 255, 0), (0, 255, 255), "subtractive") == (0, 255, 0)
    assert mix((100, 100, 100), (100, 100, 100), "additive") == (200, 200, 200)
    with pytest.raises(InvalidCombination):
        mix(RED, BLUE, "glaze")


colors = st.tuples(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))


@given(colors, colors, st.sampled_from(["additive", "subtractive"]))
def test_mix_commutative_and_in_range(a, b, mode):
    c = mix(a, b, mode)
    assert c == mix(b, a, mode)
    assert all(0 <= v <= 255 for v in c)


@given(colors, colors)
def test_subtractive_rounds_to_nearest(a, b):
    c = mix(a, b, "subtractive")
    assert all(abs(v - x * y / 255) <= 0.5 for v, x, y in zip(c, a, b))


def test_paint_corners_and_overwrite():
    goal = blank_canvas(8, 6)
    s = open_session(make_problem(goal, [RED, BLUE]), 10)
    s.apply("paint", x=0, y=0, ref="k0")
    s.apply("paint", x=1, y=1, ref="k1")
    s.apply("paint", x=0.5, y=0.5, ref="k0")
    s.apply("paint", x=0.5, y=0.5, ref="k1")
    canvas = canvas_of(s)
    assert tuple(canvas[0, 0]) == RED
    assert tuple(canvas[5, 7]) == BLUE
    assert tuple(canvas[2, 3]) == BLUE  # floor(0.5 * 5), floor(0.5 * 7)


def test_paint_errors():
    s = open_session(make_problem(blank_canvas(4, 4), [RED]), 10)
    with pytest.raises(InvalidAction):
        s.apply("paint", x=1.5, y=0, ref="k0")
    with pytest.raises(InvalidAction):
        s.apply("paint", x=0, y=0)
    with pytest.raises(InvalidReference):
        s.apply("paint", x=0, y=0, ref="nonexistent")


def test_null_score_is_white_canvas_score():
    goal = blank_canvas(4, 4)
    goal[0, 0] = RED
    s = open_session(make_problem(goal, [RED]), 5)
    assert s.score() == 1 - 510 / (16 * 765)


def test_unit_index_round_trip():
    for extent in range(0, 70):
        for i in range(extent + 1):
            assert unit_to_index(index_to_unit(i, extent), extent) == i


def test_uncreative_max_exact_nearest_color():
    goal = blank_canvas(2, 1)
    goal[0, 0] = (255, 0, 255)
    # red and blue are equally far from magenta (255 each); white is 255 too
    assert uncreative_max_painting(goal, [RED, BLUE]) == 1 - 255 / (2 * 765)
    assert uncreative_max_painting(blank_canvas(3, 3), [RED]) == 1.0


def test_uncreative_max_matches_per_pixel_brute_force():
    rng = np.random.default_rng(0)
    goal = rng.integers(0, 256, size=(5, 5, 3), dtype=np.uint8)
    palette = [COLOR_WHEEL[0], COLOR_WHEEL[5], COLOR_WHEEL[9]]
    best = 0
    for px in goal.reshape(-1, 3):
        best += min(sum(abs(int(a) - int(b)) for a, b in zip(px, c)) for c in palette + [WHITE])
    assert uncreative_max_painting(goal, palette) == 1 - best / (25 * 765)


def test_generated_problems(problems):
    for p in problems["painting"]:
        assert 2 <= len(p.initial_kb) <= 6
        assert all(e.payload in COLOR_WHEEL for e in p.initial_kb)
        painted = np.any(p.goal != 255, axis=-1).mean()
        assert COVERAGE_RANGE[0] <= painted <= COVERAGE_RANGE[1]
        visible = {tuple(int(v) for v in px) for px in p.goal.reshape(-1, 3)} - {WHITE}
        palette = {e.payload for e in p.initial_kb}
        assert visible - palette, "goal must show an invented color"
        assert p.uncreative_max < 1.0
        assert replay(open_session(p, 1), p.oracle_script) == 1.0


def test_generation_is_deterministic():
    a = Painting().generate(5, 3, size=(16, 12))
    b = Painting().generate(5, 3, size=(16, 12))
    for x, y in zip(a, b):
        assert np.array_equal(x.goal, y.goal)
        assert x.initial_kb == y.initial_kb and x.oracle_script == y.oracle_script
        assert x.goal.shape == (12, 16, 3)
