import numpy as np
import pytest

from crib.core import KnowledgeElement, Problem, open_session, replay
from crib.errors import InvalidAction, InvalidCombination
from crib.painting import blank_canvas
from crib.photobash import (
    GRAMMAR,
    LIBRARY_SIZE,
    ROLES,
    SPRITE_SIZE,
    Photobash,
    Sprite,
    appears_whole,
    assemble,
    composite,
    creature_library,
    crop,
    greedy_stamps,
    is_four_connected,
    library_seed,
)


def solid(w, h, color):
    return Sprite(np.full((h, w, 3), color, dtype=np.uint8), np.ones((h, w), dtype=bool))


def make_problem(goal, sprites):
    h, w = goal.shape[:2]
    kb = [KnowledgeElement(f"k{i}", s) for i, s in enumerate(sprites)]
    return Problem("t", "photobash", kb, goal, 0, 0, params={"width": w, "height": h})


@pytest.fixture(scope="module")
def library():
    return creature_library(library_seed(99))


def test_library(library):
    assert len(library) == LIBRARY_SIZE >= 80
    assert all(c.sprite.alpha.shape == (SPRITE_SIZE[1], SPRITE_SIZE[0]) for c in library)
    assert all(is_four_connected(c.sprite.alpha) for c in library)
    again = creature_library.__wrapped__(library_seed(99))
    assert all(a.sprite == b.sprite for a, b in zip(library, again))


def test_crop_identity_and_grammar_parts(library):
    c = library[0]
    assert crop(c.sprite, 0, 0, c.sprite.width, c.sprite.height) == c.sprite
    for role in ROLES:
        assert crop(c.sprite, *GRAMMAR[role]) == c.parts[role]


def test_crop_errors(library):
    s = library[0].sprite
    with pytest.raises(InvalidCombination):
        crop(s, 0, 0, 0, 5)
    with pytest.raises(InvalidCombination):
        crop(s, 40, 0, 10, 5)
    empty_corner = Sprite(np.zeros((4, 4, 3), np.uint8), np.zeros((4, 4), bool))
    with pytest.raises(InvalidCombination):
        crop(empty_corner, 0, 0, 2, 2)


def test_composite_overwrite_and_arity():
    a, b = solid(4, 4, (10, 10, 10)), solid(4, 4, (200, 0, 0))
    assert composite([(a, 0, 0), (b, 0, 0)], (64, 64)) == b
    with pytest.raises(InvalidCombination):
        composite([(a, 0, 0)] * 5, (64, 64))
    with pytest.raises(InvalidCombination):
        composite([(a, 0, 0), (b, 70, 0)], (64, 64))


def test_composite_of_grammar_crops_rebuilds_chimera(library):
    donors = {"head": library[1], "torso": library[2],
              "front_legs": library[3], "back_legs": library[4]}
    parts = [(crop(donors[r].sprite, *GRAMMAR[r]), *GRAMMAR[r][:2]) for r in ROLES]
    expected = assemble({r: donors[r].parts[r] for r in ROLES})
    assert composite(parts, SPRITE_SIZE) == expected


def test_stamp_semantics():
    full = solid(8, 6, (1, 2, 3))
    s = open_session(make_problem(blank_canvas(8, 6), [full, solid(2, 2, (9, 9, 9))]), 10)
    s.apply("stamp", x=0, y=0, ref="k0")
    assert np.array_equal(s._state.pixels, full.over_white())
    s.apply("stamp", x=1, y=0, ref="k1")
    canvas = s._state.pixels
    assert tuple(canvas[0, 7]) == (9, 9, 9) and tuple(canvas[0, 5]) == (1, 2, 3)
    with pytest.raises(InvalidAction):
        s.apply("stamp", x=0, y=0)


def test_transparent_pixels_leave_canvas():
    rgb = np.zeros((2, 2, 3), np.uint8)
    alpha = np.array([[True, False], [False, False]])
    s = open_session(make_problem(blank_canvas(2, 2), [Sprite(rgb, alpha)]), 5)
    s.apply("stamp", x=0, y=0, ref="k0")
    assert tuple(s._state.pixels[0, 0]) == (0, 0, 0)
    assert tuple(s._state.pixels[1, 1]) == (255, 255, 255)


def test_greedy_finds_single_sprite_goal(library):
    sprite = library[5].sprite
    goal = blank_canvas(64, 64)
    goal[0:sprite.height, 20:20 + sprite.width][sprite.alpha] = sprite.rgb[sprite.alpha]
    score, moves = greedy_stamps(goal, [library[6].sprite, sprite])
    assert score == 1.0 and moves[-1][0] == 1


def test_greedy_matches_loop_reference(library):
    # a straightforward loop over every (sprite, lattice offset) as the reference
    from crib.photobash import lattice_offsets

    goal = blank_canvas(64, 48)
    a, b = library[7].sprite, library[8].sprite
    goal[10:10 + a.height, 3:3 + a.width][a.alpha] = a.rgb[a.alpha]
    goal[0:b.height, 18:18 + b.width][b.alpha] = 0
    sprites = [a, b]
    canvas = blank_canvas(64, 48).astype(int)
    g = goal.astype(int)
    while True:
        best = (0, None)
        for k, s in enumerate(sprites):
            for oy in lattice_offsets(48 - s.height):
                for ox in lattice_offsets(64 - s.width):
                    region = canvas[oy:oy + s.height, ox:ox + s.width]
                    gr = g[oy:oy + s.height, ox:ox + s.width]
                    m = s.alpha
                    d = int(np.abs(s.rgb[m].astype(int) - gr[m]).sum() - np.abs(region[m] - gr[m]).sum())
                    if d < best[0]:
                        best = (d, (k, ox, oy))
        if best[1] is None:
            break
        k, ox, oy = best[1]
        s = sprites[k]
        canvas[oy:oy + s.height, ox:ox + s.width][s.alpha] = s.rgb[s.alpha]
    expected = 1 - np.abs(canvas - g).sum() / (64 * 48 * 765)
    assert greedy_stamps(goal, sprites)[0] == pytest.approx(expected, abs=1e-12)


def test_generated_problems(problems):
    dom = Photobash()
    for p in problems["photobash"]:
        assert 2 <= len(p.initial_kb) <= 9
        assert not any(appears_whole(p.goal, e.payload) for e in p.initial_kb)
        assert dom.certify_invention(p)
        assert p.uncreative_max < 1.0 and not p.uncreative_max_exact
        assert replay(open_session(p, 1), p.oracle_script) == 1.0


def test_oracle_composites_match_library_assembly(problems, library):
    for p in problems["photobash"]:
        s = open_session(p, 1)
        composites = []
        for step in p.oracle_script:
            if step["op"] == "combine":
                ref = s.combine(step["operator"], step["parents"], **step["params"])
                if step["operator"] == "composite":
                    composites.append(s.payload(ref))
        assert len(composites) == len(p.metadata["assembly"]) >= 1
        for built, part in zip(composites, p.metadata["assembly"]):
            donors = part["library"]
            expected = assemble({r: library[donors[r]].parts[r] for r in ROLES})
            assert built == expected


def test_small_canvas_rejected():
    from crib.errors import GenerationError

    with pytest.raises(GenerationError):
        Photobash().generate(1, 1, size=(20, 20))
