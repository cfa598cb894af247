"""Photobash domain.

Knowledge elements are whole creature sprites. Goals are chimeras built from
the heads, torsos and legs of several creatures, so an agent has to cut
parts out (``crop``) and glue them together (``composite``) before stamping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from crib.core import Domain, KnowledgeElement, Problem, ref_name, register
from crib.errors import GenerationError, InvalidAction, InvalidCombination
from crib.imageio import decode_pbm, decode_ppm, encode_pbm, encode_ppm
from crib.painting import DEFAULT_SIZE, blank_canvas, index_to_unit, unit_to_index
from crib.rng import SplitMix64, derive_seed, seed_from_text

ROLES = ("head", "torso", "front_legs", "back_legs")
# part rectangles (x0, y0, w, h) inside a creature sprite
GRAMMAR = {
    "head": (0, 0, 14, 14),
    "torso": (14, 6, 30, 14),
    "front_legs": (14, 20, 12, 12),
    "back_legs": (30, 20, 12, 12),
}
SPRITE_SIZE = (44, 32)
LIBRARY_SIZE = 96
LATTICE = 16
MAX_OVERLAP = 0.10

HEAD_KINDS = ("block", "round", "beak", "horned")
TORSO_KINDS = ("box", "rounded", "striped", "spotted")


@dataclass(frozen=True, eq=False)
class Sprite:
    rgb: np.ndarray     # (h, w, 3) uint8
    alpha: np.ndarray   # (h, w) bool, True = opaque

    def __post_init__(self) -> None:
        if self.rgb.shape[:2] != self.alpha.shape:
            raise ValueError("rgb and alpha shapes differ")

    @property
    def width(self) -> int:
        return self.alpha.shape[1]

    @property
    def height(self) -> int:
        return self.alpha.shape[0]

    def __eq__(self, other) -> bool:
        return (isinstance(other, Sprite) and self.alpha.shape == other.alpha.shape
                and bool(np.array_equal(self.alpha, other.alpha))
                and bool(np.array_equal(self.rgb[self.alpha], other.rgb[other.alpha])))

    __hash__ = None

    def over_white(self) -> np.ndarray:
        out = blank_canvas(self.width, self.height)
        out[self.alpha] = self.rgb[self.alpha]
        return out


def crop(sprite: Sprite, x0: int, y0: int, w: int, h: int) -> Sprite:
    for v in (x0, y0, w, h):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise InvalidCombination(f"crop rectangle needs integers, got {v!r}")
    if w < 1 or h < 1 or x0 < 0 or y0 < 0 or x0 + w > sprite.width or y0 + h > sprite.height:
        raise InvalidCombination(f"crop rectangle {(x0, y0, w, h)} outside "
                                 f"{sprite.width}x{sprite.height} sprite")
    alpha = sprite.alpha[y0:y0 + h, x0:x0 + w].copy()
    if not alpha.any():
        raise InvalidCombination("crop contains no opaque pixels")
    rgb = sprite.rgb[y0:y0 + h, x0:x0 + w].copy()
    rgb[~alpha] = 0
    return Sprite(rgb, alpha)


def composite(parts: list[tuple[Sprite, int, int]], max_size: tuple[int, int]) -> Sprite:
    """Stamp parts in order onto a transparent surface; offsets are relative."""
    if not 2 <= len(parts) <= 4:
        raise InvalidCombination("composite takes two to four parts")
    x_lo = min(dx for _, dx, _ in parts)
    y_lo = min(dy for _, _, dy in parts)
    x_hi = max(dx + s.width for s, dx, _ in parts)
    y_hi = max(dy + s.height for s, _, dy in parts)
    w, h = x_hi - x_lo, y_hi - y_lo
    if w > max_size[0] or h > max_size[1]:
        raise InvalidCombination(f"composite of {w}x{h} does not fit the canvas")
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    alpha = np.zeros((h, w), dtype=bool)
    for s, dx, dy in parts:
        x, y = dx - x_lo, dy - y_lo
        region = alpha[y:y + s.height, x:x + s.width]
        rgb[y:y + s.height, x:x + s.width][s.alpha] = s.rgb[s.alpha]
        region |= s.alpha
    return Sprite(rgb, alpha)


def placement(x, y, sprite: Sprite, width: int, height: int) -> tuple[int, int]:
    if sprite.width > width or sprite.height > height:
        raise InvalidAction("sprite is larger than the canvas")
    return unit_to_index(x, width - sprite.width), unit_to_index(y, height - sprite.height)


class StampCanvas:
    """Canvas plus running L1 distance to the goal."""

    __slots__ = ("pixels", "goal", "diff")

    def __init__(self, pixels: np.ndarray, goal: np.ndarray, diff: int) -> None:
        self.pixels = pixels
        self.goal = goal
        self.diff = diff

    def stamp(self, sprite: Sprite, ox: int, oy: int) -> None:
        sl = (slice(oy, oy + sprite.height), slice(ox, ox + sprite.width))
        region = self.pixels[sl]
        goal = self.goal[sl]
        mask = sprite.alpha
        before = int(np.abs(region[mask] - goal[mask]).sum())
        region[mask] = sprite.rgb[mask]
        self.diff += int(np.abs(region[mask] - goal[mask]).sum()) - before

    def score(self) -> float:
        h, w = self.goal.shape[:2]
        return 1.0 - self.diff / (w * h * 765)


def lattice_offsets(extent: int, lattice: int = LATTICE) -> list[int]:
    return sorted({unit_to_index(i / (lattice - 1), extent) for i in range(lattice)})


def greedy_stamps(goal: np.ndarray, sprites: list[Sprite], lattice: int = LATTICE):
    """Greedy hill climb over (sprite, lattice placement) stamps.

    Each round applies the single stamp that lowers the L1 distance the most;
    ties go to the earliest sprite, then the smallest (oy, ox). Returns the
    final score and the list of (sprite index, ox, oy) stamps.
    """
    window = np.lib.stride_tricks.sliding_window_view
    goal16 = goal.astype(np.int32)
    h, w = goal.shape[:2]
    canvas = np.full_like(goal16, 255)
    cost = np.abs(canvas - goal16).sum(axis=-1)
    total = int(cost.sum())
    prepared = []
    for k, s in enumerate(sprites):
        if s.width > w or s.height > h:
            continue
        oys = lattice_offsets(h - s.height, lattice)
        oxs = lattice_offsets(w - s.width, lattice)
        gw = window(goal16, (s.height, s.width, 3))[:, :, 0][np.ix_(oys, oxs)]
        rgb = s.rgb.astype(np.int32)
        stamped = (np.abs(rgb - gw).sum(axis=-1) * s.alpha).sum(axis=(-2, -1))
        prepared.append((k, s, oys, oxs, stamped, s.alpha.astype(np.int32)))
    moves = []
    while True:
        best = (0, None)
        for k, s, oys, oxs, stamped, alpha in prepared:
            cw = window(cost, (s.height, s.width))[np.ix_(oys, oxs)]
            delta = stamped - np.einsum("ijkl,kl->ij", cw, alpha)
            i, j = np.unravel_index(int(np.argmin(delta)), delta.shape)
            if delta[i, j] < best[0]:
                best = (int(delta[i, j]), (k, oxs[j], oys[i]))
        if best[1] is None:
            break
        k, ox, oy = best[1]
        s = sprites[k]
        region = canvas[oy:oy + s.height, ox:ox + s.width]
        region[s.alpha] = s.rgb[s.alpha]
        cost[oy:oy + s.height, ox:ox + s.width] = np.abs(
            region - goal16[oy:oy + s.height, ox:ox + s.width]).sum(axis=-1)
        total += best[0]
        moves.append(best[1])
    return 1.0 - total / (w * h * 765), moves


def uncreative_max_photobash(goal: np.ndarray, sprites: list[Sprite]) -> float:
    return greedy_stamps(goal, sprites)[0]


def appears_whole(goal: np.ndarray, sprite: Sprite) -> bool:
    """True if every opaque pixel of ``sprite`` shows up intact somewhere in ``goal``.

    A canvas built only from whole-sprite stamps always shows its last stamp
    intact, so if no KB sprite appears whole the goal needs invention.
    """
    h, w = goal.shape[:2]
    if sprite.width > w or sprite.height > h:
        return False
    windows = np.lib.stride_tricks.sliding_window_view(goal, (sprite.height, sprite.width, 3))
    windows = windows[:, :, 0]  # (ny, nx, sh, sw, 3)
    match = (windows == sprite.rgb).all(axis=-1) | ~sprite.alpha
    return bool(match.all(axis=(-2, -1)).any())


def is_four_connected(mask: np.ndarray) -> bool:
    points = np.argwhere(mask)
    if len(points) == 0:
        return False
    seen = np.zeros_like(mask, dtype=bool)
    stack = [tuple(points[0])]
    seen[stack[0]] = True
    count = 0
    h, w = mask.shape
    while stack:
        y, x = stack.pop()
        count += 1
        for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
            if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                seen[ny, nx] = True
                stack.append((ny, nx))
    return count == len(points)


def coherent(part_masks: list[np.ndarray]) -> bool:
    """Parts overlap at most 10% of the smaller part and form one 4-connected blob."""
    for i in range(len(part_masks)):
        for j in range(i + 1, len(part_masks)):
            a, b = part_masks[i], part_masks[j]
            smaller = min(int(a.sum()), int(b.sum()))
            if int((a & b).sum()) > MAX_OVERLAP * smaller:
                return False
    union = np.zeros_like(part_masks[0])
    for m in part_masks:
        union |= m
    return is_four_connected(union)


# ---------------------------------------------------------------------------
# creature library
# ---------------------------------------------------------------------------

def _disc(h: int, w: int, cy: float, cx: float, r: float) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w]
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r + 0.5


def _draw_head(kind: str, main, accent) -> Sprite:
    w, h = GRAMMAR["head"][2:]
    alpha = np.zeros((h, w), dtype=bool)
    alpha[6:14, 11:14] = True  # neck reaching the torso
    if kind == "block":
        alpha[3:14, 0:14] = True
    elif kind == "round":
        alpha |= _disc(h, w, 7, 6.5, 6)
    elif kind == "beak":
        alpha[3:13, 4:14] = True
        alpha[7:10, 0:4] = True
    elif kind == "horned":
        alpha[4:14, 2:14] = True
        alpha[0:4, 3:5] = True
        alpha[0:4, 9:11] = True
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    rgb[alpha] = main
    rgb[6:8, 6:8] = accent
    rgb[~alpha] = 0
    return Sprite(rgb, alpha)


def _draw_torso(kind: str, main, accent) -> Sprite:
    w, h = GRAMMAR["torso"][2:]
    alpha = np.ones((h, w), dtype=bool)
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    rgb[:] = main
    if kind == "rounded":
        for y, x in ((0, 0), (0, w - 1), (h - 1, 0), (h - 1, w - 1)):
            alpha[y, x] = False
    elif kind == "striped":
        rgb[:, 2::5] = accent
    elif kind == "spotted":
        for y in range(2, h - 2, 5):
            for x in range(3 + (y % 2) * 2, w - 2, 6):
                rgb[y:y + 2, x:x + 2] = accent
    rgb[~alpha] = 0
    return Sprite(rgb, alpha)


def _draw_legs(length: int, thickness: int, main, accent) -> Sprite:
    w, h = GRAMMAR["front_legs"][2:]
    alpha = np.zeros((h, w), dtype=bool)
    for x in (1, 6):
        alpha[0:length, x:x + thickness] = True
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    rgb[alpha] = main
    hoof = np.zeros_like(alpha)
    hoof[length - 2:length] = True
    rgb[alpha & hoof] = accent
    return Sprite(rgb, alpha)


@dataclass(frozen=True, eq=False)
class Creature:
    index: int
    parts: dict          # role -> Sprite (part-sized)
    sprite: Sprite       # assembled whole creature
    traits: dict


def assemble(parts: dict) -> Sprite:
    w, h = SPRITE_SIZE
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    alpha = np.zeros((h, w), dtype=bool)
    for role in ROLES:
        x0, y0, pw, ph = GRAMMAR[role]
        s = parts[role]
        rgb[y0:y0 + ph, x0:x0 + pw][s.alpha] = s.rgb[s.alpha]
        alpha[y0:y0 + ph, x0:x0 + pw] |= s.alpha
    return Sprite(rgb, alpha)


def part_masks(parts: dict) -> list[np.ndarray]:
    w, h = SPRITE_SIZE
    masks = []
    for role in ROLES:
        x0, y0, pw, ph = GRAMMAR[role]
        m = np.zeros((h, w), dtype=bool)
        m[y0:y0 + ph, x0:x0 + pw] = parts[role].alpha
        masks.append(m)
    return masks


def _dark_color(rng: SplitMix64, used: set) -> tuple[int, int, int]:
    while True:
        c = (rng.randint(0, 220), rng.randint(0, 220), rng.randint(0, 220))
        if sum(c) <= 330 and c not in used:
            used.add(c)
            return c


@lru_cache(maxsize=8)
def creature_library(seed: int, size: int = LIBRARY_SIZE) -> tuple[Creature, ...]:
    rng = SplitMix64(seed)
    used: set = set()
    creatures = []
    for index in range(size):
        traits = {
            "head": rng.choice(HEAD_KINDS),
            "torso": rng.choice(TORSO_KINDS),
            "front_length": rng.randint(7, 12),
            "back_length": rng.randint(7, 12),
            "thickness": rng.randint(2, 3),
        }
        colors = [_dark_color(rng, used) for _ in range(4)]
        accent = _dark_color(rng, used)
        parts = {
            "head": _draw_head(traits["head"], colors[0], accent),
            "torso": _draw_torso(traits["torso"], colors[1], accent),
            "front_legs": _draw_legs(traits["front_length"], traits["thickness"], colors[2], accent),
            "back_legs": _draw_legs(traits["back_length"], traits["thickness"], colors[3], accent),
        }
        creatures.append(Creature(index, parts, assemble(parts), traits))
    return tuple(creatures)


def library_seed(master_seed: int) -> int:
    return derive_seed(derive_seed(master_seed, seed_from_text("photobash")), 1 << 32)


# ---------------------------------------------------------------------------
# domain
# ---------------------------------------------------------------------------

def _goal_state(problem: Problem):
    cached = problem.cache.get("goal16")
    if cached is None:
        goal16 = problem.goal.astype(np.int16)
        cached = (goal16, int(np.abs(255 - goal16).sum()))
        problem.cache["goal16"] = cached
    return cached


@register
class Photobash(Domain):
    name = "photobash"
    kb_size_range = (2, 9)
    actions = ("stamp",)
    operators = ("crop", "composite")

    def null_state(self, problem):
        goal16, null_diff = _goal_state(problem)
        return StampCanvas(np.full_like(goal16, 255), goal16, null_diff)

    def apply(self, problem, state: StampCanvas, action, args, resolve):
        if action != "stamp":
            raise InvalidAction(f"photobash has no action {action!r}")
        if set(args) != {"x", "y", "ref"}:
            raise InvalidAction("stamp takes exactly x, y and ref")
        sprite = resolve(args["ref"])
        h, w = state.goal.shape[:2]
        ox, oy = placement(args["x"], args["y"], sprite, w, h)
        state.stamp(sprite, ox, oy)
        return state

    def score(self, problem, state: StampCanvas):
        return state.score()

    def combine(self, problem, operator, parents, params):
        if operator == "crop":
            if len(parents) != 1:
                raise InvalidCombination("crop takes exactly one image")
            if set(params) != {"x0", "y0", "w", "h"}:
                raise InvalidCombination("crop needs x0, y0, w, h")
            return crop(parents[0], params["x0"], params["y0"], params["w"], params["h"])
        if operator == "composite":
            offsets = params.get("offsets")
            if set(params) != {"offsets"} or not isinstance(offsets, (list, tuple)):
                raise InvalidCombination("composite needs an offsets list")
            if len(offsets) != len(parents):
                raise InvalidCombination("one (dx, dy) offset per part")
            try:
                parts = [(s, int(dx), int(dy)) for s, (dx, dy) in zip(parents, offsets)]
            except (TypeError, ValueError):
                raise InvalidCombination(f"bad offsets {offsets!r}") from None
            size = (problem.params["width"], problem.params["height"])
            return composite(parts, size)
        raise InvalidCombination(f"photobash has no operator {operator!r}")

    def uncreative_max(self, problem):
        sprites = [e.payload for e in problem.initial_kb]
        return uncreative_max_photobash(problem.goal, sprites), False

    def rank_key(self, problem):
        return len({ref for part in problem.metadata["assembly"] for ref in part["sources"].values()})

    def certify_invention(self, problem):
        return not any(appears_whole(problem.goal, e.payload) for e in problem.initial_kb)

    def describe(self, payload: Sprite) -> str:
        return f"sprite {payload.width}x{payload.height} ({int(payload.alpha.sum())} opaque px)"

    def encode_payload(self, payload: Sprite, assets, stem):
        return {"image": assets.put(f"{stem}.ppm", encode_ppm(payload.rgb)),
                "mask": assets.put(f"{stem}.pbm", encode_pbm(payload.alpha))}

    def decode_payload(self, data, assets):
        rgb = decode_ppm(assets.get(data["image"]))
        alpha = decode_pbm(assets.get(data["mask"]))
        return Sprite(rgb, alpha)

    def encode_goal(self, goal, assets, stem):
        return {"canvas": assets.put(f"{stem}.goal.ppm", encode_ppm(goal))}

    def decode_goal(self, data, assets):
        return decode_ppm(assets.get(data["canvas"]))

    def generate(self, master_seed, count, size=DEFAULT_SIZE, **_):
        if count < 1:
            raise ValueError("count must be >= 1")
        width, height = size
        if width < SPRITE_SIZE[0] or height < SPRITE_SIZE[1]:
            raise GenerationError(f"photobash needs a canvas of at least "
                                  f"{SPRITE_SIZE[0]}x{SPRITE_SIZE[1]}")
        domain_seed = derive_seed(master_seed, seed_from_text(self.name))
        library = creature_library(library_seed(master_seed))
        return [generate_photobash_problem(derive_seed(domain_seed, i), library, width, height, i)
                for i in range(count)]


def _chimera_roles(rng: SplitMix64, library) -> dict:
    n_sources = rng.randint(2, 4)
    sources = rng.sample(range(len(library)), n_sources)
    roles = list(sources) + [rng.choice(sources) for _ in range(4 - n_sources)]
    rng.shuffle(roles)
    return dict(zip(ROLES, roles))


def generate_photobash_problem(seed: int, library, width: int, height: int,
                               index: int) -> Problem:
    rng = SplitMix64(seed)
    sw, sh = SPRITE_SIZE
    for _ in range(1000):
        n_chimeras = 2 if height >= 2 * sh and rng.chance(0.6) else 1
        chimeras = []
        for k in range(n_chimeras):
            roles = _chimera_roles(rng, library)
            parts = {role: library[src].parts[role] for role, src in roles.items()}
            if not coherent(part_masks(parts)):
                continue
            ox = rng.randint(0, width - sw)
            if n_chimeras == 2:
                oy = rng.randint(0, height - 2 * sh) + k * sh
            else:
                oy = rng.randint(0, height - sh)
            chimeras.append({"roles": roles, "offset": (ox, oy), "sprite": assemble(parts)})
        if len(chimeras) != n_chimeras:
            continue
        sources = sorted({src for c in chimeras for src in c["roles"].values()})
        if len(sources) > 9:
            continue
        kb_size = rng.randint(max(2, len(sources)), 9)
        others = [i for i in range(len(library)) if i not in sources]
        kb_creatures = sources + rng.sample(others, kb_size - len(sources))
        rng.shuffle(kb_creatures)
        goal = blank_canvas(width, height)
        for c in chimeras:
            ox, oy = c["offset"]
            s = c["sprite"]
            goal[oy:oy + sh, ox:ox + sw][s.alpha] = s.rgb[s.alpha]
        if any(appears_whole(goal, library[i].sprite) for i in kb_creatures):
            continue
        break
    else:
        raise GenerationError(f"photobash generator gave up for seed {seed}")

    kb = [KnowledgeElement(ref_name(i), library[c].sprite) for i, c in enumerate(kb_creatures)]
    ref_of = {c: ref_name(i) for i, c in enumerate(kb_creatures)}
    script: list[dict] = []
    next_ref = len(kb)

    def combine_step(operator, parents, params):
        nonlocal next_ref
        ref = ref_name(next_ref)
        next_ref += 1
        script.append({"op": "combine", "operator": operator, "parents": parents,
                       "params": params, "ref": ref})
        return ref

    assembly = []
    for c in chimeras:
        crops = []
        for role in ROLES:
            x0, y0, w, h = GRAMMAR[role]
            crops.append(combine_step("crop", [ref_of[c["roles"][role]]],
                                      {"x0": x0, "y0": y0, "w": w, "h": h}))
        whole = combine_step("composite", crops,
                             {"offsets": [list(GRAMMAR[r][:2]) for r in ROLES]})
        ox, oy = c["offset"]
        script.append({"op": "apply", "action": "stamp", "args": {
            "x": index_to_unit(ox, width - sw), "y": index_to_unit(oy, height - sh),
            "ref": whole}})
        assembly.append({"offset": [ox, oy],
                         "sources": {r: ref_of[c["roles"][r]] for r in ROLES},
                         "library": {r: c["roles"][r] for r in ROLES}})
    problem = Problem(
        id="", domain="photobash", initial_kb=kb, goal=goal,
        difficulty_rank=len(sources), gen_seed=seed,
        params={"width": width, "height": height},
        oracle_script=script,
        metadata={"gen_index": index, "assembly": assembly, "grammar": GRAMMAR,
                  "kb_library_index": kb_creatures},
        uncreative_max_exact=False,
    )
    problem.uncreative_max = uncreative_max_photobash(goal, [e.payload for e in kb])
    return problem
