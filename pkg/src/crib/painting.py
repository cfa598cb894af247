"""Painting domain.

The agent paints single pixels of a white canvas with colors from its
palette. New colors are invented with the ``mix`` operator; the goal image
always contains at least one mixed color.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real

import numpy as np

from crib.core import (
    AssetSink,
    AssetSource,
    Domain,
    KnowledgeElement,
    Problem,
    ref_name,
    register,
)
from crib.errors import GenerationError, InvalidAction, InvalidCombination
from crib.imageio import decode_ppm, encode_ppm
from crib.rng import SplitMix64, derive_seed, seed_from_text

Color = tuple[int, int, int]

WHITE: Color = (255, 255, 255)
BLACK: Color = (0, 0, 0)

# 12-hue RGB color wheel: primaries, secondaries, tertiaries
COLOR_WHEEL: tuple[Color, ...] = (
    (255, 0, 0),      # red
    (255, 128, 0),    # orange
    (255, 255, 0),    # yellow
    (128, 255, 0),    # chartreuse
    (0, 255, 0),      # green
    (0, 255, 128),    # spring green
    (0, 255, 255),    # cyan
    (0, 128, 255),    # azure
    (0, 0, 255),      # blue
    (128, 0, 255),    # violet
    (255, 0, 255),    # magenta
    (255, 0, 128),    # rose
)

MIX_MODES = ("additive", "subtractive")
SHAPE_KINDS = ("rectangle", "circle", "triangle")
DEFAULT_SIZE = (64, 64)
COVERAGE_RANGE = (0.20, 0.40)


def mix(a: Color, b: Color, mode: str) -> Color:
    """Combine two colors channel-wise.

    ``additive`` is the clamped sum, ``subtractive`` the product scaled back
    to 0-255 (a filter model).
    """
    if mode == "additive":
        return tuple(min(255, x + y) for x, y in zip(a, b))
    if mode == "subtractive":
        return tuple(int(math.floor(x * y / 255 + 0.5)) for x, y in zip(a, b))
    raise InvalidCombination(f"unknown mix mode {mode!r}")


def as_color(value) -> Color:
    try:
        r, g, b = (int(c) for c in value)
    except (TypeError, ValueError):
        raise InvalidCombination(f"not a color: {value!r}") from None
    if not all(0 <= c <= 255 for c in (r, g, b)):
        raise InvalidCombination(f"channel out of range: {value!r}")
    return (r, g, b)


def score_canvas(current: np.ndarray, goal: np.ndarray) -> float:
    """1 - (sum of per-pixel L1 RGB distance) / (W * H * 3 * 255)."""
    current = np.asarray(current)
    goal = np.asarray(goal)
    if current.shape != goal.shape:
        raise ValueError(f"canvas shapes differ: {current.shape} vs {goal.shape}")
    h, w = goal.shape[:2]
    diff = int(np.abs(current.astype(np.int64) - goal.astype(np.int64)).sum())
    return 1.0 - diff / (w * h * 765)


def blank_canvas(width: int, height: int) -> np.ndarray:
    return np.full((height, width, 3), 255, dtype=np.uint8)


def unit_to_index(v, extent: int) -> int:
    """Map a coordinate in [0, 1] to an integer in [0, extent]."""
    if isinstance(v, bool) or not isinstance(v, Real) or not 0.0 <= v <= 1.0:
        raise InvalidAction(f"coordinate must be a real in [0, 1], got {v!r}")
    return min(extent, int(math.floor(v * extent)))


def index_to_unit(i: int, extent: int) -> float:
    """Inverse of :func:`unit_to_index` that survives floating point rounding."""
    if extent == 0 or i >= extent:
        return 1.0 if extent else 0.0
    return (i + 0.5) / extent


class Canvas:
    """Row-major pixel grid that tracks its L1 distance to a goal."""

    __slots__ = ("width", "height", "pixels", "goal", "diff")

    def __init__(self, width: int, height: int, pixels: list, goal: list, diff: int):
        self.width = width
        self.height = height
        self.pixels = pixels
        self.goal = goal
        self.diff = diff

    def set(self, index: int, color: Color) -> None:
        g = self.goal[index]
        old = self.pixels[index]
        self.diff += (abs(color[0] - g[0]) + abs(color[1] - g[1]) + abs(color[2] - g[2])
                      - abs(old[0] - g[0]) - abs(old[1] - g[1]) - abs(old[2] - g[2]))
        self.pixels[index] = color

    def score(self) -> float:
        return 1.0 - self.diff / (self.width * self.height * 765)

    def to_array(self) -> np.ndarray:
        return np.array(self.pixels, dtype=np.uint8).reshape(self.height, self.width, 3)


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    x0: int
    y0: int
    w: int
    h: int
    fill: Color

    def mask(self, width: int, height: int) -> np.ndarray:
        yy, xx = np.mgrid[0:height, 0:width]
        if self.kind == "rectangle":
            m = (xx >= self.x0) & (xx < self.x0 + self.w) & (yy >= self.y0) & (yy < self.y0 + self.h)
        elif self.kind == "circle":
            r = (self.w - 1) / 2
            cx, cy = self.x0 + r, self.y0 + r
            m = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r + 0.5
        elif self.kind == "triangle":
            # apex centred on the top edge, base on the bottom row
            cx = self.x0 + (self.w - 1) / 2
            t = (yy - self.y0) / max(1, self.h - 1)
            half = t * (self.w - 1) / 2
            m = (yy >= self.y0) & (yy < self.y0 + self.h) & (np.abs(xx - cx) <= half + 0.5)
        else:
            raise ValueError(self.kind)
        return m

    def to_json(self) -> dict:
        return {"kind": self.kind, "x0": self.x0, "y0": self.y0, "w": self.w,
                "h": self.h, "fill": list(self.fill)}


def render_shapes(shapes: list[ShapeSpec], width: int, height: int) -> np.ndarray:
    canvas = blank_canvas(width, height)
    for shape in shapes:
        canvas[shape.mask(width, height)] = shape.fill
    return canvas


def uncreative_max_painting(goal: np.ndarray, palette: list[Color]) -> float:
    """Exact no-invention optimum: every pixel independently takes its nearest color."""
    colors = np.array(list(palette) + [WHITE], dtype=np.int64)
    g = goal.astype(np.int64)
    dist = np.abs(g[:, :, None, :] - colors[None, None, :, :]).sum(axis=-1)
    h, w = goal.shape[:2]
    return 1.0 - int(dist.min(axis=-1).sum()) / (w * h * 765)


def _goal_table(problem: Problem):
    table = problem.cache.get("goal_table")
    if table is None:
        goal = problem.goal
        h, w = goal.shape[:2]
        pixels = [tuple(int(c) for c in px) for px in goal.reshape(-1, 3)]
        null_diff = sum(765 - sum(px) for px in pixels)
        table = (w, h, pixels, null_diff)
        problem.cache["goal_table"] = table
    return table


@register
class Painting(Domain):
    name = "painting"
    kb_size_range = (2, 6)
    actions = ("paint",)
    operators = ("mix",)

    def null_state(self, problem: Problem) -> Canvas:
        w, h, goal_pixels, null_diff = _goal_table(problem)
        return Canvas(w, h, [WHITE] * (w * h), goal_pixels, null_diff)

    def apply(self, problem, state: Canvas, action, args, resolve):
        if action != "paint":
            raise InvalidAction(f"painting has no action {action!r}")
        try:
            x, y, ref = args["x"], args["y"], args["ref"]
        except KeyError as exc:
            raise InvalidAction(f"paint is missing argument {exc}") from None
        if set(args) - {"x", "y", "ref"}:
            raise InvalidAction(f"unexpected paint arguments {sorted(args)}")
        px = unit_to_index(x, state.width - 1)
        py = unit_to_index(y, state.height - 1)
        color = resolve(ref)
        state.set(py * state.width + px, color)
        return state

    def score(self, problem, state: Canvas) -> float:
        return state.score()

    def combine(self, problem, operator, parents, params):
        if operator != "mix":
            raise InvalidCombination(f"painting has no operator {operator!r}")
        if len(parents) != 2:
            raise InvalidCombination("mix takes exactly two colors")
        if set(params) != {"mode"}:
            raise InvalidCombination("mix needs exactly one parameter: mode")
        return mix(as_color(parents[0]), as_color(parents[1]), params["mode"])

    def uncreative_max(self, problem):
        palette = [e.payload for e in problem.initial_kb]
        return uncreative_max_painting(problem.goal, palette), True

    def describe(self, payload) -> str:
        return "rgb(%d,%d,%d)" % tuple(payload)

    def rank_key(self, problem):
        pixels = {tuple(int(c) for c in px) for px in problem.goal.reshape(-1, 3)}
        return len(problem.initial_kb) + len(pixels - {WHITE}) + len(problem.metadata["shapes"])

    def encode_payload(self, payload, assets, stem):
        return list(payload)

    def decode_payload(self, data, assets):
        return tuple(data)

    def encode_goal(self, goal, assets: AssetSink, stem):
        return {"canvas": assets.put(f"{stem}.goal.ppm", encode_ppm(goal))}

    def decode_goal(self, data, assets: AssetSource):
        return decode_ppm(assets.get(data["canvas"]))

    def generate(self, master_seed, count, size=DEFAULT_SIZE, **_):
        if count < 1:
            raise ValueError("count must be >= 1")
        width, height = size
        domain_seed = derive_seed(master_seed, seed_from_text(self.name))
        drafts = []
        for index in range(count):
            seed = derive_seed(domain_seed, index)
            drafts.append(generate_painting_problem(seed, width, height, index))
        return drafts


def _mix_candidates(base: list[Color]) -> dict[Color, tuple[int, int, str]]:
    found: dict[Color, tuple[int, int, str]] = {}
    for i in range(len(base)):
        for j in range(i + 1, len(base)):
            for mode in MIX_MODES:
                c = mix(base[i], base[j], mode)
                if c != WHITE and c not in base and c not in found:
                    found[c] = (i, j, mode)
    return found


def _random_shape(rng: SplitMix64, width: int, height: int, area: float, fill: Color) -> ShapeSpec:
    kind = rng.choice(SHAPE_KINDS)
    area = max(4.0, area * rng.uniform(0.6, 1.4))
    if kind == "circle":
        d = int(round(math.sqrt(area * 4 / math.pi)))
        w = h = max(2, min(d, width, height))
    else:
        aspect = rng.uniform(0.5, 2.0)
        if kind == "triangle":
            area *= 2
        w = max(2, min(width, int(round(math.sqrt(area * aspect)))))
        h = max(2, min(height, int(round(area / w))))
    x0 = rng.randint(0, width - w)
    y0 = rng.randint(0, height - h)
    return ShapeSpec(kind, x0, y0, w, h, fill)


def generate_painting_problem(seed: int, width: int, height: int, index: int) -> Problem:
    rng = SplitMix64(seed)
    total = width * height
    for _ in range(1000):
        base = rng.sample(COLOR_WHEEL, rng.randint(2, 6))
        candidates = _mix_candidates(base)
        if not candidates:
            continue
        invented = rng.sample(sorted(candidates), rng.randint(1, min(3, len(candidates))))
        n_shapes = rng.randint(1, 8)
        for _attempt in range(50):
            coverage = rng.uniform(0.26, 0.39)
            fills = [rng.choice(base + invented) for _ in range(n_shapes)]
            fills[rng.randbelow(n_shapes)] = rng.choice(invented)
            shapes = [_random_shape(rng, width, height, coverage * total / n_shapes, f) for f in fills]
            goal = render_shapes(shapes, width, height)
            painted = np.any(goal != 255, axis=-1)
            frac = painted.sum() / total
            if not COVERAGE_RANGE[0] <= frac <= COVERAGE_RANGE[1]:
                continue
            visible = {tuple(int(v) for v in px) for px in goal[painted]}
            if any(v not in base for v in visible):
                break
        else:
            continue
        return _assemble_painting(seed, index, base, candidates, invented, shapes, goal, visible)
    raise GenerationError(f"painting generator gave up for seed {seed}")


def _assemble_painting(seed, index, base, candidates, invented, shapes, goal, visible) -> Problem:
    height, width = goal.shape[:2]
    kb = [KnowledgeElement(ref_name(i), c) for i, c in enumerate(base)]
    refs = {c: ref_name(i) for i, c in enumerate(base)}
    script: list[dict] = []
    for c in invented:
        i, j, mode = candidates[c]
        ref = ref_name(len(base) + len(script))
        script.append({"op": "combine", "operator": "mix", "parents": [ref_name(i), ref_name(j)],
                       "params": {"mode": mode}, "ref": ref})
        refs[c] = ref
    for py in range(height):
        for px in range(width):
            c = tuple(int(v) for v in goal[py, px])
            if c != WHITE:
                script.append({"op": "apply", "action": "paint", "args": {
                    "x": index_to_unit(px, width - 1), "y": index_to_unit(py, height - 1),
                    "ref": refs[c]}})
    colors = len(visible)
    problem = Problem(
        id="", domain="painting", initial_kb=kb, goal=goal,
        difficulty_rank=len(base) + colors + len(shapes), gen_seed=seed,
        params={"width": width, "height": height},
        oracle_script=script,
        metadata={"gen_index": index, "shapes": [s.to_json() for s in shapes],
                  "invented_colors": [list(c) for c in invented]},
    )
    problem.uncreative_max = uncreative_max_painting(goal, base)
    return problem
