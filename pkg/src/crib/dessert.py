"""Dessert-recipe domain.

Recipes are ingredient sets. The goal recipe is missing from the knowledge
base, but its ingredients are spread over several KB recipes and can be
pulled together with ``merge``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable

from crib.core import Domain, KnowledgeElement, Problem, ref_name, register
from crib.errors import GenerationError, InvalidAction, InvalidCombination
from crib.rng import SplitMix64, derive_seed, seed_from_text

KB_RANGE = (3, 130)
MIN_CORPUS = 100


def normalize(ingredient: str) -> str:
    return ingredient.strip().lower()


@dataclass(frozen=True)
class Recipe:
    name: str
    ingredients: frozenset[str]

    def __post_init__(self) -> None:
        if not self.ingredients:
            raise ValueError("a recipe needs at least one ingredient")

    @classmethod
    def of(cls, name: str, ingredients: Iterable[str]) -> "Recipe":
        return cls(name, frozenset(normalize(i) for i in ingredients))

    def to_json(self) -> dict:
        return {"name": self.name, "ingredients": sorted(self.ingredients)}

    @classmethod
    def from_json(cls, data: dict) -> "Recipe":
        return cls.of(data["name"], data["ingredients"])


def jaccard(a: frozenset, b: frozenset) -> float:
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def score_recipe(current: Recipe | None, goal: Recipe) -> float:
    if current is None:
        return 0.0
    return jaccard(current.ingredients, goal.ingredients)


def merge(parents: list[Recipe], selection: Iterable[str]) -> Recipe:
    if not 2 <= len(parents) <= 5:
        raise InvalidCombination("merge takes two to five recipes")
    if isinstance(selection, str):
        raise InvalidCombination("selection must be a collection of ingredients")
    chosen = frozenset(normalize(i) for i in selection)
    if not chosen:
        raise InvalidCombination("merge selection is empty")
    available = frozenset().union(*(p.ingredients for p in parents))
    missing = chosen - available
    if missing:
        raise InvalidCombination(f"ingredients not in any parent: {sorted(missing)}")
    return Recipe("merge(" + ", ".join(p.name for p in parents) + ")", chosen)


def uncreative_max_dessert(goal: Recipe, kb: Iterable[Recipe]) -> float:
    return max((jaccard(r.ingredients, goal.ingredients) for r in kb), default=0.0)


@lru_cache(maxsize=1)
def bundled_corpus() -> tuple[Recipe, ...]:
    text = (resources.files("crib") / "data" / "desserts.json").read_text(encoding="utf-8")
    return tuple(Recipe.from_json(r) for r in json.loads(text))


def merge_plan(cover: list[int], goal: frozenset, recipes: dict[int, frozenset]) -> list[tuple[list, frozenset]]:
    """Chain of merges (arity <= 5) whose last selection is ``goal``.

    Each step is (parents, selection) where a parent is a cover index or the
    string "prev" for the previous merge result.
    """
    steps = []
    first = cover[:5]
    covered = goal & frozenset().union(*(recipes[i] for i in first))
    steps.append((first if len(first) > 1 else first * 2, covered))
    rest = cover[5:]
    while rest:
        chunk, rest = rest[:4], rest[4:]
        covered = goal & (covered | frozenset().union(*(recipes[i] for i in chunk)))
        steps.append((["prev"] + chunk, covered))
    return steps


@register
class Dessert(Domain):
    name = "dessert"
    kb_size_range = KB_RANGE
    actions = ("submit",)
    operators = ("merge",)

    def null_state(self, problem):
        return None

    def apply(self, problem, state, action, args, resolve):
        if action != "submit":
            raise InvalidAction(f"dessert has no action {action!r}")
        if set(args) != {"ref"}:
            raise InvalidAction("submit takes exactly one argument: ref")
        return resolve(args["ref"])

    def score(self, problem, state):
        return score_recipe(state, problem.goal)

    def combine(self, problem, operator, parents, params):
        if operator != "merge":
            raise InvalidCombination(f"dessert has no operator {operator!r}")
        if set(params) != {"selection"}:
            raise InvalidCombination("merge needs a selection")
        return merge(list(parents), params["selection"])

    def uncreative_max(self, problem):
        return uncreative_max_dessert(problem.goal, (e.payload for e in problem.initial_kb)), True

    def rank_key(self, problem):
        return len(problem.initial_kb)

    def describe(self, payload: Recipe) -> str:
        return f"{payload.name} ({', '.join(sorted(payload.ingredients))})"

    def encode_payload(self, payload, assets, stem):
        return payload.to_json()

    def decode_payload(self, data, assets):
        return Recipe.from_json(data)

    def generate(self, master_seed, count, corpus=None, **_):
        if count < 1:
            raise ValueError("count must be >= 1")
        corpus = tuple(corpus) if corpus is not None else bundled_corpus()
        if len(corpus) < MIN_CORPUS:
            raise GenerationError(f"dessert generation needs >= {MIN_CORPUS} recipes")
        domain_seed = derive_seed(master_seed, seed_from_text(self.name))
        return [generate_dessert_problem(derive_seed(domain_seed, i), corpus, i)
                for i in range(count)]


def greedy_cover(rng: SplitMix64, goal: frozenset, candidates: list[int],
                 recipes: dict[int, frozenset]) -> list[int] | None:
    """Randomized greedy set cover: pick among candidates with at least half the best gain."""
    uncovered = set(goal)
    cover: list[int] = []
    while uncovered:
        gains = [(len(recipes[i] & uncovered), i) for i in candidates if i not in cover]
        best = max((g for g, _ in gains), default=0)
        if best == 0:
            return None
        pool = [i for g, i in gains if 2 * g >= best and g > 0]
        pick = rng.choice(pool)
        cover.append(pick)
        uncovered -= recipes[pick]
    return cover


def generate_dessert_problem(seed: int, corpus, index: int) -> Problem:
    rng = SplitMix64(seed)
    recipes = {i: r.ingredients for i, r in enumerate(corpus)}
    for _ in range(1000):
        g = rng.randbelow(len(corpus))
        goal = corpus[g]
        others = [i for i in range(len(corpus)) if recipes[i] != goal.ingredients]
        useful = [i for i in others if recipes[i] & goal.ingredients]
        cover = greedy_cover(rng, goal.ingredients, useful, recipes)
        if cover is None:
            continue
        members = list(cover)
        while len(members) < KB_RANGE[0]:
            extra = rng.choice(useful)
            if extra not in members:
                members.append(extra)
        spare = [i for i in others if i not in members]
        upper = min(KB_RANGE[1], len(members) + len(spare))
        if rng.chance(0.5):
            size = rng.randint(len(members), min(upper, len(members) + 3))
        else:
            size = rng.randint(len(members), upper)
        kb_ids = members + rng.sample(spare, size - len(members))
        break
    else:
        raise GenerationError(f"dessert generator gave up for seed {seed}")
    rng.shuffle(kb_ids)
    ref_of = {c: ref_name(i) for i, c in enumerate(kb_ids)}
    script: list[dict] = []
    prev = None
    for parents, selection in merge_plan(cover, goal.ingredients, recipes):
        ref = ref_name(len(kb_ids) + len(script))
        script.append({"op": "combine", "operator": "merge",
                       "parents": [prev if p == "prev" else ref_of[p] for p in parents],
                       "params": {"selection": sorted(selection)}, "ref": ref})
        prev = ref
    script.append({"op": "apply", "action": "submit", "args": {"ref": prev}})
    kb = [KnowledgeElement(ref_name(i), corpus[c]) for i, c in enumerate(kb_ids)]
    problem = Problem(
        id="", domain="dessert", initial_kb=kb, goal=goal,
        difficulty_rank=len(kb), gen_seed=seed, oracle_script=script,
        metadata={"gen_index": index, "goal_name": goal.name,
                  "cover": [ref_of[c] for c in cover]},
    )
    problem.uncreative_max = uncreative_max_dessert(goal, (e.payload for e in kb))
    return problem
