"""Reference agents.

Every agent works through a :class:`~crib.core.Session` only: it reads the
knowledge base listing, applies actions, clears, scores and combines. None of
them can see the goal.
"""

from __future__ import annotations

from dataclasses import dataclass

from crib.core import Problem, Session, open_session, replay
from crib.errors import CribError, InvalidCombination
from crib.language import MAX_SENTENCE
from crib.narrative import amalgam_choices
from crib.rng import SplitMix64

AGENT_NAMES = ("null", "random", "ga100", "ga1000", "oracle", "uncreative-max")
INVENT_RATE = 0.1
PAINT_GENES = 64
MAX_STAMPS = 4
DESSERT_SLOTS = 10


@dataclass(frozen=True)
class GaConfig:
    population: int
    iterations: int
    mutation_rate: float
    parents_selected: int
    children_per_iteration: int
    invent_rate: float = INVENT_RATE

    def __post_init__(self) -> None:
        if self.population < 1 or self.iterations < 0:
            raise ValueError("population must be >= 1 and iterations >= 0")
        if not 0.0 <= self.mutation_rate <= 1.0 or not 0.0 <= self.invent_rate <= 1.0:
            raise ValueError("rates must lie in [0, 1]")
        if not 1 <= self.parents_selected <= self.population:
            raise ValueError("parents_selected must be in [1, population]")
        if not 1 <= self.children_per_iteration <= self.population:
            raise ValueError("children_per_iteration must be in [1, population]")

    @property
    def evaluations(self) -> int:
        return self.population + self.iterations * self.children_per_iteration


GA_100 = GaConfig(100, 100, 0.7, 20, 20)
GA_1000 = GaConfig(1000, 1000, 0.7, 20, 20)
GA_PRESETS = {"ga100": GA_100, "ga1000": GA_1000}


@dataclass(frozen=True)
class AgentResult:
    score: float
    score_calls: int
    apply_calls: int
    combine_calls: int


# ---------------------------------------------------------------------------
# per-domain genome handling
# ---------------------------------------------------------------------------

class Genes:
    """Domain-specific answer representation used by the random agent and the GA.

    A genome is a tuple of hashable genes. ``render`` turns it into a
    clear + apply sequence on the session.
    """

    min_len = 1
    max_len = 1

    def __init__(self, session: Session, rng: SplitMix64, invent_rate: float = 0.0) -> None:
        self.session = session
        self.rng = rng
        self.invent_rate = invent_rate
        self.pool = session.initial_ref_ids()
        self._by_value: dict = {}
        for r in self.pool:
            self._by_value.setdefault(self.value_key(session.payload(r)), r)
        self._memo: dict = {}

    def value_key(self, payload):
        return payload

    # invention ------------------------------------------------------------
    def combine(self, operator: str, parents: list[str], **params) -> str | None:
        """Combine once per distinct request; returns a pool ref or None."""
        key = (operator, tuple(parents), repr(sorted(params.items())))
        if key in self._memo:
            return self._memo[key]
        try:
            ref = self.session.combine(operator, parents, **params)
        except InvalidCombination:
            ref = None
        if ref is not None:
            vk = self.value_key(self.session.payload(ref))
            if vk in self._by_value:
                ref = self._by_value[vk]
            else:
                self._by_value[vk] = ref
                self.pool.append(ref)
        self._memo[key] = ref
        return ref

    def invent(self) -> str | None:
        return None

    def draw_ref(self) -> str:
        if self.invent_rate and self.rng.chance(self.invent_rate):
            ref = self.invent()
            if ref is not None:
                return ref
        return self.rng.choice(self.pool)

    # genome operations ----------------------------------------------------
    def random_gene(self):
        return self.draw_ref()

    def mutate_gene(self, gene):
        return self.random_gene()

    def random_genome(self) -> tuple:
        n = self.rng.randint(self.min_len, self.max_len)
        return tuple(self.random_gene() for _ in range(n))

    def render(self, genome: tuple) -> None:
        raise NotImplementedError

    # random agent ---------------------------------------------------------
    def random_step(self) -> None:
        """One random action on top of the current submission."""
        self.session.apply(**self.random_action())

    def random_action(self) -> dict:
        raise NotImplementedError


class PaintingGenes(Genes):
    min_len = max_len = PAINT_GENES

    def invent(self):
        a, b = self.rng.choice(self.pool), self.rng.choice(self.pool)
        return self.combine("mix", [a, b], mode=self.rng.choice(("additive", "subtractive")))

    def random_gene(self):
        return (self.rng.random(), self.rng.random(), self.draw_ref())

    def mutate_gene(self, gene):
        x, y, ref = gene
        if self.rng.chance(0.5):
            return (x, y, self.draw_ref())
        return (self.rng.random(), self.rng.random(), ref)

    def render(self, genome):
        self.session.clear()
        for x, y, ref in genome:
            self.session.apply("paint", x=x, y=y, ref=ref)

    def random_action(self):
        return {"action": "paint", "x": self.rng.random(), "y": self.rng.random(),
                "ref": self.rng.choice(self.pool)}


class LanguageGenes(Genes):
    min_len, max_len = 1, MAX_SENTENCE

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self._length = 0

    def invent(self):
        parents = [self.rng.choice(self.pool) for _ in range(self.rng.randint(2, 3))]
        return self.combine("concat", parents)

    def render(self, genome):
        self.session.clear()
        for ref in genome:
            self.session.apply("add_word", ref=ref)

    def random_step(self):
        if self._length >= MAX_SENTENCE:
            self.session.clear()
            self._length = 0
        self.session.apply("add_word", ref=self.rng.choice(self.pool))
        self._length += 1


class PhotobashGenes(Genes):
    min_len, max_len = 1, MAX_STAMPS

    def value_key(self, payload):
        return (payload.alpha.shape, payload.alpha.tobytes(), payload.rgb[payload.alpha].tobytes())

    def invent(self):
        width, height = self.session.params["width"], self.session.params["height"]
        if self.rng.chance(0.5):
            ref = self.rng.choice(self.pool)
            s = self.session.payload(ref)
            w, h = self.rng.randint(1, s.width), self.rng.randint(1, s.height)
            x0, y0 = self.rng.randint(0, s.width - w), self.rng.randint(0, s.height - h)
            return self.combine("crop", [ref], x0=x0, y0=y0, w=w, h=h)
        parents = [self.rng.choice(self.pool) for _ in range(self.rng.randint(2, 4))]
        offsets = []
        for ref in parents:
            s = self.session.payload(ref)
            offsets.append([self.rng.randint(0, width - s.width),
                            self.rng.randint(0, height - s.height)])
        return self.combine("composite", parents, offsets=offsets)

    def random_gene(self):
        return (self.draw_ref(), self.rng.random(), self.rng.random())

    def mutate_gene(self, gene):
        ref, x, y = gene
        if self.rng.chance(0.5):
            return (self.draw_ref(), x, y)
        return (ref, self.rng.random(), self.rng.random())

    def render(self, genome):
        self.session.clear()
        for ref, x, y in genome:
            self.session.apply("stamp", x=x, y=y, ref=ref)

    def random_action(self):
        return {"action": "stamp", "x": self.rng.random(), "y": self.rng.random(),
                "ref": self.rng.choice(self.pool)}


class NarrativeGenes(Genes):
    def value_key(self, payload):
        return payload.key

    def invent(self):
        a, b = self.rng.choice(self.pool), self.rng.choice(self.pool)
        if a == b:
            return None
        n = amalgam_choices(self.session.payload(a), self.session.payload(b))
        if n == 0:
            return None
        return self.combine("amalgamate", [a, b], choice_index=self.rng.randbelow(n))

    def render(self, genome):
        self.session.clear()
        self.session.apply("submit", ref=genome[0])

    def random_action(self):
        return {"action": "submit", "ref": self.rng.choice(self.pool)}


class DessertGenes(Genes):
    """Genes are ingredient slots (an ingredient or None).

    A genome is rendered by submitting the KB recipe with exactly that
    ingredient set, merging one into existence from a cover of initial
    recipes when needed.
    """

    min_len = max_len = DESSERT_SLOTS

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.recipes = {r: self.session.payload(r).ingredients for r in self.pool}
        self.ingredients = sorted(frozenset().union(*self.recipes.values()))
        self._selection: dict[frozenset, str] = {}
        for r in self.pool:
            self._selection.setdefault(self.recipes[r], r)

    def value_key(self, payload):
        return payload.ingredients

    def random_gene(self):
        if self.rng.chance(0.3):
            return None
        ingredients = sorted(self.recipes[self.rng.choice(self.pool)])
        return self.rng.choice(ingredients)

    def random_genome(self):
        # start from a KB recipe so the initial population sits near the baseline
        base = sorted(self.recipes[self.rng.choice(self.pool)])[:DESSERT_SLOTS]
        genes = base + [None] * (DESSERT_SLOTS - len(base))
        self.rng.shuffle(genes)
        return tuple(genes)

    def _cover(self, wanted: frozenset) -> list[str]:
        uncovered = set(wanted)
        cover = []
        while uncovered:
            best = max(self.pool, key=lambda r: len(self.recipes.get(r, frozenset()) & uncovered))
            cover.append(best)
            uncovered -= self.recipes[best]
        return cover

    def ref_for(self, wanted: frozenset) -> str:
        ref = self._selection.get(wanted)
        if ref is not None:
            return ref
        cover = self._cover(wanted)
        if len(cover) == 1:
            cover = cover * 2
        prev = None
        covered = frozenset()
        while cover:
            chunk = cover[:5] if prev is None else [prev] + cover[:4]
            cover = cover[5:] if prev is None else cover[4:]
            covered = wanted & (covered | frozenset().union(
                *(self.recipes[r] for r in chunk if r in self.recipes)))
            prev = self.session.combine("merge", chunk, selection=sorted(covered))
        self._selection[wanted] = prev
        return prev

    def render(self, genome):
        self.session.clear()
        wanted = frozenset(g for g in genome if g is not None)
        if wanted:
            self.session.apply("submit", ref=self.ref_for(wanted))

    def random_action(self):
        return {"action": "submit", "ref": self.rng.choice(self.pool)}


GENES = {
    "painting": PaintingGenes,
    "language": LanguageGenes,
    "photobash": PhotobashGenes,
    "narrative": NarrativeGenes,
    "dessert": DessertGenes,
}


# ---------------------------------------------------------------------------
# agents
# ---------------------------------------------------------------------------

def run_null(session: Session) -> float:
    return session.score()


def run_random(session: Session, rng: SplitMix64) -> float:
    """Apply a random KB element with random parameters, score, repeat."""
    genes = GENES[session.domain_name](session, rng)
    best = 0.0
    while not session.exhausted:
        genes.random_step()
        best = max(best, session.score())
    return best


def run_ga(session: Session, config: GaConfig, rng: SplitMix64, trace: list | None = None) -> float:
    """Steady-state GA: the best parents breed, children replace the worst.

    ``trace`` (if given) receives the population best after every iteration.
    """
    genes = GENES[session.domain_name](session, rng, config.invent_rate)
    best = 0.0

    def evaluate(genome):
        nonlocal best
        if session.exhausted:
            return None
        genes.render(genome)
        s = session.score()
        best = max(best, s)
        return s

    population: list[tuple[float, int, tuple]] = []
    born = 0
    for _ in range(config.population):
        g = genes.random_genome()
        s = evaluate(g)
        if s is None:
            return best
        population.append((s, born, g))
        born += 1

    for _ in range(config.iterations):
        # higher score first, older individual first on ties
        population.sort(key=lambda p: (-p[0], p[1]))
        parents = [g for _, _, g in population[: config.parents_selected]]
        children = []
        for _ in range(config.children_per_iteration):
            child = _crossover(rng, rng.choice(parents), rng.choice(parents))
            child = tuple(genes.mutate_gene(x) if rng.chance(config.mutation_rate) else x
                          for x in child)
            s = evaluate(child)
            if s is None:
                break
            children.append((s, born, child))
            born += 1
        if children:
            population[len(population) - len(children):] = children
        if trace is not None:
            trace.append(max(p[0] for p in population))
        if session.exhausted:
            break
    return best


def _crossover(rng: SplitMix64, a: tuple, b: tuple) -> tuple:
    """Uniform crossover; the child takes the length of a random parent."""
    n = len(a) if rng.chance(0.5) else len(b)
    out = []
    for i in range(n):
        if i < len(a) and i < len(b):
            out.append(a[i] if rng.chance(0.5) else b[i])
        else:
            out.append(a[i] if i < len(a) else b[i])
    return tuple(out)


def run_oracle(problem: Problem, budget: int = 1) -> float:
    if problem.oracle_script is None:
        raise CribError(f"problem {problem.id} has no oracle script")
    return replay(open_session(problem, budget), problem.oracle_script)


def run_agent(name: str, problem: Problem, budget: int, seed: int,
              ga: GaConfig | None = None) -> AgentResult:
    """Run one named agent on one problem and report its score and usage.

    ``ga`` replaces the preset constants of ``ga100``/``ga1000``.
    """
    if name == "uncreative-max":
        if problem.uncreative_max is None:
            raise CribError(f"problem {problem.id} has no cached uncreative-max")
        return AgentResult(problem.uncreative_max, 0, 0, 0)
    session = open_session(problem, budget)
    rng = SplitMix64(seed)
    if name == "null":
        score = run_null(session)
    elif name == "random":
        score = run_random(session, rng)
    elif name in GA_PRESETS:
        score = run_ga(session, ga or GA_PRESETS[name], rng)
    elif name == "oracle":
        score = replay(session, problem.oracle_script or [])
    else:
        raise ValueError(f"unknown agent {name!r}; choose from {', '.join(AGENT_NAMES)}")
    return AgentResult(score, session.score_calls, session.apply_calls, session.combine_calls)
