"""Narrative domain.

Plot graphs are DAGs of story events; a story is a walk from a source to a
sink. ``submit`` replaces the current story with the graph's story closest
to the hidden goal, and ``amalgamate`` unifies two graphs into a new one.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from crib.core import Domain, KnowledgeElement, Problem, ref_name, register
from crib.errors import GenerationError, InvalidAction, InvalidCombination
from crib.rng import SplitMix64, derive_seed, seed_from_text
from crib.seqscore import lcs_length, proportional_lcs

THEME_TAGS = ("intro", "conflict", "resolution", "ending", "transition", "reward")
MAX_NODES = 20
EXACT_LIMIT = 10000
BEAM_WIDTH = 200
PLACEHOLDERS = {"A", "B"}
STOPWORDS = frozenset(
    "a an the and or of to in on at by for with from into onto is are was were be "
    "his her their its that this then".split())


@dataclass(frozen=True)
class EventNode:
    id: int
    text: str
    tag: str | None = None


@dataclass(frozen=True, eq=False)
class PlotGraph:
    name: str
    nodes: tuple[EventNode, ...]
    edges: tuple[tuple[int, int], ...]
    succ: dict = field(init=False, repr=False)
    key: tuple = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = len(self.nodes)
        if n == 0 or n > MAX_NODES:
            raise ValueError(f"plot graph needs 1..{MAX_NODES} nodes, got {n}")
        if [node.id for node in self.nodes] != list(range(n)):
            raise ValueError("node ids must be 0..n-1 in order")
        texts = [node.text for node in self.nodes]
        if any(not t for t in texts) or len(set(texts)) != n:
            raise ValueError("event texts must be non-empty and unique")
        for node in self.nodes:
            if node.tag is not None and node.tag not in THEME_TAGS:
                raise ValueError(f"unknown theme tag {node.tag!r}")
        succ: dict[int, list[int]] = {i: [] for i in range(n)}
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise ValueError(f"bad edge {(u, v)}")
            succ[u].append(v)
        object.__setattr__(self, "succ", {u: tuple(sorted(vs)) for u, vs in succ.items()})
        if topological_order(n, self.edges) is None:
            raise ValueError("plot graph contains a cycle")
        object.__setattr__(self, "key", (tuple((x.text, x.tag) for x in self.nodes),
                                         tuple(sorted(self.edges))))

    def __eq__(self, other) -> bool:
        return isinstance(other, PlotGraph) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    @property
    def texts(self) -> list[str]:
        return [node.text for node in self.nodes]

    def sources(self) -> list[int]:
        has_pred = {v for _, v in self.edges}
        return [i for i in range(len(self.nodes)) if i not in has_pred]

    def sinks(self) -> list[int]:
        return [i for i in range(len(self.nodes)) if not self.succ[i]]

    def count_stories(self) -> int:
        order = topological_order(len(self.nodes), self.edges)
        paths = {}
        for u in reversed(order):
            paths[u] = 1 if not self.succ[u] else sum(paths[v] for v in self.succ[u])
        return sum(paths[s] for s in self.sources())

    def stories(self):
        """Yield every source-to-sink node path, in lexicographic id order."""
        stack = [(s,) for s in reversed(self.sources())]
        while stack:
            path = stack.pop()
            nxt = self.succ[path[-1]]
            if not nxt:
                yield path
            else:
                for v in reversed(nxt):
                    stack.append(path + (v,))

    def story_text(self, path) -> tuple[str, ...]:
        return tuple(self.nodes[i].text for i in path)

    def contains_story(self, texts) -> bool:
        index = {node.text: node.id for node in self.nodes}
        try:
            path = [index[t] for t in texts]
        except KeyError:
            return False
        if not path or path[0] not in self.sources() or self.succ[path[-1]]:
            return False
        return all(v in self.succ[u] for u, v in zip(path, path[1:]))

    def to_json(self) -> dict:
        return {"name": self.name,
                "nodes": [{"id": x.id, "text": x.text, "tag": x.tag} for x in self.nodes],
                "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, data: dict) -> "PlotGraph":
        raw = sorted(data["nodes"], key=lambda x: x["id"])
        remap = {x["id"]: i for i, x in enumerate(raw)}
        nodes = tuple(EventNode(remap[x["id"]], x["text"], x.get("tag")) for x in raw)
        edges = tuple(sorted({(remap[u], remap[v]) for u, v in data["edges"]}))
        return cls(data["name"], nodes, edges)


def topological_order(n: int, edges) -> list[int] | None:
    indeg = [0] * n
    succ: dict[int, list[int]] = {i: [] for i in range(n)}
    for u, v in edges:
        indeg[v] += 1
        succ[u].append(v)
    ready = [i for i in range(n) if indeg[i] == 0]
    order = []
    while ready:
        u = ready.pop(0)
        order.append(u)
        for v in sorted(succ[u]):
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    return order if len(order) == n else None


def score_story(current, goal) -> float:
    if current is None:
        return 0.0
    return proportional_lcs(list(current), list(goal))


def closest_story(graph: PlotGraph, goal, exact_limit: int = EXACT_LIMIT,
                  beam_width: int = BEAM_WIDTH) -> tuple[tuple[int, ...], float, bool]:
    """Story of ``graph`` maximizing score_story against ``goal``.

    Ties go to the lexicographically smallest node-id sequence. Returns
    (path, score, exact).
    """
    goal = list(goal)
    if graph.count_stories() <= exact_limit:
        best_path, best = None, -1.0
        for path in graph.stories():
            s = score_story(graph.story_text(path), goal)
            if s > best or (s == best and path < best_path):
                best_path, best = path, s
        return best_path, best, True
    return _beam_story(graph, goal, beam_width) + (False,)


def _beam_story(graph: PlotGraph, goal, width: int):
    beam = [(s,) for s in graph.sources()]
    best_path, best = None, -1.0
    while beam:
        grown = []
        for path in beam:
            nxt = graph.succ[path[-1]]
            if not nxt:
                s = score_story(graph.story_text(path), goal)
                if s > best or (s == best and path < best_path):
                    best_path, best = path, s
                continue
            grown.extend(path + (v,) for v in nxt)
        grown.sort(key=lambda p: (-lcs_length(graph.story_text(p), goal), len(p), p))
        beam = grown[:width]
    return best_path, best


# ---------------------------------------------------------------------------
# amalgamation
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"[A-Za-z']+")


def content_words(text: str) -> frozenset[str]:
    return frozenset(t.lower() for t in _TOKEN.findall(text)
                     if t not in PLACEHOLDERS and t.lower() not in STOPWORDS)


def unification_pairs(a: PlotGraph, b: PlotGraph) -> list[tuple[int, int]]:
    """One-to-one node mapping used by amalgamate.

    Matched in three passes: identical texts, equal theme tags, then untagged
    nodes sharing at least two content words.
    """
    taken_a: set[int] = set()
    taken_b: set[int] = set()
    pairs = []

    def run(pred):
        for x in a.nodes:
            if x.id in taken_a:
                continue
            for y in b.nodes:
                if y.id not in taken_b and pred(x, y):
                    pairs.append((x.id, y.id))
                    taken_a.add(x.id)
                    taken_b.add(y.id)
                    break

    run(lambda x, y: x.text == y.text)
    run(lambda x, y: x.tag is not None and x.tag == y.tag)
    run(lambda x, y: x.tag is None and y.tag is None
        and len(content_words(x.text) & content_words(y.text)) >= 2)
    return sorted(pairs)


def _amalgam_structure(a: PlotGraph, b: PlotGraph):
    pairs = unification_pairs(a, b)
    a_to_b = dict(pairs)
    mapped_b = {bid: None for _, bid in pairs}
    slots = []  # ("u", a_id, b_id) | ("a", a_id) | ("b", b_id)
    for x in a.nodes:
        slots.append(("u", x.id, a_to_b[x.id]) if x.id in a_to_b else ("a", x.id))
    slots.extend(("b", y.id) for y in b.nodes if y.id not in mapped_b)
    index_a, index_b = {}, {}
    for i, slot in enumerate(slots):
        if slot[0] in ("u", "a"):
            index_a[slot[1]] = i
        if slot[0] == "u":
            index_b[slot[2]] = i
        if slot[0] == "b":
            index_b[slot[1]] = i
    edges = sorted({(index_a[u], index_a[v]) for u, v in a.edges}
                   | {(index_b[u], index_b[v]) for u, v in b.edges})
    valid = len(slots) <= MAX_NODES and topological_order(len(slots), edges) is not None
    return pairs, slots, edges, valid


def amalgam_choices(a: PlotGraph, b: PlotGraph) -> int:
    """Number of valid choice vectors for amalgamating ``a`` with ``b``."""
    pairs, _, _, valid = _amalgam_structure(a, b)
    return 2 ** len(pairs) if valid else 0


def amalgamate(a: PlotGraph, b: PlotGraph, choice_index: int) -> PlotGraph:
    pairs, slots, edges, valid = _amalgam_structure(a, b)
    if not valid:
        raise InvalidCombination(f"no valid amalgam of {a.name} and {b.name}")
    if isinstance(choice_index, bool) or not isinstance(choice_index, int) \
            or not 0 <= choice_index < 2 ** len(pairs):
        raise InvalidCombination(f"choice_index {choice_index!r} out of range "
                                 f"[0, {2 ** len(pairs)})")
    bit = {a_id: (choice_index >> j) & 1 for j, (a_id, _) in enumerate(pairs)}
    nodes = []
    for i, slot in enumerate(slots):
        if slot[0] == "a":
            src = a.nodes[slot[1]]
            nodes.append(EventNode(i, src.text, src.tag))
        elif slot[0] == "b":
            src = b.nodes[slot[1]]
            nodes.append(EventNode(i, src.text, src.tag))
        else:
            x, y = a.nodes[slot[1]], b.nodes[slot[2]]
            keep = y if bit[x.id] else x
            nodes.append(EventNode(i, keep.text, keep.tag or x.tag or y.tag))
    return PlotGraph(f"{a.name}+{b.name}", tuple(nodes), tuple(edges))


@lru_cache(maxsize=1)
def bundled_library() -> tuple[PlotGraph, ...]:
    folder = resources.files("crib") / "data" / "plot_graphs"
    graphs = []
    for entry in sorted(folder.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".json"):
            graphs.append(PlotGraph.from_json(json.loads(entry.read_text(encoding="utf-8"))))
    return tuple(graphs)


# ---------------------------------------------------------------------------
# domain
# ---------------------------------------------------------------------------

def _closest_cached(problem: Problem, graph: PlotGraph):
    memo = problem.cache.setdefault("closest", {})
    hit = memo.get(graph.key)
    if hit is None:
        path, _, exact = closest_story(graph, problem.goal)
        hit = (graph.story_text(path), exact)
        memo[graph.key] = hit
    return hit


@register
class Narrative(Domain):
    name = "narrative"
    kb_size_range = (2, 4)
    actions = ("submit",)
    operators = ("amalgamate",)

    def null_state(self, problem):
        return None

    def apply(self, problem, state, action, args, resolve):
        if action != "submit":
            raise InvalidAction(f"narrative has no action {action!r}")
        if set(args) != {"ref"}:
            raise InvalidAction("submit takes exactly one argument: ref")
        graph = resolve(args["ref"])
        return _closest_cached(problem, graph)[0]

    def score(self, problem, state):
        return score_story(state, problem.goal)

    def combine(self, problem, operator, parents, params):
        if operator != "amalgamate":
            raise InvalidCombination(f"narrative has no operator {operator!r}")
        if len(parents) != 2:
            raise InvalidCombination("amalgamate takes exactly two plot graphs")
        if set(params) != {"choice_index"}:
            raise InvalidCombination("amalgamate needs choice_index")
        return amalgamate(parents[0], parents[1], params["choice_index"])

    def uncreative_max(self, problem):
        best, exact = 0.0, True
        for e in problem.initial_kb:
            _, s, ex = closest_story(e.payload, problem.goal)
            best = max(best, s)
            exact = exact and ex
        return best, exact

    def rank_key(self, problem):
        return len(problem.initial_kb)

    def describe(self, payload: PlotGraph) -> str:
        return f"plot graph {payload.name} ({len(payload.nodes)} events)"

    def encode_payload(self, payload, assets, stem):
        return payload.to_json()

    def decode_payload(self, data, assets):
        return PlotGraph.from_json(data)

    def encode_goal(self, goal, assets, stem):
        return list(goal)

    def decode_goal(self, data, assets):
        return tuple(data)

    def generate(self, master_seed, count, library=None, **_):
        if count < 1:
            raise ValueError("count must be >= 1")
        library = tuple(library) if library is not None else bundled_library()
        if len(library) < 4:
            raise GenerationError("narrative generation needs at least 4 base plot graphs")
        domain_seed = derive_seed(master_seed, seed_from_text(self.name))
        return [generate_narrative_problem(derive_seed(domain_seed, i), library, i)
                for i in range(count)]


def random_story(rng: SplitMix64, graph: PlotGraph) -> tuple[int, ...]:
    node = rng.choice(graph.sources())
    path = [node]
    while graph.succ[node]:
        node = rng.choice(graph.succ[node])
        path.append(node)
    return tuple(path)


def generate_narrative_problem(seed: int, library, index: int) -> Problem:
    rng = SplitMix64(seed)
    for _ in range(2000):
        n_kb = rng.randint(2, 4)
        picked = rng.sample(range(len(library)), n_kb)
        a, b = library[picked[0]], library[picked[1]]
        n_choices = amalgam_choices(a, b)
        if n_choices == 0:
            continue
        choice = rng.randbelow(n_choices)
        merged = amalgamate(a, b, choice)
        goal = None
        only_a = set(a.texts) - set(b.texts)
        only_b = set(b.texts) - set(a.texts)
        for _walk in range(50):
            texts = merged.story_text(random_story(rng, merged))
            if len(texts) < 3:
                continue
            if not (only_a & set(texts)) or not (only_b & set(texts)):
                continue
            if any(library[i].contains_story(texts) for i in picked):
                continue
            goal = texts
            break
        if goal is not None:
            break
    else:
        raise GenerationError(f"narrative generator gave up for seed {seed}")
    order = list(picked)
    rng.shuffle(order)
    kb = [KnowledgeElement(ref_name(i), library[g]) for i, g in enumerate(order)]
    ref_a, ref_b = ref_name(order.index(picked[0])), ref_name(order.index(picked[1]))
    merged_ref = ref_name(len(kb))
    script = [
        {"op": "combine", "operator": "amalgamate", "parents": [ref_a, ref_b],
         "params": {"choice_index": choice}, "ref": merged_ref},
        {"op": "apply", "action": "submit", "args": {"ref": merged_ref}},
    ]
    problem = Problem(
        id="", domain="narrative", initial_kb=kb, goal=goal,
        difficulty_rank=n_kb, gen_seed=seed, oracle_script=script,
        metadata={"gen_index": index, "parents": [a.name, b.name], "choice_index": choice},
    )
    problem.uncreative_max, problem.uncreative_max_exact = Narrative().uncreative_max(problem)
    return problem
