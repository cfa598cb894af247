"""Problem and session model shared by all five domains.

A :class:`Session` is the only object agents talk to. It owns the knowledge
base ledger, the current submission and the budget counters, and keeps the
hidden goal behind a scorer closure.
"""

from __future__ import annotations

import importlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Any, Callable, ClassVar, Iterable

from crib.errors import (
    BudgetExceeded,
    CribError,
    InvalidCombination,
    InvalidReference,
    VerificationError,
)

DOMAINS = ("painting", "language", "photobash", "narrative", "dessert")
DEFAULT_BUDGET = 10000

INITIAL = "initial"
INVENTED = "invented"


@dataclass(frozen=True)
class Derivation:
    """How an invented element was produced."""

    operator: str
    parents: tuple[str, ...]
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"operator": self.operator, "parents": list(self.parents), "params": self.params}


@dataclass(frozen=True)
class KnowledgeElement:
    ref_id: str
    payload: Any
    provenance: str = INITIAL
    recipe: Derivation | None = None

    def __post_init__(self) -> None:
        if self.provenance == INVENTED and self.recipe is None:
            raise ValueError("invented elements must carry a recipe")
        if self.provenance == INITIAL and self.recipe is not None:
            raise ValueError("initial elements never carry a recipe")


@dataclass
class Problem:
    id: str
    domain: str
    initial_kb: list[KnowledgeElement]
    goal: Any
    difficulty_rank: int
    gen_seed: int
    params: dict = field(default_factory=dict)
    oracle_script: list[dict] | None = None
    uncreative_max: float | None = None
    uncreative_max_exact: bool = True
    metadata: dict = field(default_factory=dict)
    # engine-side memo (precomputed goal tables); never serialized
    cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def public(self) -> "Problem":
        """Copy with every engine-only field removed."""
        return replace(self, goal=None, oracle_script=None, metadata={},
                       uncreative_max=None)


@dataclass(frozen=True)
class KBEntry:
    ref_id: str
    provenance: str
    summary: str
    payload: Any


class Domain(ABC):
    """Plug-in interface each domain module implements.

    ``state`` objects are private to the domain; the session only stores and
    hands them back.
    """

    name: ClassVar[str]
    kb_size_range: ClassVar[tuple[int, int]]
    actions: ClassVar[tuple[str, ...]]
    operators: ClassVar[tuple[str, ...]]

    @abstractmethod
    def null_state(self, problem: Problem) -> Any: ...

    @abstractmethod
    def apply(self, problem: Problem, state: Any, action: str, args: dict,
              resolve: Callable[[Any], Any]) -> Any: ...

    @abstractmethod
    def score(self, problem: Problem, state: Any) -> float: ...

    @abstractmethod
    def combine(self, problem: Problem, operator: str, parents: list[Any],
                params: dict) -> Any: ...

    @abstractmethod
    def uncreative_max(self, problem: Problem) -> tuple[float, bool]:
        """Best score reachable without combine(), and whether it is exact."""

    @abstractmethod
    def generate(self, master_seed: int, count: int, **options) -> list[Problem]: ...

    def rank_key(self, problem: Problem) -> int:
        """Difficulty key recomputed from the problem itself (used by verification)."""
        return problem.difficulty_rank

    def certify_invention(self, problem: Problem) -> bool:
        """Extra structural proof that the initial KB cannot reach the goal.

        Domains whose uncreative-max is only approximate override this.
        """
        return True

    def describe(self, payload: Any) -> str:
        return str(payload)

    # serialization hooks, overridden where payloads are not plain JSON
    def encode_payload(self, payload: Any, assets: "AssetSink", stem: str) -> Any:
        return payload

    def decode_payload(self, data: Any, assets: "AssetSource") -> Any:
        return data

    def encode_goal(self, goal: Any, assets: "AssetSink", stem: str) -> Any:
        return self.encode_payload(goal, assets, stem)

    def decode_goal(self, data: Any, assets: "AssetSource") -> Any:
        return self.decode_payload(data, assets)


class AssetSink:
    """Collects binary side files (images) while a problem is serialized."""

    def __init__(self) -> None:
        self.files: dict[str, bytes] = {}

    def put(self, name: str, data: bytes) -> str:
        self.files[name] = data
        return name


class AssetSource:
    def __init__(self, reader: Callable[[str], bytes]) -> None:
        self._reader = reader

    def get(self, name: str) -> bytes:
        return self._reader(name)


_MODULES = {name: f"crib.{name}" for name in DOMAINS}
_REGISTRY: dict[str, Domain] = {}


def register(cls: type[Domain]) -> type[Domain]:
    _REGISTRY[cls.name] = cls()
    return cls


def get_domain(name: str) -> Domain:
    if name not in _REGISTRY:
        if name not in _MODULES:
            raise KeyError(f"unknown domain {name!r}")
        importlib.import_module(_MODULES[name])
    return _REGISTRY[name]


def ref_name(index: int) -> str:
    return f"k{index}"


class Session:
    """One live attempt on one problem.

    Agents interact only through :meth:`kb_listing`, :meth:`apply`,
    :meth:`clear`, :meth:`score` and :meth:`combine`. ``session.problem`` is a
    goal-free view of the problem.
    """

    def __init__(self, problem: Problem, budget: int = DEFAULT_BUDGET) -> None:
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.domain = get_domain(problem.domain)
        self.problem = problem.public()
        self.budget = budget
        self.score_calls = 0
        self.apply_calls = 0
        self.combine_calls = 0
        self.clear_calls = 0
        self.cache: dict = {}
        self._kb: dict[str, KnowledgeElement] = {e.ref_id: e for e in problem.initial_kb}
        self._order: list[str] = [e.ref_id for e in problem.initial_kb]
        self._initial_size = len(self._order)
        domain, full = self.domain, problem
        self._null = lambda: domain.null_state(full)
        self._scorer = lambda state: domain.score(full, state)
        self._combiner = lambda op, parents, params: domain.combine(full, op, parents, params)
        self._applier = lambda state, action, args, resolve: domain.apply(
            full, state, action, args, resolve)
        self._state = self._null()

    @property
    def domain_name(self) -> str:
        return self.problem.domain

    @property
    def params(self) -> dict:
        return self.problem.params

    @property
    def exhausted(self) -> bool:
        return self.score_calls >= self.budget

    @property
    def remaining(self) -> int:
        return self.budget - self.score_calls

    @property
    def kb_growth(self) -> int:
        return len(self._order) - self._initial_size

    def __len__(self) -> int:
        return len(self._order)

    def ref_ids(self) -> list[str]:
        return list(self._order)

    def initial_ref_ids(self) -> list[str]:
        return self._order[: self._initial_size]

    def element(self, ref_id: str) -> KnowledgeElement:
        try:
            return self._kb[ref_id]
        except (KeyError, TypeError):
            raise InvalidReference(f"unknown ref_id {ref_id!r}") from None

    def payload(self, ref_id: str) -> Any:
        return self.element(ref_id).payload

    def kb_listing(self) -> list[KBEntry]:
        return [
            KBEntry(r, self._kb[r].provenance, self.domain.describe(self._kb[r].payload),
                    self._kb[r].payload)
            for r in self._order
        ]

    def apply(self, action: str, **args) -> None:
        if self.exhausted:
            raise BudgetExceeded("session budget exhausted")
        self._state = self._applier(self._state, action, args, self.payload)
        self.apply_calls += 1

    def clear(self) -> None:
        self._state = self._null()
        self.clear_calls += 1

    def score(self) -> float:
        if self.score_calls >= self.budget:
            raise BudgetExceeded(f"score budget of {self.budget} exhausted")
        self.score_calls += 1
        return self._scorer(self._state)

    def combine(self, operator: str, parents: Iterable[str], **params) -> str:
        parents = tuple(parents)
        try:
            payloads = [self._kb[p].payload for p in parents]
        except (KeyError, TypeError):
            raise InvalidCombination(f"unknown parent in {parents!r}") from None
        payload = self._combiner(operator, payloads, params)
        ref = ref_name(len(self._order))
        self._kb[ref] = KnowledgeElement(ref, payload, INVENTED,
                                         Derivation(operator, parents, dict(params)))
        self._order.append(ref)
        self.combine_calls += 1
        return ref


def open_session(problem: Problem, budget: int = DEFAULT_BUDGET) -> Session:
    return Session(problem, budget)


def replay(session: Session, script: list[dict]) -> float:
    """Run a recorded action script and return the final score."""
    for step in script:
        op = step.get("op")
        try:
            if op == "combine":
                ref = session.combine(step["operator"], step["parents"], **step.get("params", {}))
                if "ref" in step and step["ref"] != ref:
                    raise VerificationError(f"script expected {step['ref']}, got {ref}")
            elif op == "apply":
                session.apply(step["action"], **step.get("args", {}))
            elif op == "clear":
                session.clear()
            else:
                raise VerificationError(f"unknown script op {op!r}")
        except VerificationError:
            raise
        except (CribError, KeyError, TypeError) as exc:
            raise VerificationError(f"script step {step!r} failed: {exc}") from exc
    return session.score()


def finalize_suite(domain: str, problems: list[Problem]) -> list[Problem]:
    """Order problems by difficulty (generation index breaks ties) and assign ids."""
    ordered = sorted(problems, key=lambda p: (p.difficulty_rank, p.metadata["gen_index"]))
    for i, p in enumerate(ordered):
        p.id = f"{domain}-{i:04d}"
    return ordered
