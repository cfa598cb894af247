"""Alien-language domain.

Sentences are built word by word from the vocabulary in the knowledge base.
Some goal words are absent from the KB but can be glued together from
shorter KB words with ``concat``.
"""

from __future__ import annotations

from crib.core import Domain, KnowledgeElement, Problem, ref_name, register
from crib.errors import GenerationError, InvalidAction, InvalidCombination
from crib.rng import SplitMix64, derive_seed, seed_from_text
from crib.seqscore import proportional_lcs

ALPHABET = "ABCDWXYZ"
WORD_LENGTH = (2, 12)
VOCABULARY_SIZE = 2000
GOAL_LENGTH = (2, 5)
MAX_SENTENCE = 8


def is_word(text) -> bool:
    return (isinstance(text, str) and WORD_LENGTH[0] <= len(text) <= WORD_LENGTH[1]
            and all(ch in ALPHABET for ch in text))


def concat(*words: str) -> str:
    if not 2 <= len(words) <= 3:
        raise InvalidCombination("concat takes two or three words")
    if not all(is_word(w) for w in words):
        raise InvalidCombination(f"not alien words: {words!r}")
    text = "".join(words)
    if len(text) > WORD_LENGTH[1]:
        raise InvalidCombination(f"{text!r} is longer than {WORD_LENGTH[1]} characters")
    return text


def score_sentence(current: list[str], goal: list[str]) -> float:
    return proportional_lcs(current, goal)


def uncreative_max_language(goal: list[str], kb_words) -> float:
    known = set(kb_words)
    return sum(1 for w in goal if w in known) / len(goal)


def build_vocabulary(seed: int, size: int = VOCABULARY_SIZE) -> list[str]:
    rng = SplitMix64(seed)
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < size:
        n = rng.randint(*WORD_LENGTH)
        w = "".join(ALPHABET[rng.randbelow(len(ALPHABET))] for _ in range(n))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def decompositions(word: str, vocabulary: set[str]) -> list[tuple[str, ...]]:
    """All ways to write ``word`` as two or three other vocabulary words."""
    found = []
    n = len(word)
    for i in range(2, n - 1):
        head, rest = word[:i], word[i:]
        if head not in vocabulary:
            continue
        if rest in vocabulary:
            found.append((head, rest))
        for j in range(2, len(rest) - 1):
            if rest[:j] in vocabulary and rest[j:] in vocabulary:
                found.append((head, rest[:j], rest[j:]))
    return found


@register
class Language(Domain):
    name = "language"
    kb_size_range = (3, 9)
    actions = ("add_word",)
    operators = ("concat",)

    def null_state(self, problem):
        return []

    def apply(self, problem, state, action, args, resolve):
        if action != "add_word":
            raise InvalidAction(f"language has no action {action!r}")
        if set(args) != {"ref"}:
            raise InvalidAction("add_word takes exactly one argument: ref")
        word = resolve(args["ref"])
        if len(state) >= MAX_SENTENCE:
            raise InvalidAction(f"sentence already has {MAX_SENTENCE} words")
        state.append(word)
        return state

    def score(self, problem, state):
        return score_sentence(state, problem.goal)

    def combine(self, problem, operator, parents, params):
        if operator != "concat":
            raise InvalidCombination(f"language has no operator {operator!r}")
        if params:
            raise InvalidCombination("concat takes no parameters")
        return concat(*parents)

    def uncreative_max(self, problem):
        return uncreative_max_language(problem.goal, (e.payload for e in problem.initial_kb)), True

    def rank_key(self, problem):
        return len(problem.initial_kb) * 10 + len(problem.goal)

    def generate(self, master_seed, count, **_):
        if count < 1:
            raise ValueError("count must be >= 1")
        domain_seed = derive_seed(master_seed, seed_from_text(self.name))
        vocabulary = build_vocabulary(derive_seed(domain_seed, 1 << 32))
        vocab_set = set(vocabulary)
        return [generate_language_problem(derive_seed(domain_seed, i), vocabulary, vocab_set, i)
                for i in range(count)]


def generate_language_problem(seed: int, vocabulary: list[str], vocab_set: set[str],
                              index: int) -> Problem:
    rng = SplitMix64(seed)
    for _ in range(10000):
        goal = rng.sample(vocabulary, rng.randint(*GOAL_LENGTH))
        splittable = [i for i, w in enumerate(goal) if decompositions(w, vocab_set)]
        if not splittable:
            continue
        chosen = sorted(rng.sample(splittable, rng.randint(1, min(2, len(splittable)))))
        parts = {i: rng.choice(decompositions(goal[i], vocab_set)) for i in chosen}
        kb_words: list[str] = []
        for i, w in enumerate(goal):
            for piece in parts.get(i, (w,)):
                if piece not in kb_words:
                    kb_words.append(piece)
        if any(goal[i] in kb_words for i in chosen):
            continue
        if len(kb_words) > 9:
            continue
        while len(kb_words) < 3:
            extra = rng.choice(vocabulary)
            if extra not in kb_words and extra not in goal:
                kb_words.append(extra)
        break
    else:
        raise GenerationError(f"language generator gave up for seed {seed}")
    rng.shuffle(kb_words)
    refs = {w: ref_name(i) for i, w in enumerate(kb_words)}
    script = []
    for i in chosen:
        ref = ref_name(len(kb_words) + len(script))
        script.append({"op": "combine", "operator": "concat",
                       "parents": [refs[p] for p in parts[i]], "params": {}, "ref": ref})
        refs[goal[i]] = ref
    for w in goal:
        script.append({"op": "apply", "action": "add_word", "args": {"ref": refs[w]}})
    problem = Problem(
        id="", domain="language",
        initial_kb=[KnowledgeElement(ref_name(i), w) for i, w in enumerate(kb_words)],
        goal=goal,
        # ordered by KB size, then sentence length
        difficulty_rank=len(kb_words) * 10 + len(goal),
        gen_seed=seed, oracle_script=script,
        metadata={"gen_index": index,
                  "decompositions": {goal[i]: list(parts[i]) for i in chosen}},
    )
    problem.uncreative_max = uncreative_max_language(goal, kb_words)
    return problem
