"""Running agents over suites and scoring them against the Uncreative Max baseline.

Per domain the normalized score is (S_a - S_u) / (N - S_u), where S_a is the
sum of the agent's raw scores, S_u the sum of uncreative-max values and N the
number of problems. 0 means "as good as never inventing", 1 is perfect. The
total is the plain mean over domains.

Results files are JSON; see RESULTS.md for the schema.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from multiprocessing import get_context
from pathlib import Path

from crib.agents import AGENT_NAMES, GA_PRESETS, GaConfig, run_agent
from crib.core import DEFAULT_BUDGET, DOMAINS
from crib.errors import CribError
from crib.rng import derive_seed, seed_from_text
from crib.suite import domain_dirs, load_problem, read_manifest, verify_suite

RESULTS_VERSION = 1


def normalize(s_a: float, s_u: float, n: int) -> float:
    if n < 1:
        raise CribError("normalize needs at least one problem")
    if s_u >= n:
        raise CribError(f"uncreative-max sum {s_u} reaches the problem count {n}; "
                        "some problem needs no invention")
    return (s_a - s_u) / (n - s_u)


def aggregate(normalized: dict[str, float] | list[float]) -> float:
    """Total score: the mean of the per-domain normalized scores."""
    values = list(normalized.values()) if isinstance(normalized, dict) else list(normalized)
    if not values:
        raise CribError("aggregate needs at least one domain")
    return math.fsum(values) / len(values)


@dataclass(frozen=True)
class ProblemRecord:
    id: str
    domain: str
    raw_score: float
    uncreative_max: float
    score_calls: int
    apply_calls: int
    kb_growth: int


@dataclass(frozen=True)
class DomainSummary:
    n: int
    raw_sum: float
    raw_mean: float
    uncreative_max_sum: float
    normalized: float
    mean_kb_growth: float
    mean_score_calls: float


@dataclass
class SuiteResult:
    agent: str
    budget: int
    seed: int
    problems: list[ProblemRecord]
    domains: dict[str, DomainSummary] = field(default_factory=dict)
    total: float | None = None
    ga: dict | None = None
    format_version: int = RESULTS_VERSION

    @classmethod
    def from_records(cls, agent: str, budget: int, seed: int,
                     records: list[ProblemRecord], ga: GaConfig | None = None) -> "SuiteResult":
        summaries = {}
        for d in DOMAINS:
            rs = [r for r in records if r.domain == d]
            if not rs:
                continue
            s_a = math.fsum(r.raw_score for r in rs)
            s_u = math.fsum(r.uncreative_max for r in rs)
            summaries[d] = DomainSummary(
                n=len(rs), raw_sum=s_a, raw_mean=s_a / len(rs), uncreative_max_sum=s_u,
                normalized=normalize(s_a, s_u, len(rs)),
                mean_kb_growth=sum(r.kb_growth for r in rs) / len(rs),
                mean_score_calls=sum(r.score_calls for r in rs) / len(rs),
            )
        total = aggregate({d: s.normalized for d, s in summaries.items()}) if summaries else None
        return cls(agent, budget, seed, records, summaries, total,
                   asdict(ga) if ga is not None else None)

    def to_json(self) -> dict:
        return {
            "format_version": self.format_version,
            "agent": self.agent,
            "budget": self.budget,
            "seed": self.seed,
            "ga": self.ga,
            "problems": [asdict(r) for r in self.problems],
            "domains": {d: asdict(s) for d, s in self.domains.items()},
            "total_normalized": self.total,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SuiteResult":
        if data.get("format_version") != RESULTS_VERSION:
            raise CribError(f"unsupported results format {data.get('format_version')!r}")
        return cls(
            agent=data["agent"], budget=data["budget"], seed=data["seed"],
            problems=[ProblemRecord(**r) for r in data["problems"]],
            domains={d: DomainSummary(**s) for d, s in data["domains"].items()},
            total=data["total_normalized"], ga=data["ga"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"


def load_results(path) -> SuiteResult:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CribError(f"cannot read results file {path}: {exc}") from None
    return SuiteResult.from_json(data)


def problem_seed(gen_seed: int, agent: str, seed: int) -> int:
    """Agent RNG seed for one problem; independent of scheduling."""
    return derive_seed(derive_seed(gen_seed, seed_from_text(agent)), seed)


def _run_one(job: tuple[str, str, int, int, GaConfig | None]) -> ProblemRecord:
    path, agent, budget, seed, ga = job
    problem = load_problem(path)
    result = run_agent(agent, problem, budget, problem_seed(problem.gen_seed, agent, seed), ga)
    return ProblemRecord(problem.id, problem.domain, result.score, problem.uncreative_max,
                         result.score_calls, result.apply_calls, result.combine_calls)


def suite_problem_paths(suite_dir) -> list[str]:
    paths = []
    for _, d in domain_dirs(suite_dir):
        paths.extend(str(d / f"{pid}.json") for pid in read_manifest(d)["problems"])
    return paths


def run_suite(suite_dir, agent: str, budget: int = DEFAULT_BUDGET, parallel: int = 1,
              out_path=None, seed: int = 0, verify: bool = True,
              ga: GaConfig | None = None) -> SuiteResult:
    """Run ``agent`` on every problem; ``ga`` overrides the GA preset constants."""
    if agent not in AGENT_NAMES:
        raise CribError(f"unknown agent {agent!r}; choose from {', '.join(AGENT_NAMES)}")
    if ga is not None and agent not in GA_PRESETS:
        raise CribError(f"GA constants given but agent {agent!r} is not a GA")
    if agent in GA_PRESETS and ga is None:
        ga = GA_PRESETS[agent]
    if budget < 1:
        raise CribError("budget must be >= 1")
    if verify:
        check = verify_suite(suite_dir)
        if not check.ok:
            raise CribError("suite failed verification:\n  " + "\n  ".join(check.failures))
    jobs = [(p, agent, budget, seed, ga) for p in suite_problem_paths(suite_dir)]
    if parallel > 1 and len(jobs) > 1:
        with get_context("fork").Pool(min(parallel, len(jobs))) as pool:
            records = pool.map(_run_one, jobs, chunksize=1)
    else:
        records = [_run_one(j) for j in jobs]
    result = SuiteResult.from_records(agent, budget, seed, records, ga)
    if out_path is not None:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        Path(out_path).write_text(result.dumps(), encoding="utf-8")
    return result


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _grid(title: str, header: list[str], rows: list[list[str]], markdown: bool) -> str:
    if markdown:
        lines = [f"**{title}**", "", "| " + " | ".join(header) + " |",
                 "|" + "|".join(["---"] + ["---:"] * (len(header) - 1)) + "|"]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
        return "\n".join(lines)
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]

    def fmt(row):
        return "  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                         for i, (c, w) in enumerate(zip(row, widths)))

    return "\n".join([title, fmt(header), "  ".join("-" * w for w in widths)] + [fmt(r) for r in rows])


def _cell(summary: DomainSummary | None, attr: str, digits: int = 2) -> str:
    return "-" if summary is None else f"{getattr(summary, attr):.{digits}f}"


def report(results: list[SuiteResult], markdown: bool = False) -> str:
    """Normalized and raw score grids: five domain columns plus Total."""
    header = ["Agent"] + [d.capitalize() for d in DOMAINS] + ["Total"]
    norm, raw, usage = [], [], []
    for r in results:
        cells = [r.domains.get(d) for d in DOMAINS]
        norm.append([r.agent] + [_cell(c, "normalized") for c in cells]
                    + ["-" if r.total is None else f"{r.total:.2f}"])
        present = [c.raw_mean for c in cells if c is not None]
        raw.append([r.agent] + [_cell(c, "raw_mean") for c in cells]
                   + [f"{sum(present) / len(present):.2f}" if present else "-"])
        usage.append([r.agent] + [
            "-" if c is None else f"{c.mean_kb_growth:.1f} / {c.mean_score_calls:.0f}"
            for c in cells] + [""])
    sections = [
        _grid("Normalized score", header, norm, markdown),
        _grid("Raw mean score", header, raw, markdown),
        _grid("KB growth / score calls per problem", header, usage, markdown),
    ]
    return "\n\n".join(sections) + "\n"
