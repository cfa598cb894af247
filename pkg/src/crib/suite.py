"""Suites on disk.

A suite directory holds ``manifest.json`` plus one JSON file per problem and
any PPM/PBM image assets the problems reference. A suite generated with
``--domain all`` has one such directory per domain under a top-level
manifest.

Problem files have an ``engine`` section (goal, oracle script, cached
uncreative-max, generator metadata). Agents must not read it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from crib.core import (
    DOMAINS,
    AssetSink,
    AssetSource,
    KnowledgeElement,
    Problem,
    finalize_suite,
    get_domain,
    open_session,
    replay,
)
from crib.errors import CribError
from crib.painting import DEFAULT_SIZE

FORMAT_VERSION = 1
MANIFEST = "manifest.json"
ORDERING = "difficulty_rank ascending, generation index on ties"


def dump_json(data) -> bytes:
    return (json.dumps(data, indent=1, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")


def generate_problems(domain: str, count: int, seed: int,
                      size: tuple[int, int] = DEFAULT_SIZE) -> list[Problem]:
    return finalize_suite(domain, get_domain(domain).generate(seed, count, size=tuple(size)))


def problem_files(problem: Problem) -> dict[str, bytes]:
    """Serialize one problem into {file name: bytes}."""
    dom = get_domain(problem.domain)
    sink = AssetSink()
    stem = problem.id
    kb = [{"ref_id": e.ref_id,
           "payload": dom.encode_payload(e.payload, sink, f"{stem}.{e.ref_id}")}
          for e in problem.initial_kb]
    doc = {
        "format_version": FORMAT_VERSION,
        "id": problem.id,
        "domain": problem.domain,
        "difficulty_rank": problem.difficulty_rank,
        "gen_seed": problem.gen_seed,
        "params": problem.params,
        "initial_kb": kb,
        "engine": {
            "note": "engine-only section; agents must not read it",
            "goal": dom.encode_goal(problem.goal, sink, stem),
            "oracle_script": problem.oracle_script,
            "uncreative_max": problem.uncreative_max,
            "uncreative_max_exact": problem.uncreative_max_exact,
            "metadata": problem.metadata,
        },
    }
    files = dict(sink.files)
    files[f"{stem}.json"] = dump_json(doc)
    return files


def domain_suite_files(domain: str, count: int, seed: int,
                       size: tuple[int, int] = DEFAULT_SIZE) -> dict[str, bytes]:
    problems = generate_problems(domain, count, seed, size)
    files: dict[str, bytes] = {}
    for p in problems:
        files.update(problem_files(p))
    files[MANIFEST] = dump_json({
        "format_version": FORMAT_VERSION,
        "domain": domain,
        "count": count,
        "master_seed": seed,
        "size": list(size),
        "ordering": ORDERING,
        "problems": [p.id for p in problems],
    })
    return files


def suite_files(domain: str, count: int, seed: int,
                size: tuple[int, int] = DEFAULT_SIZE) -> dict[str, bytes]:
    """All files of a suite, keyed by path relative to the suite root."""
    if domain != "all":
        return domain_suite_files(domain, count, seed, size)
    files: dict[str, bytes] = {}
    for d in DOMAINS:
        for name, data in domain_suite_files(d, count, seed, size).items():
            files[f"{d}/{name}"] = data
    files[MANIFEST] = dump_json({
        "format_version": FORMAT_VERSION,
        "domains": list(DOMAINS),
        "count": count,
        "master_seed": seed,
        "size": list(size),
    })
    return files


def write_suite(out_dir, domain: str, count: int, seed: int,
                size: tuple[int, int] = DEFAULT_SIZE) -> Path:
    if domain != "all" and domain not in DOMAINS:
        raise CribError(f"unknown domain {domain!r}")
    if count < 1:
        raise CribError("count must be >= 1")
    out = Path(out_dir)
    files = suite_files(domain, count, seed, size)
    for name, data in files.items():
        path = out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    return out


def read_manifest(suite_dir) -> dict:
    path = Path(suite_dir) / MANIFEST
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CribError(f"cannot read suite manifest {path}: {exc}") from None
    if manifest.get("format_version") != FORMAT_VERSION:
        raise CribError(f"{path}: unsupported format version {manifest.get('format_version')!r}")
    return manifest


def domain_dirs(suite_dir) -> list[tuple[str, Path]]:
    """(domain, directory) pairs of a single-domain or combined suite."""
    root = Path(suite_dir)
    manifest = read_manifest(root)
    if "domains" in manifest:
        return [(d, root / d) for d in manifest["domains"]]
    return [(manifest["domain"], root)]


def load_problem(path) -> Problem:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CribError(f"cannot read problem file {path}: {exc}") from None
    dom = get_domain(doc["domain"])
    assets = AssetSource(lambda name: (path.parent / name).read_bytes())
    engine = doc["engine"]
    return Problem(
        id=doc["id"],
        domain=doc["domain"],
        initial_kb=[KnowledgeElement(e["ref_id"], dom.decode_payload(e["payload"], assets))
                    for e in doc["initial_kb"]],
        goal=dom.decode_goal(engine["goal"], assets),
        difficulty_rank=doc["difficulty_rank"],
        gen_seed=doc["gen_seed"],
        params=doc["params"],
        oracle_script=engine["oracle_script"],
        uncreative_max=engine["uncreative_max"],
        uncreative_max_exact=engine["uncreative_max_exact"],
        metadata=engine["metadata"],
    )


def load_suite(suite_dir) -> list[Problem]:
    """Every problem of a suite, domains in canonical order, each in manifest order."""
    problems = []
    for _, d in domain_dirs(suite_dir):
        manifest = read_manifest(d)
        problems.extend(load_problem(d / f"{pid}.json") for pid in manifest["problems"])
    return problems


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass
class VerifyReport:
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, where: str, message: str) -> None:
        self.failures.append(f"{where}: {message}")


def verify_suite(suite_dir) -> VerifyReport:
    """Check solvability, invention necessity, KB sizes, ordering and determinism."""
    report = VerifyReport()
    root = Path(suite_dir)
    try:
        manifest = read_manifest(root)
        pairs = domain_dirs(root)
    except CribError as exc:
        report.fail(str(root), str(exc))
        return report
    for domain, d in pairs:
        try:
            problems = [load_problem(d / f"{pid}.json") for pid in read_manifest(d)["problems"]]
        except (CribError, KeyError, OSError, ValueError) as exc:
            report.fail(str(d), f"unreadable suite: {exc}")
            continue
        dom = get_domain(domain)
        lo, hi = dom.kb_size_range
        prev_rank = None
        for p in problems:
            report.checked += 1
            try:
                score = replay(open_session(p, 1), p.oracle_script or [])
                if score != 1.0:
                    report.fail(p.id, f"oracle script scores {score!r}, not 1.0")
            except CribError as exc:
                report.fail(p.id, f"oracle script failed: {exc}")
            um, _exact = dom.uncreative_max(p)
            if not um < 1.0:
                report.fail(p.id, f"uncreative-max is {um!r}; the goal needs no invention")
            elif not dom.certify_invention(p):
                report.fail(p.id, "a KB element reaches the goal without invention")
            if not lo <= len(p.initial_kb) <= hi:
                report.fail(p.id, f"KB size {len(p.initial_kb)} outside [{lo}, {hi}]")
            key = dom.rank_key(p)
            if key != p.difficulty_rank:
                report.fail(p.id, f"difficulty_rank {p.difficulty_rank} but rank key is {key}")
            if prev_rank is not None and p.difficulty_rank < prev_rank:
                report.fail(p.id, "problems are not in difficulty order")
            prev_rank = p.difficulty_rank
    _check_determinism(root, manifest, report)
    return report


def _check_determinism(root: Path, manifest: dict, report: VerifyReport) -> None:
    domain = "all" if "domains" in manifest else manifest.get("domain")
    try:
        expected = suite_files(domain, manifest["count"], manifest["master_seed"],
                               tuple(manifest["size"]))
    except (CribError, KeyError, TypeError, ValueError) as exc:
        report.fail(str(root), f"cannot regenerate from manifest: {exc}")
        return
    on_disk = {p.relative_to(root).as_posix() for p in root.rglob("*") if p.is_file()}
    for name in sorted(set(expected) - on_disk):
        report.fail(name, "missing from suite directory")
    for name in sorted(on_disk - set(expected)):
        report.fail(name, "not produced by the generator")
    for name in sorted(set(expected) & on_disk):
        if (root / name).read_bytes() != expected[name]:
            report.fail(name, "differs from regenerated bytes")
