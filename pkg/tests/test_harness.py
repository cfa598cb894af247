import pytest
from hypothesis import given, strategies as st

from crib.errors import CribError
from crib.harness import (
    ProblemRecord,
    SuiteResult,
    aggregate,
    load_results,
    normalize,
    report,
    run_suite,
)
from crib.suite import write_suite


def test_normalize_examples():
    assert normalize(340.0, 340.0, 400) == 0.0
    assert normalize(400.0, 340.0, 400) == 1.0
    assert normalize(280.0, 340.0, 400) == -1.0
    with pytest.raises(CribError):
        normalize(1.0, 5.0, 5)
    with pytest.raises(CribError):
        normalize(0.0, 0.0, 0)


@given(st.integers(1, 500), st.data())
def test_normalize_monotone(n, data):
    s_u = data.draw(st.floats(0, n, exclude_max=True))
    a = data.draw(st.floats(0, n))
    b = data.draw(st.floats(0, n))
    lo, hi = min(a, b), max(a, b)
    assert normalize(lo, s_u, n) <= normalize(hi, s_u, n) <= 1.0


def test_aggregate_examples():
    assert round(aggregate([-0.99, -2.42, -1.50, -0.32, -0.50]), 2) == -1.15
    assert round(aggregate([-0.99, -1.41, 0.02, 0.76, 0.35]), 2) == -0.25
    assert aggregate({"dessert": 0.3}) == 0.3
    with pytest.raises(CribError):
        aggregate([])


def records():
    return [ProblemRecord("painting-0000", "painting", 0.8, 0.9, 5, 9, 0),
            ProblemRecord("painting-0001", "painting", 0.95, 0.9, 5, 9, 2),
            ProblemRecord("dessert-0000", "dessert", 0.5, 0.5, 1, 1, 0)]


def test_suite_result_round_trip(tmp_path):
    r = SuiteResult.from_records("random", 100, 0, records())
    assert r.domains["painting"].normalized == normalize(1.75, 1.8, 2)
    assert r.domains["dessert"].normalized == 0.0
    assert r.total == aggregate([r.domains["painting"].normalized, 0.0])
    path = tmp_path / "r.json"
    path.write_text(r.dumps())
    assert load_results(path) == r
    assert load_results(path).dumps() == r.dumps()


def test_report_grid():
    r = SuiteResult.from_records("random", 100, 0, records())
    text = report([r])
    assert "Normalized score" in text and "Painting" in text and "Total" in text
    md = report([r], markdown=True)
    assert "| Agent | Painting | Language | Photobash | Narrative | Dessert | Total |" in md


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    return write_suite(tmp_path_factory.mktemp("suite"), "all", 2, 77)


def test_baseline_agents(suite):
    um = run_suite(suite, "uncreative-max", 1, verify=False)
    assert all(s.normalized == 0.0 for s in um.domains.values()) and um.total == 0.0
    oracle = run_suite(suite, "oracle", 1)
    assert all(s.normalized == 1.0 for s in oracle.domains.values())
    null = run_suite(suite, "null", 1, verify=False)
    for d in ("language", "narrative", "dessert"):
        assert null.domains[d].raw_mean == 0.0


def test_parallel_matches_serial(suite, tmp_path):
    serial = run_suite(suite, "random", 40, 1, tmp_path / "a.json", verify=False)
    parallel = run_suite(suite, "random", 40, 3, tmp_path / "b.json", verify=False)
    assert serial == parallel
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_rejects_bad_requests(suite, tmp_path):
    with pytest.raises(CribError):
        run_suite(suite, "psychic", 10, verify=False)
    with pytest.raises(CribError):
        run_suite(tmp_path, "null", 10)
