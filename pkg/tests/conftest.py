import pytest

from crib.core import DOMAINS, finalize_suite, get_domain


@pytest.fixture(scope="session")
def problems():
    """A handful of generated problems per domain."""
    return {d: finalize_suite(d, get_domain(d).generate(99, 6)) for d in DOMAINS}
