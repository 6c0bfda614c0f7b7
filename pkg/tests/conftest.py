"""
Shared fixtures and the slow-test switch.
"""

import pytest

from cleanSpectrum.matcore import Rng
from cleanSpectrum.sampling import make_record


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False,
        help="Run Monte-Carlo acceptance tests that take minutes"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    """Fresh seeded stream per test."""
    return Rng(12345)


@pytest.fixture
def small_records():
    """Twenty records at N = 8 with T between 8 and 32."""
    master = Rng(2024)
    records = []
    for index in range(20):
        stream = master.derive(index)
        t = int(stream.integers(8, 32))
        records.append(make_record(8, t, [0.25, 0.25, 0.25, 0.25], stream))
    return records
