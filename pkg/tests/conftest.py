import pytest

from src.entity.partition import PairPartition


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the long Monte Carlo checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def worked_partition() -> PairPartition:
    """(1,5)(2,8)(3,7)(4,6): genus one, quotient on three vertices."""
    return PairPartition.from_blocks([(1, 5), (2, 8), (3, 7), (4, 6)])


@pytest.fixture
def crossing_pair() -> PairPartition:
    return PairPartition.from_blocks([(1, 3), (2, 4)])
