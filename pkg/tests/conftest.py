import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ait_workbench.enumerator import enumerate_to  # noqa: E402
from ait_workbench.machine import DEFAULT_PROFILE  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def state22():
    return enumerate_to(DEFAULT_PROFILE, 22)


@pytest.fixture(scope="session")
def state16():
    return enumerate_to(DEFAULT_PROFILE, 16)


@pytest.fixture(scope="session")
def coinflips():
    from ait_workbench.sources import from_file
    return from_file(DATA / "coinflips_a.txt").prefix(4096)


@pytest.fixture(scope="session")
def state26():
    return enumerate_to(DEFAULT_PROFILE, 26)
