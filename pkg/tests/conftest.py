import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from taukb import engine, formats


@pytest.fixture(scope="session")
def default_kb():
    return engine.load_default_kb()


@pytest.fixture(scope="session")
def closure(default_kb):
    return engine.close(default_kb)


@pytest.fixture(scope="session")
def reference():
    return formats.load_reference_table()
