from pathlib import Path

import pytest

from agtd.dataflows.config import reset_config

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(autouse=True)
def _fresh_config():
    reset_config()
    yield
    reset_config()
