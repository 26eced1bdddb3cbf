import pytest

from src.common.logger import setup_logging


@pytest.fixture(autouse=True, scope="session")
def _quiet_logging():
    setup_logging("WARNING")
