import sys
from pathlib import Path

import pytest

import zsf.settings
from zsf.core.core import Core
from zsf.core.models import Budget
from zsf.settings import Settings

TESTS_PATH = Path(__file__).parent.resolve()
sys.path.append(str(TESTS_PATH))


@pytest.fixture(autouse=True)
def clean_settings_environment(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.delenv("DEBUG", raising=False)
    zsf.settings.settings = None


@pytest.fixture
def settings() -> Settings:
    return Settings(debug=True)


@pytest.fixture
def core(settings: Settings) -> Core:
    return Core(settings=settings)


@pytest.fixture
def budget() -> Budget:
    return Budget()


@pytest.fixture
def small_budget() -> Budget:
    return Budget(max_nodes=50, max_results=3)
