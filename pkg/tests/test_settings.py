import pytest

import zsf.settings
from zsf.settings import Settings, get_settings


def test_defaults():
    settings = Settings()
    assert not settings.debug
    assert settings.budget_nodes == 1_000_000
    assert settings.batch_concurrency == 4


def test_from_environment(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv("DEBUG", "true")
    monkeypatch.setenv("BUDGET_NODES", "42")
    settings = get_settings()
    assert settings.debug
    assert settings.budget_nodes == 42


def test_loaded_once():
    first = get_settings()
    assert get_settings() is first
    assert zsf.settings.settings is first
