import os

os.environ.setdefault("LIFTFORGE_LOG_LEVEL", "warning")

from app.config import HARD_LIMITS, Settings, get_settings, override_settings  # noqa: E402


def test_env_override_is_clamped_to_hard_limit(monkeypatch):
    monkeypatch.setenv("LIFTFORGE_MAX_GROUND", "30")
    get_settings.cache_clear()
    assert get_settings().max_ground == HARD_LIMITS["max_ground"] == 24


def test_env_override_can_lower_capacity(monkeypatch):
    monkeypatch.setenv("LIFTFORGE_MAX_GROUND", "10")
    get_settings.cache_clear()
    assert get_settings().max_ground == 10


def test_override_settings_only_moves_down():
    settings = override_settings(max_ground=8, max_circuits=100000, workers=0, seed=7)
    assert settings.max_ground == 8
    assert settings.max_circuits == Settings().max_circuits
    assert settings.workers == 1
    assert settings.seed == 7
    assert get_settings() is settings


def test_log_level_is_normalized(monkeypatch):
    monkeypatch.setenv("LIFTFORGE_LOG_LEVEL", " info ")
    get_settings.cache_clear()
    assert get_settings().log_level == "INFO"
