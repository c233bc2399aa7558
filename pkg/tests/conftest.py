import pytest

from app.config import get_settings


@pytest.fixture(autouse=True)
def fresh_settings():
    # the CLI applies overrides to the cached settings object
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
