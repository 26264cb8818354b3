import logging

import pytest

from config import settings
from utilities.board import Dims
from utilities.storage import MemoryStore

logger = logging.getLogger("tests")

# одна пам'ять на всю сесію: кожна дошка будується не більше одного разу
_SESSION_STORE = MemoryStore()


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Тести не пишуть у справжній кеш і не залежать від .env"""
    monkeypatch.setattr(settings, "USE_CACHE", False)
    monkeypatch.setattr(settings, "CACHE_DIR", tmp_path / "cache")
    monkeypatch.setattr(settings, "RKTB_WORKERS", 1)
    monkeypatch.setattr(settings, "DEBUG", False)


@pytest.fixture(scope="session")
def tablebase():
    """Фабрика: tablebase(m, n) -> готова таблиця, спільна для всіх тестів"""

    def get(m: int, n: int):
        tb = _SESSION_STORE.get_or_build(Dims(m, n), workers=1)
        logger.info("tablebase %sx%s: %s", m, n, tb.meta)
        return tb

    return get


@pytest.fixture
def shared_store(monkeypatch):
    """Підміняє сховище команд на сесійне, щоб CLI-тести не перебудовували дошки"""
    import tools.proofs
    import tools.tables

    monkeypatch.setattr(tools.proofs, "default_store", lambda: _SESSION_STORE)
    monkeypatch.setattr(tools.tables, "default_store", lambda: _SESSION_STORE)
    return _SESSION_STORE
