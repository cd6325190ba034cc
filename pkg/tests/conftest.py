import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from shared import config  # noqa: E402
from shared.ir import load_bundled, parse_app  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, f"{name}.json")


def load_fixture(name: str):
    with open(fixture_path(name), encoding="utf-8") as fh:
        return parse_app(fh.read())


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    for name in ("PLUMB_DEPTH", "PLUMB_RELEASE_POLICY", "PLUMB_VALIDATE", "PLUMB_MAX_WORKERS", "PLUMB_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    config.reset_cache()
    yield
    config.reset_cache()


@pytest.fixture
def media_player():
    return load_bundled("MediaPlayer")


@pytest.fixture
def wake_lock():
    return load_bundled("WakeLock")


@pytest.fixture
def wifi_lock():
    return load_bundled("WifiLock")


@pytest.fixture
def image_viewer():
    return load_fixture("image_viewer")


@pytest.fixture
def voice_message():
    return load_fixture("voice_message")


@pytest.fixture
def leak_free():
    return load_fixture("leak_free")


@pytest.fixture
def local_ref():
    return load_fixture("local_ref")


@pytest.fixture
def two_leak():
    return load_fixture("two_leak")


@pytest.fixture
def paired_player():
    return load_fixture("paired_player")
