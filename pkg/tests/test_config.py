import pytest

from shared import config
from shared.config import RunConfig
from shared.errors import ConfigError


def test_defaults():
    assert config.get_depth() == config.DEFAULT_DEPTH
    assert config.get_release_policy() == "early"
    assert config.get_validate_default() is True
    assert config.get_loop_bound() == config.DEFAULT_LOOP_BOUND
    assert config.get_max_workers() == 1
    assert config.get_log_level() == "INFO"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("PLUMB_DEPTH", "5")
    monkeypatch.setenv("PLUMB_RELEASE_POLICY", "LATE")
    monkeypatch.setenv("PLUMB_VALIDATE", "off")
    monkeypatch.setenv("PLUMB_LOG_LEVEL", "debug")
    assert config.get_depth() == 5
    assert config.get_release_policy() == "late"
    assert config.get_validate_default() is False
    assert config.get_log_level() == "DEBUG"


@pytest.mark.parametrize("raw", ["zero", "0", "-3"])
def test_bad_depth_falls_back(monkeypatch, raw):
    monkeypatch.setenv("PLUMB_DEPTH", raw)
    assert config.get_depth() == config.DEFAULT_DEPTH


def test_unknown_policy_falls_back(monkeypatch):
    monkeypatch.setenv("PLUMB_RELEASE_POLICY", "eventually")
    assert config.get_release_policy() == "early"


def test_release_policy_is_cached(monkeypatch):
    assert config.get_release_policy() == "early"
    monkeypatch.setenv("PLUMB_RELEASE_POLICY", "late")
    assert config.get_release_policy() == "early"
    config.reset_cache()
    assert config.get_release_policy() == "late"


def test_run_config_from_env(monkeypatch):
    monkeypatch.setenv("PLUMB_DEPTH", "4")
    run = RunConfig.from_env("app.json", "MediaPlayer", depth=None, release_policy="late")
    assert run.depth == 4
    assert run.release_policy == "late"
    assert run.validate_flag is True
    assert run.output_format == "json"


@pytest.mark.parametrize("overrides", [
    {"depth": 0},
    {"release_policy": "sometime"},
    {"output_format": "xml"},
])
def test_run_config_rejects(overrides):
    with pytest.raises(ConfigError):
        RunConfig("app.json", "MediaPlayer", **overrides)
