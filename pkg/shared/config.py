"""
Runtime configuration for the analysis engine.

Environment variables provide the defaults; CLI flags and HTTP request
bodies override them through RunConfig.
"""
import logging
import os
from dataclasses import dataclass
from typing import Optional

from shared.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 3
DEFAULT_LOOP_BOUND = 3
DEFAULT_ORACLE_BUDGET = 200_000
RELEASE_POLICIES = ("early", "late")
OUTPUT_FORMATS = ("json", "text")

_TRUE_VALUES = ("1", "true", "yes", "on")

# Cached settings
_release_policy = None


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Invalid {name} '{raw}', defaulting to {default}")
        return default
    if value < minimum:
        logger.warning(f"{name} must be >= {minimum}, got {value}; defaulting to {default}")
        return default
    return value


def get_depth() -> int:
    """Unrolling depth D (PLUMB_DEPTH)"""
    return _int_env("PLUMB_DEPTH", DEFAULT_DEPTH)


def get_release_policy() -> str:
    """Release policy (early or late), cached after first read"""
    global _release_policy
    if _release_policy is None:
        _release_policy = os.environ.get("PLUMB_RELEASE_POLICY", "early").lower()
        if _release_policy not in RELEASE_POLICIES:
            logger.warning(f"Unknown PLUMB_RELEASE_POLICY '{_release_policy}', defaulting to 'early'")
            _release_policy = "early"
    return _release_policy


def reset_cache():
    """Forget cached settings (used by tests that patch the environment)"""
    global _release_policy
    _release_policy = None


def get_validate_default() -> bool:
    return os.environ.get("PLUMB_VALIDATE", "1").lower() in _TRUE_VALUES


def get_loop_bound() -> int:
    return _int_env("PLUMB_LOOP_BOUND", DEFAULT_LOOP_BOUND)


def get_oracle_budget() -> int:
    return _int_env("PLUMB_ORACLE_BUDGET", DEFAULT_ORACLE_BUDGET)


def get_max_workers() -> int:
    return _int_env("PLUMB_MAX_WORKERS", 1)


def get_log_level() -> str:
    return os.environ.get("PLUMB_LOG_LEVEL", "INFO").upper()


@dataclass(frozen=True)
class RunConfig:
    """
    Settings of one app/resource invocation

    Args:
        app_path: IR document of the app
        resource_spec_path: resource spec document (or bundled resource name)
        depth: unrolling depth D
        release_policy: early or late release callback
        validate_flag: run validation after fixing
        output_format: json or text
        output_path: where to write the main document (None means stdout)
        dot_dir: directory for DOT dumps (stats only)
    """
    app_path: str
    resource_spec_path: str
    depth: int = DEFAULT_DEPTH
    release_policy: str = "early"
    validate_flag: bool = True
    output_format: str = "json"
    output_path: Optional[str] = None
    dot_dir: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.depth, int) or self.depth < 1:
            raise ConfigError(f"depth must be a positive integer, got {self.depth!r}", entity="depth")
        if self.release_policy not in RELEASE_POLICIES:
            raise ConfigError(f"release policy must be one of {RELEASE_POLICIES}", entity="release_policy")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"output format must be one of {OUTPUT_FORMATS}", entity="output_format")

    @classmethod
    def from_env(cls, app_path: str, resource_spec_path: str, **overrides) -> "RunConfig":
        """Build a RunConfig from environment defaults, then apply non-None overrides"""
        values = {
            "depth": get_depth(),
            "release_policy": get_release_policy(),
            "validate_flag": get_validate_default(),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(app_path=app_path, resource_spec_path=resource_spec_path, **values)
