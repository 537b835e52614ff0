"""
Environment-driven defaults.

Values come from the process environment, optionally populated from a
``.env`` file by ``python-dotenv`` in the CLI entry point.  Nothing here
is required; every variable has a default.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import TypeVar

from shared.errors import ConfigError

DEFAULT_MAX_STEPS = 10**8
DEFAULT_PARALLELISM = 1
DEFAULT_SECONDS_PER_MCS = 1e-12

N = TypeVar("N", int, float)


def _env_number(name: str, default: N, cast: Callable[[str], N]) -> N:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError(f"{name}={raw!r} is not a valid {cast.__name__}") from None


@dataclass(frozen=True)
class Settings:
    """Run defaults resolved from ``CLOCKMEM_*`` variables."""

    max_steps: int = DEFAULT_MAX_STEPS
    parallelism: int = DEFAULT_PARALLELISM
    seconds_per_mcs: float = DEFAULT_SECONDS_PER_MCS
    signing_key_dir: Path | None = None
    log_level: str = "INFO"

    @classmethod
    def from_env(cls) -> "Settings":
        """Read the environment; malformed values raise ``ConfigError``."""
        key_dir = os.getenv("CLOCKMEM_SIGNING_KEY_DIR", "")
        log_level = os.getenv("LOG_LEVEL", "INFO").upper()
        if not isinstance(logging.getLevelName(log_level), int):
            raise ConfigError(f"LOG_LEVEL={log_level!r} is not a logging level")
        return cls(
            max_steps=_env_number("CLOCKMEM_MAX_STEPS", DEFAULT_MAX_STEPS, int),
            parallelism=_env_number("CLOCKMEM_PARALLELISM", DEFAULT_PARALLELISM, int),
            seconds_per_mcs=_env_number("CLOCKMEM_SECONDS_PER_MCS", DEFAULT_SECONDS_PER_MCS, float),
            signing_key_dir=Path(key_dir) if key_dir else None,
            log_level=log_level,
        )
