"""Conversion between Monte Carlo steps and physical time."""

from __future__ import annotations

from shared.errors import ConfigError
from shared.settings import DEFAULT_SECONDS_PER_MCS

SECONDS_PER_DAY = 86400.0


def mcs_to_seconds(steps: float, seconds_per_mcs: float = DEFAULT_SECONDS_PER_MCS) -> float:
    """Physical duration of ``steps`` MCS at one spin-flip attempt time per MCS."""
    if steps < 0:
        raise ConfigError(f"steps must be non-negative, got {steps}")
    if seconds_per_mcs <= 0:
        raise ConfigError("seconds_per_mcs must be positive")
    return steps * seconds_per_mcs


def size_for_timescale(
    seconds: float,
    z: float = 2.0,
    amplitude: float = 1.0,
    seconds_per_mcs: float = DEFAULT_SECONDS_PER_MCS,
) -> float:
    """Linear size L whose memory time A·L^z lasts ``seconds``."""
    if seconds <= 0 or z <= 0 or amplitude <= 0 or seconds_per_mcs <= 0:
        raise ConfigError("seconds, z, amplitude and seconds_per_mcs must be positive")
    return (seconds / (seconds_per_mcs * amplitude)) ** (1.0 / z)
