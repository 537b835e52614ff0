"""
Replayable random-number streams.

Contract (bit-exact, platform independent):
  • Bit generator: NumPy ``Philox`` (Philox4x64-10, counter based).
  • Key: the two 64-bit words ``[master_seed, realization_index]``.
  • Counter: starts at ``lane << 192``.  Lane 0 feeds the dynamics,
    lane 1 feeds uniform-random initial fills, so the two never overlap.
  • Words are consumed in order through ``random_raw``; every value the
    simulator needs is an integer transform of one 64-bit word ``w``:
      index in [0, n)  : ((w >> 32) * n) >> 32
      uniform in [0, 1): (w >> 11) * 2**-53

Streams for different realizations are keyed, never split from one
another at run time, so any realization can be replayed in isolation.
"""

from __future__ import annotations

import numpy as np

from shared.errors import ConfigError

DYNAMICS_LANE = 0
FILL_LANE = 1

_WORD_LIMIT = 2**64
_HI = np.uint64(32)
_MANTISSA = np.uint64(11)
_UNIT = 2.0**-53


class RngStream:
    """Counter-based stream identified by ``(master_seed, realization_index, lane)``."""

    def __init__(self, master_seed: int, realization_index: int, lane: int = DYNAMICS_LANE) -> None:
        for name, value in (("master_seed", master_seed), ("realization_index", realization_index)):
            if not 0 <= int(value) < _WORD_LIMIT:
                raise ConfigError(f"{name} must fit in an unsigned 64-bit word, got {value}")
        if not 0 <= lane < 2**64:
            raise ConfigError(f"lane out of range: {lane}")
        self.master_seed = int(master_seed)
        self.realization_index = int(realization_index)
        self.lane = int(lane)
        key = np.array([self.master_seed, self.realization_index], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key, counter=self.lane << 192)

    @property
    def identity(self) -> tuple[int, int, int]:
        return self.master_seed, self.realization_index, self.lane

    def raw(self, n: int) -> np.ndarray:
        """Next ``n`` 64-bit words of the stream."""
        return self._bitgen.random_raw(n)

    def __repr__(self) -> str:
        return (
            f"RngStream(master_seed={self.master_seed}, "
            f"realization_index={self.realization_index}, lane={self.lane})"
        )


def scale_draws(words: np.ndarray, n: int) -> np.ndarray:
    """Map words to integers in ``[0, n)`` by multiply-shift on the high half."""
    return (((words >> _HI) * np.uint64(n)) >> _HI).astype(np.int64)


def unit_draws(words: np.ndarray) -> np.ndarray:
    """Map words to doubles in ``[0, 1)`` using their top 53 bits."""
    return (words >> _MANTISSA).astype(np.float64) * _UNIT
