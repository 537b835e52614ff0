"""
In-memory registry of memory-time records.

Records from several CSV files are merged here and grouped by model
parameters before fitting.  A record is identified by its model
parameters and realization index; re-adding one replaces it.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Iterable, Sequence

from shared.errors import ConfigError
from shared.schemas import MemoryTimeRecord, ModelParams

logger = logging.getLogger(__name__)

GROUP_KEYS = ("q", "q_bin", "T", "xy_binning", "L")
DEFAULT_GROUP = ("q", "T")


class RecordStore:
    """Records keyed by ``(params, realization_index)``."""

    def __init__(self) -> None:
        self._records: dict[tuple[ModelParams, int], MemoryTimeRecord] = {}

    # ------------------------------------------------------------------
    # Write
    # ------------------------------------------------------------------

    def add(self, record: MemoryTimeRecord) -> MemoryTimeRecord:
        key = (record.params, record.realization_index)
        if key in self._records:
            logger.info(
                "Replacing record %d for L=%d q=%s T=%g",
                record.realization_index, record.params.L, record.params.label, record.params.T,
            )
        self._records[key] = record
        return record

    def add_many(self, records: Iterable[MemoryTimeRecord]) -> int:
        n = 0
        for record in records:
            self.add(record)
            n += 1
        logger.info("Loaded %d records (%d in store)", n, len(self))
        return n

    def remove(self, params: ModelParams, realization_index: int) -> bool:
        key = (params, realization_index)
        if key in self._records:
            del self._records[key]
            return True
        return False

    # ------------------------------------------------------------------
    # Read
    # ------------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._records)

    def get(self, params: ModelParams, realization_index: int) -> MemoryTimeRecord | None:
        return self._records.get((params, realization_index))

    def all_records(self) -> list[MemoryTimeRecord]:
        return sorted(
            self._records.values(),
            key=lambda r: (r.params.label, r.params.T, r.params.L, r.realization_index),
        )

    def n_censored(self) -> int:
        return sum(1 for r in self._records.values() if r.censored)

    def groups(self, keys: Sequence[str] = DEFAULT_GROUP) -> dict[tuple, list[MemoryTimeRecord]]:
        """Records partitioned by the values of ``keys`` on their params."""
        unknown = [k for k in keys if k not in GROUP_KEYS]
        if unknown:
            raise ConfigError(f"unknown group keys {unknown}; choose from {list(GROUP_KEYS)}")
        grouped: dict[tuple, list[MemoryTimeRecord]] = defaultdict(list)
        for record in self.all_records():
            grouped[tuple(_key_value(record.params, k) for k in keys)].append(record)
        return dict(grouped)


def _key_value(params: ModelParams, key: str):
    value = getattr(params, key)
    if key == "q":
        return params.label
    if key == "xy_binning":
        return value.value
    return value
