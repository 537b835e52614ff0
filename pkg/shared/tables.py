"""
CSV tables for records, trajectories and island scans.

Floats are written with 17 significant digits so they read back to the
same double, and a re-run with the same configuration reproduces the
file byte for byte.
"""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Iterable
from pathlib import Path

from shared.errors import ConfigError
from shared.schemas import (
    ClusterScanRow,
    MemoryTimeRecord,
    ModelParams,
    ObservableSample,
    Trajectory,
    XYBinning,
)

logger = logging.getLogger(__name__)

RECORD_COLUMNS = [
    "q", "q_bin", "L", "T", "realization_index", "tau_mcs", "censored", "accepts", "attempts", "xy_binning",
]
# files written before the binning column still read, as floor-binned
REQUIRED_RECORD_COLUMNS = RECORD_COLUMNS[:-1]
TRAJECTORY_COLUMNS = [
    "t", "m", "theta", "theta_defined", "energy", "energy_per_site", "effective_sector",
]
CLUSTER_COLUMNS = [
    "L", "T", "q", "sample_index", "largest_0", "largest_non0", "n_clusters_0",
    "wraps_x", "wraps_y", "largest_excitation",
]


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_bool(x: bool) -> str:
    return "true" if x else "false"


def _parse_bool(text: str) -> bool:
    token = text.strip().lower()
    if token in ("true", "1"):
        return True
    if token in ("false", "0"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _write(path: Path, header: list[str], rows: Iterable[list[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        n = 0
        for row in rows:
            writer.writerow(row)
            n += 1
    logger.info("Wrote %d rows to %s", n, path)
    return path


def _read(path: Path, required: list[str]) -> list[dict[str, str]]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"input not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            raise ConfigError(f"{path} lacks columns {missing}")
        return list(reader)


# ---------------------------------------------------------------------------
# Memory-time records
# ---------------------------------------------------------------------------

def write_records_csv(path: str | Path, records: Iterable[MemoryTimeRecord]) -> Path:
    return _write(Path(path), RECORD_COLUMNS, (
        [
            r.params.label,
            str(r.params.q_bin),
            str(r.params.L),
            fmt_float(r.params.T),
            str(r.realization_index),
            "" if r.tau is None else str(r.tau),
            _fmt_bool(r.censored),
            str(r.accepts),
            str(r.attempts),
            r.params.xy_binning.value,
        ]
        for r in records
    ))


def read_records_csv(path: str | Path) -> list[MemoryTimeRecord]:
    records = []
    for row in _read(Path(path), REQUIRED_RECORD_COLUMNS):
        try:
            params = ModelParams(
                L=int(row["L"]),
                q=row["q"],
                T=float(row["T"]),
                q_bin=int(row["q_bin"]),
                xy_binning=XYBinning(row.get("xy_binning") or XYBinning.FLOOR.value),
            )
            records.append(MemoryTimeRecord(
                params=params,
                realization_index=int(row["realization_index"]),
                tau=int(row["tau_mcs"]) if row["tau_mcs"] else None,
                censored=_parse_bool(row["censored"]),
                accepts=int(row["accepts"]),
                attempts=int(row["attempts"]),
            ))
        except ValueError as exc:
            raise ConfigError(f"bad record row in {path}: {exc}") from exc
    return records


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

def write_trajectory_csv(path: str | Path, trajectory: Trajectory) -> Path:
    k = trajectory.params.n_species
    header = TRAJECTORY_COLUMNS + [f"count_{s}" for s in range(k)]
    return _write(Path(path), header, (
        [
            str(s.t),
            fmt_float(s.m),
            fmt_float(s.theta),
            _fmt_bool(s.theta_defined),
            fmt_float(s.energy),
            fmt_float(s.energy_per_site),
            fmt_float((k * s.theta / (2 * math.pi)) % k),
            *(str(c) for c in s.counts),
        ]
        for s in trajectory.samples
    ))


def read_trajectory_csv(path: str | Path) -> list[ObservableSample]:
    rows = _read(Path(path), TRAJECTORY_COLUMNS)
    samples = []
    for row in rows:
        count_cols = sorted((c for c in row if c.startswith("count_")), key=lambda c: int(c.split("_")[1]))
        samples.append(ObservableSample(
            t=int(row["t"]),
            m=float(row["m"]),
            theta=float(row["theta"]),
            theta_defined=_parse_bool(row["theta_defined"]),
            energy=float(row["energy"]),
            energy_per_site=float(row["energy_per_site"]),
            counts=[int(row[c]) for c in count_cols],
        ))
    return samples


# ---------------------------------------------------------------------------
# Island scans
# ---------------------------------------------------------------------------

def write_cluster_csv(path: str | Path, rows: Iterable[ClusterScanRow]) -> Path:
    return _write(Path(path), CLUSTER_COLUMNS, (
        [
            str(r.L),
            fmt_float(r.T),
            str(r.q),
            str(r.sample_index),
            str(r.largest_0),
            str(r.largest_non0),
            str(r.n_clusters_0),
            _fmt_bool(r.wraps_x),
            _fmt_bool(r.wraps_y),
            str(r.largest_excitation),
        ]
        for r in rows
    ))


def read_cluster_csv(path: str | Path) -> list[ClusterScanRow]:
    return [
        ClusterScanRow(
            L=int(row["L"]),
            T=float(row["T"]),
            q=row["q"],
            sample_index=int(row["sample_index"]),
            largest_0=int(row["largest_0"]),
            largest_non0=int(row["largest_non0"]),
            largest_excitation=int(row["largest_excitation"]),
            n_clusters_0=int(row["n_clusters_0"]),
            wraps_x=_parse_bool(row["wraps_x"]),
            wraps_y=_parse_bool(row["wraps_y"]),
        )
        for row in _read(Path(path), CLUSTER_COLUMNS)
    ]
