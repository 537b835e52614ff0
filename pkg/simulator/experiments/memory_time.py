"""
Memory-time protocol: start fully polarized in species 0 and count MCS
until the stop rule first fires.

Realization ``k`` of an ensemble always uses the stream
``(master_seed, k)``, so the records do not depend on how many worker
processes produced them.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
from tqdm import tqdm

from shared.errors import ConfigError
from shared.schemas import EnsembleSummary, FillSpec, MemoryTimeRecord, ModelParams, StopRule
from shared.settings import DEFAULT_MAX_STEPS
from simulator.dynamics import run_sweeps
from simulator.lattice import bin_center, build_lattice
from simulator.streams import RngStream

logger = logging.getLogger(__name__)


def polarized_start(params: ModelParams) -> FillSpec:
    """All spins in species 0; XY spins start at the middle of bin 0."""
    if params.is_xy:
        return FillSpec.polarized_angle(bin_center(params.q_bin, params.xy_binning))
    return FillSpec.polarized(0)


def memory_time_single(
    params: ModelParams,
    realization_index: int,
    master_seed: int,
    stop: StopRule | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> MemoryTimeRecord:
    """Run one realization; censored if the rule has not fired after ``max_steps`` MCS."""
    if max_steps < 1:
        raise ConfigError(f"max_steps must be >= 1, got {max_steps}")
    stop = stop or StopRule()
    lattice = build_lattice(params, polarized_start(params))
    rng = RngStream(master_seed, realization_index)
    clock, fired = run_sweeps(lattice, rng, max_steps, stop=stop)
    if not fired:
        logger.debug(
            "Realization %d censored at %d MCS (L=%d q=%s T=%g)",
            realization_index, max_steps, params.L, params.label, params.T,
        )
    return MemoryTimeRecord(
        params=params,
        realization_index=realization_index,
        tau=clock.mcs if fired else None,
        censored=not fired,
        accepts=clock.accepts,
        attempts=clock.attempts,
    )


def _run_one(
    realization_index: int,
    params: ModelParams,
    master_seed: int,
    stop: StopRule,
    max_steps: int,
) -> MemoryTimeRecord:
    return memory_time_single(params, realization_index, master_seed, stop, max_steps)


def summarize_records(
    params: ModelParams,
    stop: StopRule,
    records: list[MemoryTimeRecord],
    master_seed: int,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> EnsembleSummary:
    """Mean, standard error and median over uncensored records."""
    taus = np.array([r.tau for r in records if not r.censored], dtype=np.float64)
    n_censored = sum(1 for r in records if r.censored)
    mean = stderr = median = None
    if taus.size:
        mean = float(taus.mean())
        median = float(np.median(taus))
        stderr = float(taus.std(ddof=1) / math.sqrt(taus.size)) if taus.size > 1 else 0.0
    return EnsembleSummary(
        params=params,
        stop=stop,
        n_realizations=len(records),
        n_censored=n_censored,
        mean_tau=mean,
        stderr_tau=stderr,
        median_tau=median,
        master_seed=master_seed,
        max_steps=max_steps,
        reliable=n_censored == 0 and taus.size > 0,
    )


def run_ensemble(
    params: ModelParams,
    n_realizations: int,
    master_seed: int,
    stop: StopRule | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
    parallelism: int = 1,
    progress: bool = False,
) -> tuple[EnsembleSummary, list[MemoryTimeRecord]]:
    """Run realizations ``0..n-1`` and summarize them."""
    if n_realizations < 1:
        raise ConfigError(f"n_realizations must be >= 1, got {n_realizations}")
    if parallelism < 1:
        raise ConfigError(f"parallelism must be >= 1, got {parallelism}")
    stop = stop or StopRule()
    worker = partial(_run_one, params=params, master_seed=master_seed, stop=stop, max_steps=max_steps)
    indices = range(n_realizations)
    label = f"L={params.L} q={params.label} T={params.T:g}"

    if parallelism == 1:
        records = [worker(k) for k in tqdm(indices, desc=label, disable=not progress)]
    else:
        chunksize = max(1, n_realizations // (parallelism * 8))
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            records = list(tqdm(
                pool.map(worker, indices, chunksize=chunksize),
                total=n_realizations, desc=label, disable=not progress,
            ))
    records.sort(key=lambda r: r.realization_index)

    summary = summarize_records(params, stop, records, master_seed, max_steps)
    if summary.n_censored:
        logger.warning(
            "%d of %d realizations censored at %d MCS (%s); summary marked unreliable",
            summary.n_censored, n_realizations, max_steps, label,
        )
    else:
        logger.info("Ensemble %s: mean tau %.6g +/- %.3g MCS", label, summary.mean_tau, summary.stderr_tau)
    return summary, records
