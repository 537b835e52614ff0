"""Record the magnetization trajectory of one realization."""

from __future__ import annotations

import logging

from shared.errors import ConfigError
from shared.schemas import FillSpec, ModelParams, Trajectory
from simulator.dynamics import run_sweeps
from simulator.experiments.memory_time import polarized_start
from simulator.lattice import build_lattice
from simulator.observables import sample_observables
from simulator.streams import RngStream

logger = logging.getLogger(__name__)


def record_precession(
    params: ModelParams,
    master_seed: int,
    duration: int,
    sampling_interval: int,
    start: FillSpec | None = None,
    realization_index: int = 0,
) -> Trajectory:
    """Sample observables at t = 0, Δ, 2Δ, ... up to ``duration`` MCS."""
    if sampling_interval < 1:
        raise ConfigError(f"sampling_interval must be >= 1, got {sampling_interval}")
    if duration < sampling_interval:
        raise ConfigError(f"duration {duration} shorter than sampling_interval {sampling_interval}")

    start = start or polarized_start(params)
    lattice = build_lattice(params, start)
    rng = RngStream(master_seed, realization_index)

    samples = [sample_observables(lattice, 0)]
    t = 0
    while t + sampling_interval <= duration:
        run_sweeps(lattice, rng, sampling_interval, t0=t)
        t += sampling_interval
        samples.append(sample_observables(lattice, t))

    logger.info(
        "Recorded %d samples over %d MCS (L=%d q=%s T=%g)",
        len(samples), t, params.L, params.label, params.T,
    )
    return Trajectory(
        params=params,
        sampling_interval=sampling_interval,
        master_seed=master_seed,
        realization_index=realization_index,
        start=start,
        samples=samples,
    )
