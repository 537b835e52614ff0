"""
Equilibrium largest-island scan.

For each lattice size the system starts polarized in species 0, is
burned in for ``burn_in_factor·L²`` MCS and is then sampled every
``spacing_factor·L²`` MCS.  Size ``L`` uses the stream
``(master_seed, L)``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from shared.errors import ConfigError
from shared.schemas import ClusterScanRow, IslandScan, IslandStats, ModelParams
from simulator.clusters import excitation_report, label_clusters, largest_other_species
from simulator.dynamics import run_sweeps
from simulator.experiments.memory_time import polarized_start
from simulator.lattice import SpinLattice, build_lattice
from simulator.streams import RngStream

logger = logging.getLogger(__name__)


def _scan_row(lattice: SpinLattice, sample_index: int) -> ClusterScanRow:
    params = lattice.params
    ground = label_clusters(lattice, 0)
    return ClusterScanRow(
        L=params.L,
        T=params.T,
        q=params.q,
        sample_index=sample_index,
        largest_0=ground.largest,
        largest_non0=largest_other_species(lattice),
        largest_excitation=excitation_report(lattice).largest,
        n_clusters_0=ground.n_clusters,
        wraps_x=ground.wraps_x,
        wraps_y=ground.wraps_y,
    )


def _scan_size(
    params: ModelParams,
    n_samples: int,
    master_seed: int,
    burn_in_factor: int,
    spacing_factor: int,
) -> list[ClusterScanRow]:
    lattice = build_lattice(params, polarized_start(params))
    rng = RngStream(master_seed, params.L)
    n = params.n_sites
    t = 0
    if burn_in_factor:
        run_sweeps(lattice, rng, burn_in_factor * n)
        t = burn_in_factor * n
    rows = [_scan_row(lattice, 0)]
    for k in range(1, n_samples):
        run_sweeps(lattice, rng, spacing_factor * n, t0=t)
        t += spacing_factor * n
        rows.append(_scan_row(lattice, k))
    logger.info("Island scan L=%d: %d samples after %d MCS", params.L, n_samples, t)
    return rows


def _stats(L: int, rows: list[ClusterScanRow]) -> IslandStats:
    g = np.array([r.largest_0 for r in rows], dtype=np.float64)
    o = np.array([r.largest_non0 for r in rows], dtype=np.float64)
    e = np.array([r.largest_excitation for r in rows], dtype=np.float64)
    gq = np.quantile(g, [0.1, 0.5, 0.9])
    oq = np.quantile(o, [0.1, 0.5, 0.9])
    return IslandStats(
        L=L,
        n_samples=len(rows),
        mean_largest_0=float(g.mean()),
        q10_largest_0=float(gq[0]),
        q50_largest_0=float(gq[1]),
        q90_largest_0=float(gq[2]),
        mean_largest_non0=float(o.mean()),
        q10_largest_non0=float(oq[0]),
        q50_largest_non0=float(oq[1]),
        q90_largest_non0=float(oq[2]),
        mean_largest_excitation=float(e.mean()),
        wrap_fraction_0=sum(1 for r in rows if r.wraps_x or r.wraps_y) / len(rows),
    )


def largest_island_scan(
    params: ModelParams,
    L_list: list[int],
    n_samples: int,
    master_seed: int,
    burn_in_factor: int = 20,
    spacing_factor: int = 1,
    parallelism: int = 1,
) -> IslandScan:
    """Largest same-species islands of ``params`` at each size in ``L_list``."""
    if not L_list:
        raise ConfigError("L_list is empty")
    if n_samples < 1:
        raise ConfigError(f"n_samples must be >= 1, got {n_samples}")
    if burn_in_factor < 0 or spacing_factor < 1:
        raise ConfigError("need burn_in_factor >= 0 and spacing_factor >= 1")

    sized = [ModelParams(**{**params.model_dump(), "L": L}) for L in L_list]
    worker = partial(
        _scan_size,
        n_samples=n_samples,
        master_seed=master_seed,
        burn_in_factor=burn_in_factor,
        spacing_factor=spacing_factor,
    )
    if parallelism == 1 or len(sized) == 1:
        per_size = [worker(p) for p in sized]
    else:
        with ProcessPoolExecutor(max_workers=min(parallelism, len(sized))) as pool:
            per_size = list(pool.map(worker, sized))

    return IslandScan(
        q=params.q,
        T=params.T,
        q_bin=params.q_bin,
        L_list=list(L_list),
        n_samples=n_samples,
        master_seed=master_seed,
        burn_in_factor=burn_in_factor,
        spacing_factor=spacing_factor,
        rows=[row for rows in per_size for row in rows],
        stats=[_stats(p.L, rows) for p, rows in zip(sized, per_size)],
    )
