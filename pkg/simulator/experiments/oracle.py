"""
Exact hitting-time oracle for tiny finite-q lattices.

The single-attempt Metropolis chain over all q**(L²) configurations is
built as a sparse matrix; states where the stop rule holds are made
absorbing and the expected absorption time from the polarized state is
obtained from one sparse linear solve.  Configurations are encoded as
base-q integers with site 0 as the least significant digit.

Two cadences are offered.  ``attempt`` absorbs as soon as any single
attempt reaches a stop state.  ``sweep`` absorbs only at sweep
boundaries, which is how the simulator checks the rule; it uses the
dense L²-step matrix and is limited to small state spaces.
"""

from __future__ import annotations

import logging
import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from shared.errors import ConfigError
from shared.schemas import ModelParams, OracleCadence, QValue, StopKind, StopRule, CONTINUOUS
from simulator.dynamics import trace_states
from simulator.lattice import build_lattice, cos_class_table, neighbor_indices
from simulator.experiments.memory_time import polarized_start
from simulator.streams import RngStream

logger = logging.getLogger(__name__)

MAX_ORACLE_STATES = 10**6
MAX_SWEEP_STATES = 4096


def _check_geometry(q: QValue, L: int, limit: int = MAX_ORACLE_STATES) -> int:
    if q == CONTINUOUS or isinstance(q, str):
        raise ConfigError("the exact oracle needs finite q")
    if q < 2 or L < 2:
        raise ConfigError(f"need q >= 2 and L >= 2, got q={q} L={L}")
    n_states = q ** (L * L)
    if n_states > limit:
        raise ConfigError(f"state space q^(L^2) = {n_states} exceeds {limit}")
    return n_states


def _configurations(q: int, n_sites: int) -> np.ndarray:
    """(q**n_sites, n_sites) digit table; row k holds the spins of state k."""
    codes = np.arange(q**n_sites, dtype=np.int64)
    powers = q ** np.arange(n_sites, dtype=np.int64)
    return (codes[:, None] // powers[None, :]) % q


def _energies(digits: np.ndarray, q: int, L: int) -> np.ndarray:
    table = cos_class_table(q)
    energy = np.zeros(digits.shape[0], dtype=np.float64)
    for i in range(L * L):
        _, down, _, right = neighbor_indices(i, L)
        for j in (right, down):
            d = (digits[:, i] - digits[:, j]) % q
            energy -= table[np.minimum(d, q - d)]
    return energy


def _acceptance(delta: np.ndarray, T: float) -> np.ndarray:
    if T <= 0.0:
        return (delta <= 0.0).astype(np.float64)
    with np.errstate(over="ignore"):
        return np.where(delta <= 0.0, 1.0, np.exp(-np.maximum(delta, 0.0) / T))


def _absorbing(digits: np.ndarray, q: int, kind: StopKind) -> np.ndarray:
    counts = np.stack([(digits == s).sum(axis=1) for s in range(q)], axis=1)
    if kind == StopKind.PLURALITY_LOSS:
        return (counts[:, 1:] > counts[:, [0]]).any(axis=1)
    return counts[:, 1:].sum(axis=1) > counts[:, 0]


def _transition_matrix(digits: np.ndarray, q: int, L: int, T: float) -> sp.csr_matrix:
    n_states, n_sites = digits.shape
    energy = _energies(digits, q, L)
    codes = np.arange(n_states, dtype=np.int64)
    rows, cols, vals = [], [], []
    rate = 1.0 / (n_sites * (q - 1))
    for i in range(n_sites):
        power = q**i
        for offset in range(1, q):
            new = (digits[:, i] + offset) % q
            target = codes + (new - digits[:, i]) * power
            rows.append(codes)
            cols.append(target)
            vals.append(rate * _acceptance(energy[target] - energy, T))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    stay = 1.0 - np.bincount(rows, weights=vals, minlength=n_states)
    rows = np.concatenate([rows, codes])
    cols = np.concatenate([cols, codes])
    vals = np.concatenate([vals, stay])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_states, n_states))


def transition_matrix(q: int, L: int, T: float) -> sp.csr_matrix:
    """Row-stochastic single-attempt Metropolis matrix over all configurations."""
    _check_geometry(q, L)
    return _transition_matrix(_configurations(q, L * L), q, L, T)


def boltzmann_distribution(q: int, L: int, T: float) -> np.ndarray:
    """exp(-E/T)/Z for every configuration, by brute-force enumeration."""
    _check_geometry(q, L)
    if not T > 0.0:
        raise ConfigError("Boltzmann weights need T > 0")
    energy = _energies(_configurations(q, L * L), q, L)
    if math.isinf(T):
        return np.full(energy.shape[0], 1.0 / energy.shape[0])
    weights = np.exp(-(energy - energy.min()) / T)
    return weights / weights.sum()


def encode_state(states: list[int] | np.ndarray, q: int) -> int:
    states = np.asarray(states, dtype=np.int64)
    return int(np.dot(states, q ** np.arange(states.shape[0], dtype=np.int64)))


def hitting_time_from_geometry(
    q: QValue,
    L: int,
    T: float,
    stop: StopRule | None = None,
    cadence: OracleCadence = OracleCadence.ATTEMPT,
    start: list[int] | None = None,
) -> float:
    """Expected MCS until the stop rule first holds, starting from ``start`` (default all 0)."""
    stop = stop or StopRule()
    limit = MAX_SWEEP_STATES if cadence == OracleCadence.SWEEP else MAX_ORACLE_STATES
    n_states = _check_geometry(q, L, limit)
    if not T > 0.0:
        raise ConfigError("the exact oracle needs T > 0")
    n_sites = L * L
    if start is not None and len(start) != n_sites:
        raise ConfigError(f"start state needs {n_sites} spins")

    digits = _configurations(q, n_sites)
    absorbing = _absorbing(digits, q, stop.kind)
    start_code = 0 if start is None else encode_state(start, q)
    if not 0 <= start_code < n_states:
        raise ConfigError("start state outside [0, q)")
    if absorbing[start_code]:
        logger.warning("Start state already satisfies %s; hitting time is 0", stop.kind.value)
        return 0.0

    P = _transition_matrix(digits, q, L, T)
    transient = np.flatnonzero(~absorbing)
    position = int(np.searchsorted(transient, start_code))

    if cadence == OracleCadence.ATTEMPT:
        Q = P[transient][:, transient]
        A = sp.identity(transient.size, format="csc") - Q.tocsc()
        h = spsolve(A, np.ones(transient.size))
        value = float(h[position]) / n_sites
    else:
        step = np.linalg.matrix_power(P.toarray(), n_sites * stop.check_interval)
        Q = step[np.ix_(transient, transient)]
        h = np.linalg.solve(np.eye(transient.size) - Q, np.ones(transient.size))
        value = float(h[position]) * stop.check_interval

    logger.info(
        "Oracle q=%s L=%d T=%g %s (%s cadence): %.12g MCS",
        q, L, T, stop.kind.value, cadence.value, value,
    )
    return value


def exact_hitting_time_oracle(
    params: ModelParams,
    stop: StopRule | None = None,
    cadence: OracleCadence = OracleCadence.ATTEMPT,
) -> float:
    """Expected memory time of ``params`` from the polarized state."""
    if params.is_xy:
        raise ConfigError("the exact oracle needs finite q")
    return hitting_time_from_geometry(params.q, params.L, params.T, stop, cadence)


def equilibrium_histogram(
    params: ModelParams,
    master_seed: int,
    n_sweeps: int,
    burn_in: int = 0,
    realization_index: int = 0,
) -> np.ndarray:
    """Empirical distribution over configurations, sampled after every sweep."""
    if params.is_xy:
        raise ConfigError("equilibrium histograms need finite q")
    n_states = _check_geometry(params.q, params.L)
    lattice = build_lattice(params, polarized_start(params))
    rng = RngStream(master_seed, realization_index)
    if burn_in:
        trace_states(lattice, rng, burn_in)
    codes = trace_states(lattice, rng, n_sweeps)
    return np.bincount(codes, minlength=n_states) / n_sweeps
