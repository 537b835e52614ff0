"""
Single-spin Metropolis dynamics.

One attempt consumes three consecutive words of the realization's
dynamics stream, in this order:

  1. site        : ((w >> 32) * L²) >> 32
  2. proposal    : finite q -> offset ((w >> 32) * (q-1)) >> 32, new state
                   (s + 1 + offset) mod q, uniform over the q-1 other states;
                   XY -> θ' = 2π·(w >> 11)·2**-53
  3. acceptance  : u = (w >> 11)·2**-53, accept iff u < min(1, exp(-ΔE/T))

One Monte Carlo step (MCS) is L² attempts.  Words are drawn in blocks
of whole sweeps; the block size never changes which word feeds which
attempt, so results do not depend on it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from shared.errors import ConfigError
from shared.schemas import StopRule
from simulator import kernels
from simulator.kernels import acceptance_probability
from simulator.lattice import SpinLattice
from simulator.streams import RngStream, scale_draws, unit_draws

logger = logging.getLogger(__name__)

__all__ = [
    "SweepClock",
    "acceptance_probability",
    "metropolis_attempt",
    "run_sweeps",
    "sweep",
    "trace_states",
]

# Upper bound on attempts drawn per block.
BLOCK_ATTEMPTS = 1 << 16

_NO_CODES = np.zeros(0, dtype=np.int64)


@dataclass
class SweepClock:
    """Progress counters of one realization."""

    mcs: int = 0
    attempts: int = 0
    accepts: int = 0

    def advance(self, mcs: int, attempts: int, accepts: int) -> None:
        self.mcs += mcs
        self.attempts += attempts
        self.accepts += accepts

    @property
    def acceptance_ratio(self) -> float:
        return self.accepts / self.attempts if self.attempts else 0.0


def _run_block(
    lattice: SpinLattice,
    rng: RngStream,
    n_sweeps: int,
    per_sweep: int,
    stop_code: int = kernels.STOP_NONE,
    check_interval: int = 1,
    t0: int = 0,
    codes: np.ndarray = _NO_CODES,
) -> tuple[int, int, bool]:
    params = lattice.params
    words = rng.raw(3 * n_sweeps * per_sweep).reshape(n_sweeps, per_sweep, 3)
    sites = scale_draws(words[:, :, 0], params.n_sites)
    uniforms = unit_draws(words[:, :, 2])
    T = float(params.T)

    if params.is_xy:
        proposals = unit_draws(words[:, :, 1]) * kernels.TWO_PI
        done, accepts, de_sum, fired = kernels.xy_block(
            lattice.spins, params.L, params.q_bin, lattice.bin_shift, T,
            sites, proposals, uniforms, lattice.counts,
            stop_code, check_interval, t0,
        )
        lattice.apply_energy_delta(de_sum)
    else:
        offsets = scale_draws(words[:, :, 1], lattice.q - 1)
        done, accepts, fired = kernels.clock_block(
            lattice.spins, params.L, lattice.q, lattice.cos_class, T,
            sites, offsets, uniforms, lattice.bond_hist, lattice.counts,
            stop_code, check_interval, t0, codes,
        )
    lattice.record_accepts(int(accepts))
    return int(done), int(accepts), bool(fired)


def metropolis_attempt(lattice: SpinLattice, rng: RngStream) -> bool:
    """One attempt; returns whether the move was accepted."""
    _, accepts, _ = _run_block(lattice, rng, 1, 1)
    return accepts == 1


def sweep(lattice: SpinLattice, rng: RngStream) -> SweepClock:
    """Exactly L² attempts (one MCS)."""
    n = lattice.params.n_sites
    _, accepts, _ = _run_block(lattice, rng, 1, n)
    return SweepClock(mcs=1, attempts=n, accepts=accepts)


def run_sweeps(
    lattice: SpinLattice,
    rng: RngStream,
    n_sweeps: int,
    stop: StopRule | None = None,
    t0: int = 0,
) -> tuple[SweepClock, bool]:
    """Run up to ``n_sweeps`` MCS, halting early once ``stop`` fires.

    The stop rule is checked after every sweep whose absolute time
    ``t0 + k`` is a multiple of ``stop.check_interval``.  Returns the
    clock increment and whether the rule fired.
    """
    if n_sweeps < 0:
        raise ConfigError(f"n_sweeps must be non-negative, got {n_sweeps}")
    n = lattice.params.n_sites
    stop_code = stop.code if stop is not None else kernels.STOP_NONE
    check_interval = stop.check_interval if stop is not None else 1
    cap = max(1, BLOCK_ATTEMPTS // n)

    clock = SweepClock()
    block = 1
    while clock.mcs < n_sweeps:
        size = min(block, cap, n_sweeps - clock.mcs)
        done, accepts, fired = _run_block(
            lattice, rng, size, n, stop_code, check_interval, t0 + clock.mcs,
        )
        clock.advance(done, done * n, accepts)
        if fired:
            return clock, True
        block *= 2
    return clock, False


def trace_states(lattice: SpinLattice, rng: RngStream, n_sweeps: int) -> np.ndarray:
    """Base-q code of the configuration after each of ``n_sweeps`` sweeps.

    Only meaningful for finite q on lattices small enough for q**L² to fit
    in an int64; used by the equilibrium checks of the exact oracle.
    """
    if lattice.params.is_xy:
        raise ConfigError("state tracing needs finite q")
    if lattice.q ** lattice.params.n_sites >= 2**63:
        raise ConfigError("state space too large to encode")
    n = lattice.params.n_sites
    cap = max(1, BLOCK_ATTEMPTS // n)
    out = np.empty(n_sweeps, dtype=np.int64)
    done_total = 0
    while done_total < n_sweeps:
        size = min(cap, n_sweeps - done_total)
        _run_block(lattice, rng, size, n, codes=out[done_total:done_total + size])
        done_total += size
    return out
