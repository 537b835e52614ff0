"""
Periodic L×L spin lattice for the q-state clock model and the XY model.

Sites are numbered row-major, ``i = r*L + c``.  Each site owns the bond
to its right and the bond below it, so the torus has exactly ``2L²``
bonds and every nearest-neighbour pair is counted once.

Finite-q lattices keep a histogram over bond classes
``c = min(d, q - d)``; the energy is ``-Σ hist[c]·cos(2πc/q)``, so the
cached and freshly recomputed energies are the same float.  XY lattices
carry a float accumulator instead, which is checked against a full
recomputation every :data:`AUDIT_INTERVAL` accepted moves.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from shared.errors import ConfigError, SimulationError
from shared.schemas import FillKind, FillSpec, ModelParams, XYBinning
from simulator import kernels
from simulator.streams import FILL_LANE, RngStream, scale_draws, unit_draws

logger = logging.getLogger(__name__)

AUDIT_INTERVAL = 10**6
ENERGY_TOLERANCE = 1e-6


def neighbor_indices(i: int, L: int) -> tuple[int, int, int, int]:
    """(up, down, left, right) of site ``i`` with periodic wrap."""
    if L < 1:
        raise ConfigError(f"L must be positive, got {L}")
    if not 0 <= i < L * L:
        raise IndexError(f"site {i} outside a {L}x{L} lattice")
    r, c = divmod(i, L)
    return (
        ((r + L - 1) % L) * L + c,
        ((r + 1) % L) * L + c,
        r * L + (c + L - 1) % L,
        r * L + (c + 1) % L,
    )


def cos_class_table(q: int) -> np.ndarray:
    """cos(2πc/q) for every bond class c in [0, q//2]."""
    return np.cos(2.0 * math.pi * np.arange(q // 2 + 1) / q)


def bin_shift(binning: XYBinning) -> float:
    return 0.5 if binning == XYBinning.CENTERED else 0.0


def bin_center(q_bin: int, binning: XYBinning = XYBinning.FLOOR) -> float:
    """Angle at the middle of census bin 0."""
    return (0.5 - bin_shift(binning)) * kernels.TWO_PI / q_bin


def species_of_angles(angles: np.ndarray, q_bin: int, binning: XYBinning = XYBinning.FLOOR) -> np.ndarray:
    """Census bin of each XY angle; floor bins start at 0, centered bins straddle it."""
    return kernels.angle_bins(np.ascontiguousarray(angles, dtype=np.float64), q_bin, bin_shift(binning))


def _bond_histogram(spins: np.ndarray, L: int, q: int) -> np.ndarray:
    grid = spins.reshape(L, L)
    hist = np.zeros(q // 2 + 1, dtype=np.int64)
    for partner in (np.roll(grid, -1, axis=1), np.roll(grid, -1, axis=0)):
        d = (grid - partner) % q
        hist += np.bincount(np.minimum(d, q - d).ravel(), minlength=q // 2 + 1)
    return hist


def _xy_energy(angles: np.ndarray, L: int) -> float:
    grid = angles.reshape(L, L)
    right = np.cos(grid - np.roll(grid, -1, axis=1)).sum()
    down = np.cos(grid - np.roll(grid, -1, axis=0)).sum()
    return -float(right + down)


class SpinLattice:
    """Spin array plus the census and energy bookkeeping the dynamics maintain."""

    def __init__(self, params: ModelParams, spins: np.ndarray) -> None:
        self.params = params
        self.L = params.L
        if params.is_xy:
            self.spins = np.ascontiguousarray(spins, dtype=np.float64)
            self.cos_class = np.zeros(0, dtype=np.float64)
            self.bond_hist = np.zeros(0, dtype=np.int64)
            self._energy = _xy_energy(self.spins, self.L)
        else:
            self.q = int(params.q)
            self.spins = np.ascontiguousarray(spins, dtype=np.int64)
            self.cos_class = cos_class_table(self.q)
            self.bond_hist = _bond_histogram(self.spins, self.L, self.q)
            self._energy = 0.0
        self.counts = np.bincount(self.species_map(), minlength=params.n_species).astype(np.int64)
        self._accepts_since_audit = 0

    # ------------------------------------------------------------------
    # Read
    # ------------------------------------------------------------------

    @property
    def cached_energy(self) -> float:
        if self.params.is_xy:
            return self._energy
        return -float(np.dot(self.bond_hist, self.cos_class))

    @property
    def bin_shift(self) -> float:
        return bin_shift(self.params.xy_binning)

    def grid(self) -> np.ndarray:
        return self.spins.reshape(self.L, self.L)

    def species_map(self) -> np.ndarray:
        """Species of each site; XY angles are binned into q_bin sectors."""
        if self.params.is_xy:
            return species_of_angles(self.spins, self.params.q_bin, self.params.xy_binning)
        return self.spins

    def copy(self) -> "SpinLattice":
        clone = SpinLattice.__new__(SpinLattice)
        clone.__dict__.update(self.__dict__)
        clone.spins = self.spins.copy()
        clone.counts = self.counts.copy()
        clone.bond_hist = self.bond_hist.copy()
        return clone

    # ------------------------------------------------------------------
    # Bookkeeping
    # ------------------------------------------------------------------

    def apply_energy_delta(self, delta: float) -> None:
        self._energy += delta

    def record_accepts(self, n: int) -> None:
        self._accepts_since_audit += n
        if self._accepts_since_audit >= AUDIT_INTERVAL:
            self.audit()

    def audit(self) -> None:
        """Compare incremental state against a full recount; resync the XY energy."""
        recount = np.bincount(self.species_map(), minlength=self.params.n_species)
        if not np.array_equal(recount, self.counts):
            raise SimulationError(
                f"census drifted: cached {self.counts.tolist()} vs recount {recount.tolist()}"
            )
        if self.params.is_xy:
            fresh = _xy_energy(self.spins, self.L)
            drift = abs(fresh - self._energy)
            if drift > ENERGY_TOLERANCE:
                raise SimulationError(f"XY energy drifted by {drift:.3e}")
            self._energy = fresh
        elif not np.array_equal(_bond_histogram(self.spins, self.L, self.q), self.bond_hist):
            raise SimulationError("bond-class histogram drifted")
        logger.debug("Audit passed after %d accepts", self._accepts_since_audit)
        self._accepts_since_audit = 0


# ----------------------------------------------------------------------
# Construction
# ----------------------------------------------------------------------

def build_lattice(params: ModelParams, fill: FillSpec | None = None) -> SpinLattice:
    """Create a lattice from a polarized, uniform-random or explicit fill."""
    if fill is None:
        fill = FillSpec.polarized_angle() if params.is_xy else FillSpec.polarized()
    n = params.n_sites

    if fill.kind == FillKind.POLARIZED:
        if params.is_xy:
            if fill.species is not None:
                raise ConfigError("finite species given with q = CONTINUOUS; use an angle")
            theta = (fill.angle or 0.0) % kernels.TWO_PI
            return SpinLattice(params, np.full(n, theta, dtype=np.float64))
        if fill.angle is not None:
            raise ConfigError("angle fill needs q = CONTINUOUS")
        s0 = fill.species or 0
        if not 0 <= s0 < params.q:
            raise ConfigError(f"polarized species {s0} outside [0, {params.q})")
        return SpinLattice(params, np.full(n, s0, dtype=np.int64))

    if fill.kind == FillKind.RANDOM:
        words = RngStream(fill.master_seed, fill.index, lane=FILL_LANE).raw(n)
        if params.is_xy:
            return SpinLattice(params, unit_draws(words) * kernels.TWO_PI)
        return SpinLattice(params, scale_draws(words, int(params.q)))

    if params.is_xy:
        if fill.states is not None:
            raise ConfigError("finite states given with q = CONTINUOUS")
        if fill.angles is None or len(fill.angles) != n:
            raise ConfigError(f"explicit fill needs {n} angles")
        return SpinLattice(params, np.mod(np.asarray(fill.angles, dtype=np.float64), kernels.TWO_PI))

    if fill.states is None or len(fill.states) != n:
        raise ConfigError(f"explicit fill needs {n} states")
    states = np.asarray(fill.states, dtype=np.int64)
    if states.min() < 0 or states.max() >= params.q:
        raise ConfigError(f"explicit states must lie in [0, {params.q})")
    return SpinLattice(params, states)


# ----------------------------------------------------------------------
# Energies
# ----------------------------------------------------------------------

def total_energy(lattice: SpinLattice) -> float:
    """Energy recomputed from scratch over all 2L² bonds."""
    if lattice.params.is_xy:
        return _xy_energy(lattice.spins, lattice.L)
    hist = _bond_histogram(lattice.spins, lattice.L, lattice.q)
    return -float(np.dot(hist, lattice.cos_class))


def local_energy_delta(lattice: SpinLattice, i: int, proposed: int | float) -> float:
    """ΔE of setting site ``i`` to ``proposed``, touching only its four bonds."""
    neighbors = neighbor_indices(i, lattice.L)
    old = lattice.spins[i]
    if lattice.params.is_xy:
        new = float(proposed) % kernels.TWO_PI
        return float(sum(math.cos(old - lattice.spins[j]) - math.cos(new - lattice.spins[j]) for j in neighbors))
    new = int(proposed)
    if not 0 <= new < lattice.q:
        raise ConfigError(f"proposed state {new} outside [0, {lattice.q})")
    table = lattice.cos_class
    q = lattice.q
    return float(sum(
        table[kernels.bond_class(old, lattice.spins[j], q)] - table[kernels.bond_class(new, lattice.spins[j], q)]
        for j in neighbors
    ))
