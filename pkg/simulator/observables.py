"""Order parameter, census and energy observables."""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from shared.errors import ConfigError
from shared.schemas import ObservableSample, Trajectory
from simulator.kernels import TWO_PI
from simulator.lattice import SpinLattice

# Below this magnitude the magnetization angle is reported as undefined.
THETA_EPS = 1e-12


def _polar(z: complex) -> tuple[float, float, bool]:
    m = min(abs(z), 1.0)
    if m < THETA_EPS:
        return m, 0.0, False
    theta = math.atan2(z.imag, z.real) % TWO_PI
    if theta >= TWO_PI:
        theta = 0.0
    return m, theta, True


def species_census(lattice: SpinLattice) -> np.ndarray:
    """Sites per species (XY: per angular bin), recounted from the spins."""
    return np.bincount(lattice.species_map(), minlength=lattice.params.n_species)


def magnetization_from_counts(counts: Sequence[int], q: int) -> tuple[float, float]:
    """(m, θ) of a finite-q configuration given only its census."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.shape[0] != q:
        raise ConfigError(f"census has {counts.shape[0]} bins, expected {q}")
    total = counts.sum()
    if total <= 0:
        raise ConfigError("empty census")
    phases = np.exp(1j * TWO_PI * np.arange(q) / q)
    m, theta, _ = _polar(complex(np.dot(counts, phases) / total))
    return m, theta


def _magnetization(lattice: SpinLattice) -> tuple[float, float, bool]:
    if lattice.params.is_xy:
        return _polar(complex(np.exp(1j * lattice.spins).mean()))
    q = lattice.q
    phases = np.exp(1j * TWO_PI * np.arange(q) / q)
    return _polar(complex(np.dot(lattice.counts, phases) / lattice.params.n_sites))


def magnetization(lattice: SpinLattice) -> tuple[float, float]:
    """Magnitude m in [0, 1] and angle θ in [0, 2π); θ = 0 when m vanishes."""
    m, theta, _ = _magnetization(lattice)
    return m, theta


def effective_sector(theta: float, q: int) -> float:
    """Continuous sector coordinate qθ/2π in [0, q)."""
    value = (q * theta / TWO_PI) % q
    return 0.0 if value >= q else value


def sample_observables(lattice: SpinLattice, t: int) -> ObservableSample:
    m, theta, defined = _magnetization(lattice)
    energy = lattice.cached_energy
    return ObservableSample(
        t=t,
        m=m,
        theta=theta,
        theta_defined=defined,
        energy=energy,
        energy_per_site=energy / lattice.params.n_sites,
        counts=[int(c) for c in lattice.counts],
    )


def max_energy_excursion(trajectory: Trajectory) -> float:
    """Largest rise of the energy above its starting value."""
    if not trajectory.samples:
        raise ConfigError("empty trajectory")
    e0 = trajectory.samples[0].energy
    return max(s.energy for s in trajectory.samples) - e0


def visited_sectors(trajectory: Trajectory) -> list[int]:
    """Distinct integer sectors entered by the magnetization angle, in order of first visit."""
    q = trajectory.params.n_species
    seen: list[int] = []
    for sample in trajectory.samples:
        if not sample.theta_defined:
            continue
        sector = int(round(effective_sector(sample.theta, q))) % q
        if sector not in seen:
            seen.append(sector)
    return seen
