"""Tests for simulator.observables – magnetization, census, energy excursions."""

import math

import pytest

from shared.errors import ConfigError
from shared.schemas import FillSpec, ModelParams, ObservableSample, Trajectory
from simulator.lattice import build_lattice
from simulator.observables import (
    effective_sector,
    magnetization,
    magnetization_from_counts,
    max_energy_excursion,
    sample_observables,
    species_census,
    visited_sectors,
)


def _sample(t, energy, theta=0.0, defined=True):
    return ObservableSample(
        t=t, m=1.0, theta=theta, theta_defined=defined,
        energy=energy, energy_per_site=energy / 9, counts=[9, 0, 0, 0, 0, 0],
    )


def test_polarized_magnetization():
    lattice = build_lattice(ModelParams(L=4, q=6, T=1.0))
    assert magnetization(lattice) == (pytest.approx(1.0), 0.0)


def test_polarized_other_species_angle():
    lattice = build_lattice(ModelParams(L=4, q=6, T=1.0), FillSpec.polarized(2))
    m, theta = magnetization(lattice)
    assert m == pytest.approx(1.0)
    assert theta == pytest.approx(2 * math.pi / 3)


def test_half_and_half_neighbors():
    states = [0] * 8 + [1] * 8
    lattice = build_lattice(ModelParams(L=4, q=6, T=1.0), FillSpec.explicit(states))
    m, theta = magnetization(lattice)
    assert m == pytest.approx(math.sqrt(3) / 2)
    assert theta == pytest.approx(math.pi / 6)


def test_balanced_census_has_no_direction():
    states = [0, 1, 2, 3] * 4
    lattice = build_lattice(ModelParams(L=4, q=4, T=1.0), FillSpec.explicit(states))
    m, theta = magnetization(lattice)
    assert m == pytest.approx(0.0, abs=1e-12)
    assert theta == 0.0
    assert sample_observables(lattice, 0).theta_defined is False


def test_magnetization_from_counts_matches_lattice():
    assert magnetization_from_counts([8, 8, 0, 0, 0, 0], 6)[0] == pytest.approx(math.sqrt(3) / 2)


def test_magnetization_from_counts_rejects_wrong_length():
    with pytest.raises(ConfigError):
        magnetization_from_counts([1, 2, 3], 6)


def test_xy_magnetization():
    lattice = build_lattice(ModelParams(L=4, q="xy", T=1.0), FillSpec.polarized_angle(1.0))
    m, theta = magnetization(lattice)
    assert m == pytest.approx(1.0)
    assert theta == pytest.approx(1.0)


def test_species_census():
    states = [0, 0, 1, 5, 5, 5, 2, 0, 0]
    lattice = build_lattice(ModelParams(L=3, q=6, T=1.0), FillSpec.explicit(states))
    assert species_census(lattice).tolist() == [4, 1, 1, 0, 0, 3]


def test_effective_sector():
    assert effective_sector(2 * math.pi / 6, 6) == pytest.approx(1.0)
    assert effective_sector(0.0, 6) == 0.0
    assert 0.0 <= effective_sector(2 * math.pi - 1e-15, 6) < 6


def test_sample_observables_fields():
    lattice = build_lattice(ModelParams(L=3, q=6, T=1.0))
    sample = sample_observables(lattice, 12)
    assert sample.t == 12
    assert sample.energy == -18.0
    assert sample.energy_per_site == -2.0
    assert sample.counts == [9, 0, 0, 0, 0, 0]
    assert sample.theta_defined is True


def test_max_energy_excursion():
    trajectory = Trajectory(
        params=ModelParams(L=3, q=6, T=1.0),
        sampling_interval=1,
        master_seed=0,
        samples=[_sample(0, -18.0), _sample(1, -10.0), _sample(2, -14.0)],
    )
    assert max_energy_excursion(trajectory) == 8.0


def test_max_energy_excursion_empty():
    trajectory = Trajectory(params=ModelParams(L=3, q=6, T=1.0), sampling_interval=1, master_seed=0)
    with pytest.raises(ConfigError):
        max_energy_excursion(trajectory)


def test_visited_sectors_skips_undefined_angles():
    width = 2 * math.pi / 6
    trajectory = Trajectory(
        params=ModelParams(L=3, q=6, T=1.0),
        sampling_interval=1,
        master_seed=0,
        samples=[
            _sample(0, -18.0, 0.0),
            _sample(1, -18.0, 1.1 * width),
            _sample(2, -18.0, 3.0 * width, defined=False),
            _sample(3, -18.0, 5.8 * width),
        ],
    )
    assert visited_sectors(trajectory) == [0, 1]


def test_rotation_shifts_angle_and_keeps_magnitude():
    params = ModelParams(L=6, q=6, T=1.0)
    lattice = build_lattice(params, FillSpec.explicit([0] * 20 + [1] * 10 + [5] * 6))
    rotated = build_lattice(params, FillSpec.explicit(((lattice.spins + 2) % 6).tolist()))
    m, theta = magnetization(lattice)
    m_rot, theta_rot = magnetization(rotated)
    assert m_rot == pytest.approx(m)
    assert theta_rot == pytest.approx((theta + 2 * math.pi / 3) % (2 * math.pi))
