"""Tests for simulator.clusters and the island scan."""

import math
from collections import deque

import numpy as np
import pytest

from shared.errors import ConfigError
from shared.schemas import FillSpec, ModelParams
from simulator.clusters import (
    exact_critical_temperature,
    excitation_report,
    label_clusters,
    label_mask_clusters,
    largest_other_species,
    peierls_percolation_temperature,
)
from simulator.experiments.islands import largest_island_scan
from simulator.lattice import build_lattice


def _lattice(states, L, q=6):
    return build_lattice(ModelParams(L=L, q=q, T=1.0), FillSpec.explicit(states))


# =========================================================================
# Hand-built configurations
# =========================================================================

class TestLabelClusters:

    def test_uniform_lattice_wraps_both_ways(self):
        report = label_clusters(_lattice([0] * 16, 4), 0)
        assert report.largest == 16
        assert report.n_clusters == 1
        assert report.wraps_x and report.wraps_y
        assert report.n_wrapping == 1

    def test_row_stripe_wraps_horizontally(self):
        states = [1] * 4 + [0] * 12
        lattice = _lattice(states, 4, q=2)
        stripe = label_clusters(lattice, 1)
        assert stripe.largest == 4
        assert stripe.wraps_x and not stripe.wraps_y
        rest = label_clusters(lattice, 0)
        assert rest.largest == 12
        assert rest.wraps_x and not rest.wraps_y

    def test_column_stripe_wraps_vertically(self):
        states = [1 if i % 4 == 2 else 0 for i in range(16)]
        stripe = label_clusters(_lattice(states, 4, q=2), 1)
        assert stripe.largest == 4
        assert stripe.wraps_y and not stripe.wraps_x

    def test_checkerboard_is_all_singletons(self):
        states = [(r + c) % 2 for r in range(4) for c in range(4)]
        report = label_clusters(_lattice(states, 4, q=2), 0)
        assert report.largest == 1
        assert report.n_clusters == 8
        assert report.cluster_sizes == [1] * 8
        assert report.n_wrapping == 0

    def test_diagonal_does_not_connect(self):
        states = [1 if r == c else 0 for r in range(5) for c in range(5)]
        report = label_clusters(_lattice(states, 5, q=2), 1)
        assert report.n_clusters == 5
        assert report.largest == 1

    def test_cluster_across_the_boundary(self):
        # sites 0 and 2 touch through the periodic edge of a 3x3 lattice
        states = [1, 0, 1, 0, 0, 0, 0, 0, 0]
        report = label_clusters(_lattice(states, 3, q=2), 1)
        assert report.cluster_sizes == [2]
        assert not report.wraps_x

    def test_absent_species(self):
        report = label_clusters(_lattice([0] * 9, 3), 4)
        assert report.largest == 0
        assert report.n_clusters == 0

    def test_target_out_of_range(self):
        with pytest.raises(ConfigError):
            label_clusters(_lattice([0] * 9, 3), 6)

    def test_excitations_pool_all_nonzero_species(self):
        states = [0] * 9
        states[4] = 1
        states[5] = 2
        lattice = _lattice(states, 3)
        assert excitation_report(lattice).largest == 2
        assert excitation_report(lattice).target == -1
        assert largest_other_species(lattice) == 1

    def test_xy_uses_binned_species(self):
        angles = [0.1] * 8 + [3.2]
        lattice = build_lattice(ModelParams(L=3, q="xy", T=1.0), FillSpec.explicit_angles(angles))
        assert label_clusters(lattice, 0).largest == 8
        assert label_clusters(lattice, 3).largest == 1


# =========================================================================
# Flood-fill comparison
# =========================================================================

def _flood_fill(mask, L):
    """Breadth-first search with unwrapped coordinates; independent reference."""
    seen = {}
    clusters = []
    for start in range(L * L):
        if not mask[start] or start in seen:
            continue
        seen[start] = (0, 0)
        queue = deque([start])
        size = 0
        wx = wy = False
        while queue:
            i = queue.popleft()
            size += 1
            r, c = divmod(i, L)
            x, y = seen[i]
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                j = ((r + dy) % L) * L + (c + dx) % L
                if not mask[j]:
                    continue
                pos = (x + dx, y + dy)
                if j not in seen:
                    seen[j] = pos
                    queue.append(j)
                elif seen[j] != pos:
                    wx = wx or seen[j][0] != pos[0]
                    wy = wy or seen[j][1] != pos[1]
        clusters.append((size, wx, wy))
    return clusters


def test_matches_flood_fill_on_random_masks():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        L = int(rng.integers(3, 9))
        mask = rng.random(L * L) < rng.uniform(0.2, 0.8)
        report = label_mask_clusters(mask, L)
        reference = _flood_fill(mask, L)
        assert report.n_clusters == len(reference)
        assert report.cluster_sizes == sorted((s for s, _, _ in reference), reverse=True)
        assert report.n_wrapping == sum(1 for _, wx, wy in reference if wx or wy)
        if reference:
            biggest = max(reference, key=lambda c: c[0])
            assert (report.wraps_x, report.wraps_y) == (biggest[1], biggest[2])


# =========================================================================
# Temperatures
# =========================================================================

def test_peierls_temperature():
    assert peierls_percolation_temperature(5) == pytest.approx(0.16)
    assert peierls_percolation_temperature(6) == pytest.approx(1 / 9)


def test_peierls_temperature_needs_finite_q():
    with pytest.raises(ConfigError):
        peierls_percolation_temperature("xy")


def test_exact_critical_temperatures():
    assert exact_critical_temperature(2) == pytest.approx(2.269185, rel=1e-6)
    assert exact_critical_temperature(4) == pytest.approx(1.134593, rel=1e-6)
    assert exact_critical_temperature(6) is None


# =========================================================================
# Island scan
# =========================================================================

def test_frozen_scan_keeps_one_spanning_island():
    params = ModelParams(L=4, q=6, T=0.0)
    scan = largest_island_scan(params, [4, 6], n_samples=3, master_seed=1, burn_in_factor=1)
    assert [s.L for s in scan.stats] == [4, 6]
    assert [s.mean_largest_0 for s in scan.stats] == [16.0, 36.0]
    assert all(r.largest_non0 == 0 and r.wraps_x and r.wraps_y for r in scan.rows)
    assert all(s.wrap_fraction_0 == 1.0 for s in scan.stats)
    assert len(scan.rows) == 6


def test_scan_is_independent_of_size_order():
    params = ModelParams(L=4, q=6, T=1.0)
    forward = largest_island_scan(params, [4, 5], n_samples=2, master_seed=3, burn_in_factor=1)
    backward = largest_island_scan(params, [5, 4], n_samples=2, master_seed=3, burn_in_factor=1)
    by_size = lambda scan: {(r.L, r.sample_index): r for r in scan.rows}  # noqa: E731
    assert by_size(forward) == by_size(backward)


def test_scan_rejects_empty_sizes():
    with pytest.raises(ConfigError):
        largest_island_scan(ModelParams(L=4, q=6, T=1.0), [], n_samples=1, master_seed=0)
