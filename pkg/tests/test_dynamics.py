"""Tests for simulator.dynamics and simulator.streams – Metropolis updates and draws."""

import math

import numpy as np
import pytest

from shared.errors import ConfigError
from shared.schemas import FillSpec, ModelParams, StopKind, StopRule
from simulator.dynamics import (
    acceptance_probability,
    metropolis_attempt,
    run_sweeps,
    sweep,
    trace_states,
)
from simulator.lattice import build_lattice, total_energy
from simulator.observables import species_census
from simulator.streams import FILL_LANE, RngStream, scale_draws, unit_draws


# =========================================================================
# Acceptance rule
# =========================================================================

class TestAcceptanceProbability:

    def test_downhill_always_accepted(self):
        assert acceptance_probability(-1.0, 0.5) == 1.0

    def test_zero_change_at_zero_temperature(self):
        assert acceptance_probability(0.0, 0.0) == 1.0

    def test_uphill_at_zero_temperature(self):
        assert acceptance_probability(1.0, 0.0) == 0.0

    def test_boltzmann_factor(self):
        assert acceptance_probability(2.0, 1.0) == pytest.approx(math.exp(-2.0))

    def test_infinite_temperature(self):
        assert acceptance_probability(1.0, math.inf) == 1.0


# =========================================================================
# Streams
# =========================================================================

class TestRngStream:

    def test_same_identity_same_words(self):
        a = RngStream(7, 3).raw(10)
        b = RngStream(7, 3).raw(10)
        assert np.array_equal(a, b)

    def test_lanes_do_not_overlap(self):
        a = RngStream(7, 3).raw(10)
        b = RngStream(7, 3, lane=FILL_LANE).raw(10)
        assert not np.array_equal(a, b)

    def test_chunked_reads_are_contiguous(self):
        whole = RngStream(1, 2).raw(12)
        rng = RngStream(1, 2)
        parts = np.concatenate([rng.raw(5), rng.raw(7)])
        assert np.array_equal(whole, parts)

    def test_seed_out_of_range(self):
        with pytest.raises(ConfigError):
            RngStream(2**64, 0)
        with pytest.raises(ConfigError):
            RngStream(0, -1)

    def test_draw_ranges(self):
        words = RngStream(5, 0).raw(10_000)
        sites = scale_draws(words, 9)
        assert sites.min() >= 0 and sites.max() < 9
        assert len(set(sites.tolist())) == 9
        u = unit_draws(words)
        assert u.min() >= 0.0 and u.max() < 1.0

    def test_scale_draws_known_value(self):
        words = np.array([0xFFFFFFFF_FFFFFFFF, 0x80000000_00000000, 0], dtype=np.uint64)
        assert scale_draws(words, 10).tolist() == [9, 5, 0]


# =========================================================================
# Sweeps
# =========================================================================

def _lattice(L=4, q=6, T=1.0, fill=None):
    return build_lattice(ModelParams(L=L, q=q, T=T), fill)


def test_zero_temperature_freezes_polarized_state():
    lattice = _lattice(T=0.0)
    clock, fired = run_sweeps(lattice, RngStream(1, 0), 50)
    assert clock.mcs == 50
    assert clock.attempts == 50 * 16
    assert clock.accepts == 0
    assert not fired
    assert lattice.counts.tolist() == [16, 0, 0, 0, 0, 0]


def test_infinite_temperature_accepts_everything():
    lattice = _lattice(T=math.inf)
    clock = sweep(lattice, RngStream(1, 0))
    assert clock.mcs == 1
    assert clock.accepts == clock.attempts == 16


def test_single_attempt_changes_at_most_one_site():
    lattice = _lattice(T=math.inf)
    before = lattice.spins.copy()
    assert metropolis_attempt(lattice, RngStream(3, 0)) is True
    assert int((lattice.spins != before).sum()) == 1


def test_block_size_does_not_change_trajectory():
    a = _lattice(L=5, fill=FillSpec.uniform_random(9))
    b = _lattice(L=5, fill=FillSpec.uniform_random(9))
    c = _lattice(L=5, fill=FillSpec.uniform_random(9))
    rng_a, rng_b, rng_c = RngStream(4, 1), RngStream(4, 1), RngStream(4, 1)

    run_sweeps(a, rng_a, 37)
    for _ in range(37):
        sweep(b, rng_b)
    for _ in range(37 * 25):
        metropolis_attempt(c, rng_c)

    assert np.array_equal(a.spins, b.spins)
    assert np.array_equal(a.spins, c.spins)


def test_energy_and_census_stay_consistent():
    lattice = _lattice(L=8, q=5, T=1.2)
    run_sweeps(lattice, RngStream(2, 0), 200)
    assert lattice.cached_energy == total_energy(lattice)
    assert np.array_equal(lattice.counts, species_census(lattice))
    lattice.audit()


def test_xy_energy_accumulator_tracks_recompute():
    lattice = _lattice(L=8, q="xy", T=0.8)
    run_sweeps(lattice, RngStream(2, 0), 200)
    assert lattice.cached_energy == pytest.approx(total_energy(lattice), abs=1e-9)
    assert np.array_equal(lattice.counts, species_census(lattice))


def test_stop_rule_fires_on_losing_state():
    lattice = _lattice(L=3, q=2, T=math.inf)
    clock, fired = run_sweeps(lattice, RngStream(0, 0), 10_000, stop=StopRule())
    assert fired
    assert clock.mcs >= 1
    assert lattice.counts[1] > lattice.counts[0]


def test_stop_rule_respects_check_interval():
    lattice = _lattice(L=3, q=2, T=math.inf)
    stop = StopRule(kind=StopKind.AGGREGATE_LOSS, check_interval=5)
    clock, fired = run_sweeps(lattice, RngStream(0, 0), 10_000, stop=stop)
    assert fired
    assert clock.mcs % 5 == 0


def test_negative_sweeps_rejected():
    with pytest.raises(ConfigError):
        run_sweeps(_lattice(), RngStream(0, 0), -1)


def test_trace_states_matches_lattice():
    lattice = _lattice(L=3, q=2, T=2.0)
    codes = trace_states(lattice, RngStream(8, 0), 25)
    assert codes.shape == (25,)
    final = int(np.dot(lattice.spins, 2 ** np.arange(9)))
    assert codes[-1] == final
    assert codes.min() >= 0 and codes.max() < 2**9


def test_trace_states_rejects_xy():
    with pytest.raises(ConfigError):
        trace_states(_lattice(q="xy"), RngStream(0, 0), 5)


def test_fixed_stream_is_deterministic():
    params = ModelParams(L=8, q=6, T=0.71)
    finals = []
    for _ in range(2):
        lattice = build_lattice(params)
        rng = RngStream(7, 0)
        for _ in range(1000):
            metropolis_attempt(lattice, rng)
        finals.append(lattice.spins.copy())
    assert np.array_equal(finals[0], finals[1])


def test_acceptance_rate_grows_with_temperature():
    rates = []
    for T in (0.5, 1.0, 2.0, 4.0):
        accepts = attempts = 0
        for k in range(4):
            lattice = _lattice(L=8, q=6, T=T, fill=FillSpec.uniform_random(11, k))
            clock, _ = run_sweeps(lattice, RngStream(11, k), 20)
            accepts += clock.accepts
            attempts += clock.attempts
        rates.append(accepts / attempts)
    assert all(a <= b for a, b in zip(rates, rates[1:]))
