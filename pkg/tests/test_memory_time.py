"""Tests for simulator.experiments.memory_time – protocol, ensembles, summaries."""

import math

import numpy as np
import pytest

from shared.errors import ConfigError
from shared.schemas import ModelParams, OracleCadence, StopKind, StopRule, XYBinning
from simulator.experiments.memory_time import memory_time_single, polarized_start, run_ensemble, summarize_records
from simulator.experiments.oracle import exact_hitting_time_oracle
from simulator.lattice import bin_center, build_lattice, species_of_angles

# q=2, L=3, T=4 plurality-loss memory time checked at sweep boundaries,
# from a dense long-double elimination over all 512 configurations.
GOLDEN_Q2_L3_T4_SWEEP = 7.1206195572967287


def test_frozen_system_is_censored():
    params = ModelParams(L=4, q=6, T=0.0)
    record = memory_time_single(params, 0, master_seed=1, max_steps=100)
    assert record.censored is True
    assert record.tau is None
    assert record.accepts == 0
    assert record.attempts == 100 * 16


def test_hot_system_loses_memory():
    params = ModelParams(L=3, q=2, T=math.inf)
    record = memory_time_single(params, 0, master_seed=1, max_steps=10_000)
    assert record.censored is False
    assert record.tau >= 1
    assert record.attempts == record.tau * 9


def test_max_steps_must_be_positive():
    with pytest.raises(ConfigError):
        memory_time_single(ModelParams(L=3, q=2, T=1.0), 0, master_seed=1, max_steps=0)


def test_records_are_reproducible():
    params = ModelParams(L=4, q=6, T=2.0)
    a = memory_time_single(params, 5, master_seed=99)
    b = memory_time_single(params, 5, master_seed=99)
    assert a == b


def test_execution_order_does_not_matter():
    params = ModelParams(L=4, q=6, T=2.0)
    forward = [memory_time_single(params, k, master_seed=3) for k in range(6)]
    backward = [memory_time_single(params, k, master_seed=3) for k in reversed(range(6))]
    assert forward == list(reversed(backward))


def test_aggregate_loss_never_later_than_plurality_loss():
    params = ModelParams(L=4, q=6, T=2.0)
    for k in range(10):
        plurality = memory_time_single(params, k, master_seed=4, stop=StopRule(kind=StopKind.PLURALITY_LOSS))
        aggregate = memory_time_single(params, k, master_seed=4, stop=StopRule(kind=StopKind.AGGREGATE_LOSS))
        assert not plurality.censored and not aggregate.censored
        assert aggregate.tau <= plurality.tau


class TestEnsemble:

    def test_summary_statistics(self):
        params = ModelParams(L=4, q=6, T=2.0)
        summary, records = run_ensemble(params, 20, master_seed=11)
        taus = [r.tau for r in records]
        assert [r.realization_index for r in records] == list(range(20))
        assert summary.reliable is True
        assert summary.n_censored == 0
        assert summary.mean_tau == pytest.approx(sum(taus) / 20)
        assert summary.stderr_tau > 0
        assert summary.proposal == "uniform-other-states"

    def test_censoring_poisons_summary(self):
        params = ModelParams(L=4, q=6, T=0.0)
        summary, _ = run_ensemble(params, 3, master_seed=1, max_steps=10)
        assert summary.reliable is False
        assert summary.n_censored == 3
        assert summary.mean_tau is None

    def test_single_record_has_zero_stderr(self):
        params = ModelParams(L=3, q=2, T=math.inf)
        record = memory_time_single(params, 0, master_seed=1)
        summary = summarize_records(params, StopRule(), [record], master_seed=1)
        assert summary.stderr_tau == 0.0
        assert summary.mean_tau == summary.median_tau == record.tau

    def test_invalid_sizes(self):
        params = ModelParams(L=3, q=2, T=1.0)
        with pytest.raises(ConfigError):
            run_ensemble(params, 0, master_seed=1)
        with pytest.raises(ConfigError):
            run_ensemble(params, 5, master_seed=1, parallelism=0)

    @pytest.mark.slow
    def test_parallelism_does_not_change_records(self):
        params = ModelParams(L=4, q=6, T=1.5)
        _, serial = run_ensemble(params, 40, master_seed=8, parallelism=1)
        _, parallel = run_ensemble(params, 40, master_seed=8, parallelism=4)
        assert serial == parallel


@pytest.mark.slow
def test_mean_memory_time_agrees_with_exact_oracle():
    params = ModelParams(L=3, q=2, T=4.0)
    stop = StopRule()
    summary, _ = run_ensemble(params, 10_000, master_seed=2024, stop=stop)
    expected = exact_hitting_time_oracle(params, stop, cadence=OracleCadence.SWEEP)
    assert expected == pytest.approx(GOLDEN_Q2_L3_T4_SWEEP, rel=1e-10)
    assert summary.reliable
    assert abs(summary.mean_tau - GOLDEN_Q2_L3_T4_SWEEP) < 3 * summary.stderr_tau


@pytest.mark.slow
def test_memory_time_decreases_with_temperature():
    means = []
    for T in (0.6, 0.9, 1.5):
        summary, _ = run_ensemble(ModelParams(L=6, q=6, T=T), 200, master_seed=5, max_steps=10**6)
        assert summary.reliable
        means.append(summary.mean_tau)
    assert means[0] > means[1] > means[2]


# =========================================================================
# XY model
# =========================================================================

class TestXYMemoryTime:

    @pytest.mark.parametrize("binning", list(XYBinning))
    def test_start_sits_inside_bin_zero(self, binning):
        params = ModelParams(L=4, q="xy", T=0.8, xy_binning=binning)
        lattice = build_lattice(params, polarized_start(params))
        assert lattice.counts.tolist() == [16, 0, 0, 0, 0, 0]
        assert lattice.spins[0] == pytest.approx(bin_center(6, binning))
        assert species_of_angles(np.mod(lattice.spins + 0.5, 2 * math.pi), 6, binning).tolist() == [0] * 16
        assert species_of_angles(np.mod(lattice.spins - 0.5, 2 * math.pi), 6, binning).tolist() == [0] * 16

    @pytest.mark.parametrize("binning", list(XYBinning))
    def test_memory_survives_thermal_jitter(self, binning):
        summary, _ = run_ensemble(ModelParams(L=16, q="xy", T=0.8, xy_binning=binning), 40, master_seed=1)
        assert summary.reliable
        assert summary.mean_tau > 100

    @pytest.mark.slow
    def test_memory_time_roughly_quadruples_when_size_doubles(self):
        means = []
        for L in (8, 16):
            summary, _ = run_ensemble(ModelParams(L=L, q="xy", T=0.8), 200, master_seed=1)
            assert summary.reliable
            means.append(summary.mean_tau)
        assert 2.4 < means[1] / means[0] < 6.0
