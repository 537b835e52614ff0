"""Tests for shared.schemas – data model validation."""

import math

import pytest
from pydantic import ValidationError

from shared.schemas import (
    CONTINUOUS,
    Command,
    FillKind,
    FillSpec,
    MemoryTimeRecord,
    ModelParams,
    ObservableSample,
    RunConfig,
    StopKind,
    StopRule,
    Trajectory,
    XYBinning,
    parse_q,
)


# =========================================================================
# q parsing
# =========================================================================

@pytest.mark.parametrize("raw,expected", [
    (6, 6), ("6", 6), (" 12 ", 12), (8.0, 8),
    ("xy", CONTINUOUS), ("XY", CONTINUOUS), ("inf", CONTINUOUS),
    ("continuous", CONTINUOUS), (math.inf, CONTINUOUS),
])
def test_parse_q(raw, expected):
    assert parse_q(raw) == expected


def test_parse_q_rejects_garbage():
    with pytest.raises(ValueError):
        parse_q("six")


# =========================================================================
# ModelParams
# =========================================================================

class TestModelParams:

    def test_clock_defaults(self):
        params = ModelParams(L=8, q=6, T=0.89)
        assert params.n_sites == 64
        assert params.n_species == 6
        assert params.label == "6"
        assert params.is_xy is False

    def test_xy_uses_bins_as_species(self):
        params = ModelParams(L=8, q="xy", T=0.8, q_bin=8, xy_binning=XYBinning.CENTERED)
        assert params.is_xy
        assert params.n_species == 8
        assert params.label == "xy"

    def test_infinite_temperature_allowed(self):
        assert math.isinf(ModelParams(L=4, q=2, T=math.inf).T)

    @pytest.mark.parametrize("kwargs", [
        {"L": 2, "q": 6, "T": 1.0},
        {"L": 8, "q": 1, "T": 1.0},
        {"L": 8, "q": 6, "T": -0.1},
        {"L": 8, "q": "xy", "T": 1.0, "q_bin": 1},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            ModelParams(**kwargs)

    def test_hashable_and_frozen(self):
        a = ModelParams(L=8, q=6, T=1.0)
        assert {a: 1}[ModelParams(L=8, q="6", T=1.0)] == 1
        with pytest.raises(ValidationError):
            a.L = 9


# =========================================================================
# Fills and stop rules
# =========================================================================

def test_fill_constructors():
    assert FillSpec.polarized().kind == FillKind.POLARIZED
    assert FillSpec.polarized_angle(1.5).angle == 1.5
    assert FillSpec.uniform_random(4, 2).index == 2
    assert FillSpec.explicit([0, 1]).states == [0, 1]


def test_stop_rule_codes():
    assert StopRule().code == 1
    assert StopRule(kind=StopKind.AGGREGATE_LOSS).code == 2
    with pytest.raises(ValidationError):
        StopRule(check_interval=0)


# =========================================================================
# Records and trajectories
# =========================================================================

class TestMemoryTimeRecord:

    def test_censored_has_no_tau(self):
        with pytest.raises(ValidationError):
            MemoryTimeRecord(params=ModelParams(L=4, q=6, T=1.0), realization_index=0, tau=5, censored=True)

    def test_uncensored_needs_tau(self):
        with pytest.raises(ValidationError):
            MemoryTimeRecord(params=ModelParams(L=4, q=6, T=1.0), realization_index=0)

    def test_accepts_bounded_by_attempts(self):
        with pytest.raises(ValidationError):
            MemoryTimeRecord(params=ModelParams(L=4, q=6, T=1.0), realization_index=0, tau=1, accepts=17, attempts=16)


def _sample(t):
    return ObservableSample(t=t, m=1.0, theta=0.0, energy=-32.0, energy_per_site=-2.0, counts=[16, 0, 0, 0, 0, 0])


def test_trajectory_spacing_enforced():
    params = ModelParams(L=4, q=6, T=1.0)
    Trajectory(params=params, sampling_interval=5, master_seed=0, samples=[_sample(0), _sample(5)])
    with pytest.raises(ValidationError):
        Trajectory(params=params, sampling_interval=5, master_seed=0, samples=[_sample(0), _sample(7)])


def test_sample_angle_range():
    with pytest.raises(ValidationError):
        ObservableSample(t=0, m=0.5, theta=2 * math.pi, energy=0.0, energy_per_site=0.0, counts=[])


# =========================================================================
# RunConfig
# =========================================================================

class TestRunConfig:

    def test_defaults(self):
        config = RunConfig(command=Command.MEMORY)
        assert config.q == 6
        assert config.stop_rule == StopRule()
        assert config.group == ["q", "T"]

    def test_model_params_needs_temperature(self):
        with pytest.raises(ValueError):
            RunConfig(command=Command.MEMORY).model_params()

    def test_model_params_override_size(self):
        config = RunConfig(command=Command.CLUSTERS, q="xy", T=0.8, L=8, q_bin=4)
        params = config.model_params(16)
        assert params.L == 16 and params.is_xy and params.q_bin == 4

    def test_seed_range(self):
        with pytest.raises(ValidationError):
            RunConfig(command=Command.MEMORY, master_seed=2**64)
