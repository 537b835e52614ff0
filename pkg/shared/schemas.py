"""
Canonical data schemas for the clock-model memory-time toolchain.

These Pydantic models are shared by the simulator, the analysis layer
and the CLI so that the CSV columns and JSON documents are defined in
one place.  Units: J = k_B = 1; times in Monte Carlo steps (MCS).
"""

from __future__ import annotations

import math
from enum import Enum, IntEnum
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from shared import __version__

CONTINUOUS = "xy"

QValue = int | Literal["xy"]


def parse_q(value: Any) -> Any:
    """Accept ``6``, ``"6"``, ``"xy"``, ``"inf"`` or ``"continuous"``."""
    if isinstance(value, str):
        token = value.strip().lower()
        if token in ("xy", "inf", "infinity", "continuous"):
            return CONTINUOUS
        return int(token)
    if isinstance(value, float):
        if math.isinf(value):
            return CONTINUOUS
        if value.is_integer():
            return int(value)
    return value


# ---------------------------------------------------------------------------
# Enums
# ---------------------------------------------------------------------------

class XYBinning(str, Enum):
    FLOOR = "floor"          # bin 0 covers [0, 2π/q_bin)
    CENTERED = "centered"    # bin 0 covers [-π/q_bin, π/q_bin)


class FillKind(str, Enum):
    POLARIZED = "polarized"
    RANDOM = "random"
    EXPLICIT = "explicit"


class StopKind(str, Enum):
    PLURALITY_LOSS = "plurality_loss"
    AGGREGATE_LOSS = "aggregate_loss"


class OracleCadence(str, Enum):
    ATTEMPT = "attempt"
    SWEEP = "sweep"


class GrowthClass(str, Enum):
    POLYNOMIAL_CONSISTENT = "POLYNOMIAL-CONSISTENT"
    SUPER_POLYNOMIAL = "SUPER-POLYNOMIAL"
    UNDETERMINED = "UNDETERMINED"


class Command(str, Enum):
    MEMORY = "memory"
    PRECESS = "precess"
    CLUSTERS = "clusters"
    FIT = "fit"
    ORACLE = "oracle"
    TP = "tp"
    REPLAY = "replay"
    VERIFY = "verify"


class RunStatus(str, Enum):
    OK = "ok"
    CONFIG_ERROR = "config_error"
    RUNTIME_ERROR = "runtime_error"
    UNRELIABLE = "unreliable"


class ExitCode(IntEnum):
    OK = 0
    CONFIG = 2
    RUNTIME = 3
    UNRELIABLE = 4


# ---------------------------------------------------------------------------
# Model parameters
# ---------------------------------------------------------------------------

class ModelParams(BaseModel):
    """Lattice size, spin cardinality and temperature of one model."""

    model_config = ConfigDict(frozen=True)

    L: int = Field(ge=3)
    q: QValue
    T: float = Field(ge=0.0)
    q_bin: int = Field(default=6, ge=2)
    xy_binning: XYBinning = XYBinning.FLOOR

    @field_validator("q", mode="before")
    @classmethod
    def parse_q_value(cls, v: Any) -> Any:
        return parse_q(v)

    @field_validator("q")
    @classmethod
    def check_q(cls, v: QValue) -> QValue:
        if v != CONTINUOUS and v < 2:
            raise ValueError("q must be >= 2 when finite")
        return v

    @property
    def is_xy(self) -> bool:
        return self.q == CONTINUOUS

    @property
    def n_species(self) -> int:
        """Number of census bins: q for the clock model, q_bin for XY."""
        return self.q_bin if self.is_xy else int(self.q)

    @property
    def n_sites(self) -> int:
        return self.L * self.L

    @property
    def label(self) -> str:
        return CONTINUOUS if self.is_xy else str(self.q)


class FillSpec(BaseModel):
    """How to initialise a lattice."""

    model_config = ConfigDict(frozen=True)

    kind: FillKind = FillKind.POLARIZED
    species: int | None = None
    angle: float | None = None
    states: list[int] | None = None
    angles: list[float] | None = None
    master_seed: int = 0
    index: int = 0

    @classmethod
    def polarized(cls, species: int = 0) -> "FillSpec":
        return cls(kind=FillKind.POLARIZED, species=species)

    @classmethod
    def polarized_angle(cls, theta: float = 0.0) -> "FillSpec":
        return cls(kind=FillKind.POLARIZED, angle=theta)

    @classmethod
    def uniform_random(cls, master_seed: int, index: int = 0) -> "FillSpec":
        return cls(kind=FillKind.RANDOM, master_seed=master_seed, index=index)

    @classmethod
    def explicit(cls, states: list[int]) -> "FillSpec":
        return cls(kind=FillKind.EXPLICIT, states=list(states))

    @classmethod
    def explicit_angles(cls, angles: list[float]) -> "FillSpec":
        return cls(kind=FillKind.EXPLICIT, angles=list(angles))


# ---------------------------------------------------------------------------
# Memory-time protocol
# ---------------------------------------------------------------------------

class StopRule(BaseModel):
    """Loss-of-memory criterion, evaluated every ``check_interval`` MCS."""

    model_config = ConfigDict(frozen=True)

    kind: StopKind = StopKind.PLURALITY_LOSS
    check_interval: int = Field(default=1, ge=1)

    @property
    def code(self) -> int:
        """Integer code understood by the sweep kernels."""
        return 1 if self.kind == StopKind.PLURALITY_LOSS else 2


class MemoryTimeRecord(BaseModel):
    """One realization of the memory-time protocol."""

    params: ModelParams
    realization_index: int = Field(ge=0)
    tau: int | None = None
    censored: bool = False
    accepts: int = 0
    attempts: int = 0

    @model_validator(mode="after")
    def check_consistency(self) -> "MemoryTimeRecord":
        if self.censored and self.tau is not None:
            raise ValueError("censored records carry no tau")
        if not self.censored and self.tau is None:
            raise ValueError("uncensored records need tau")
        if not 0 <= self.accepts <= self.attempts:
            raise ValueError("need 0 <= accepts <= attempts")
        return self


class EnsembleSummary(BaseModel):
    """Statistics over uncensored records; any censoring marks it unreliable."""

    params: ModelParams
    stop: StopRule
    n_realizations: int
    n_censored: int
    mean_tau: float | None = None
    stderr_tau: float | None = None
    median_tau: float | None = None
    master_seed: int
    max_steps: int
    reliable: bool
    proposal: str = "uniform-other-states"
    site_selection: str = "uniform-random"
    code_version: str = __version__


# ---------------------------------------------------------------------------
# Observables
# ---------------------------------------------------------------------------

class ObservableSample(BaseModel):
    """Snapshot of the order parameter, energy and census at time ``t``."""

    t: int = Field(ge=0)
    m: float = Field(ge=0.0, le=1.0)
    theta: float = Field(ge=0.0, lt=2 * math.pi)
    theta_defined: bool = True
    energy: float
    energy_per_site: float
    counts: list[int]


class Trajectory(BaseModel):
    """Observable samples recorded every ``sampling_interval`` MCS."""

    params: ModelParams
    sampling_interval: int = Field(ge=1)
    master_seed: int
    realization_index: int = 0
    start: FillSpec = Field(default_factory=FillSpec.polarized)
    samples: list[ObservableSample] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_spacing(self) -> "Trajectory":
        for prev, nxt in zip(self.samples, self.samples[1:]):
            if nxt.t - prev.t != self.sampling_interval:
                raise ValueError("samples must be spaced by sampling_interval")
        return self


# ---------------------------------------------------------------------------
# Clusters
# ---------------------------------------------------------------------------

class ClusterReport(BaseModel):
    """Same-species cluster decomposition for one target species."""

    target: int
    cluster_sizes: list[int] = Field(default_factory=list)
    largest: int = 0
    wraps_x: bool = False
    wraps_y: bool = False
    n_clusters: int = 0
    n_wrapping: int = 0


class ClusterScanRow(BaseModel):
    """One equilibrium sample of a largest-island scan."""

    L: int
    T: float
    q: QValue
    sample_index: int
    largest_0: int
    largest_non0: int
    largest_excitation: int
    n_clusters_0: int
    wraps_x: bool
    wraps_y: bool

    @field_validator("q", mode="before")
    @classmethod
    def parse_q_value(cls, v: Any) -> Any:
        return parse_q(v)


class IslandStats(BaseModel):
    """Per-L summary of a largest-island scan."""

    L: int
    n_samples: int
    mean_largest_0: float
    q10_largest_0: float
    q50_largest_0: float
    q90_largest_0: float
    mean_largest_non0: float
    q10_largest_non0: float
    q50_largest_non0: float
    q90_largest_non0: float
    mean_largest_excitation: float
    wrap_fraction_0: float


class IslandScan(BaseModel):
    q: QValue
    T: float
    q_bin: int
    L_list: list[int]
    n_samples: int
    master_seed: int
    burn_in_factor: int
    spacing_factor: int
    rows: list[ClusterScanRow] = Field(default_factory=list)
    stats: list[IslandStats] = Field(default_factory=list)


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

class ScalingPoint(BaseModel):
    """Ensemble memory time at one lattice size."""

    L: int = Field(gt=0)
    mean_tau: float
    stderr_tau: float = Field(default=0.0, ge=0.0)
    n: int = 0


class FitResult(BaseModel):
    """Fit of ln τ = ln A + z ln L."""

    z: float
    z_err: float
    log_amplitude: float
    amplitude: float
    r_squared: float
    local_slopes: list[float]
    method: Literal["weighted", "unweighted"]
    weights: list[float]
    points: list[ScalingPoint]


# ---------------------------------------------------------------------------
# CLI configuration
# ---------------------------------------------------------------------------

class RunConfig(BaseModel):
    """Every knob of one CLI invocation, with explicit defaults."""

    command: Command
    q: QValue = 6
    q_bin: int = Field(default=6, ge=2)
    xy_binning: XYBinning = XYBinning.FLOOR
    L: int = Field(default=16, ge=2)
    L_list: list[int] = Field(default_factory=list)
    T: float | None = None
    n_realizations: int = Field(default=100, ge=1)
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    max_steps: int = Field(default=10**8, ge=1)
    stop: StopKind = StopKind.PLURALITY_LOSS
    check_interval: int = Field(default=1, ge=1)
    parallelism: int = Field(default=1, ge=1)
    out: Path | None = None
    summary: Path | None = None
    inputs: list[Path] = Field(default_factory=list)
    group: list[str] = Field(default_factory=lambda: ["q", "T"])
    statistic: Literal["mean", "median"] = "mean"
    margin: float = Field(default=0.3, gt=0.0)
    duration: int = Field(default=1000, ge=1)
    sampling_interval: int = Field(default=10, ge=1)
    start: FillKind = FillKind.POLARIZED
    n_samples: int = Field(default=10, ge=1)
    burn_in_factor: int = Field(default=20, ge=0)
    cadence: OracleCadence = OracleCadence.ATTEMPT
    seconds_per_mcs: float = Field(default=1e-12, gt=0.0)
    progress: bool = False
    doc: Path | None = None

    @field_validator("q", mode="before")
    @classmethod
    def parse_q_value(cls, v: Any) -> Any:
        return parse_q(v)

    @property
    def stop_rule(self) -> StopRule:
        return StopRule(kind=self.stop, check_interval=self.check_interval)

    def model_params(self, L: int | None = None) -> ModelParams:
        if self.T is None:
            raise ValueError("temperature --T is required")
        return ModelParams(
            L=self.L if L is None else L,
            q=self.q,
            T=self.T,
            q_bin=self.q_bin,
            xy_binning=self.xy_binning,
        )


class DispatchResult(BaseModel):
    """Outcome of one dispatched command."""

    command: Command
    status: RunStatus
    exit_code: ExitCode
    artifacts: list[Path] = Field(default_factory=list)
    outputs: dict[str, Any] = Field(default_factory=dict)
    display: str = ""
    error: str | None = None
