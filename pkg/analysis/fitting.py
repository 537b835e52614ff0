"""
Power-law fits of memory time against lattice size.

``fit_power_law`` fits ln τ = ln A + z ln L by weighted least squares.
Each point is weighted by 1/σ² with σ = stderr/mean, the standard error
of ln τ, and the reported ``z_err`` uses those σ as absolute
uncertainties.  If any point has zero stderr the fit falls back to
ordinary least squares and scales the covariance by the residual
variance.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from collections.abc import Sequence

import numpy as np

from shared.errors import ConfigError
from shared.schemas import FitResult, GrowthClass, MemoryTimeRecord, ScalingPoint

logger = logging.getLogger(__name__)

DEFAULT_MARGIN = 0.3
MIN_FIT_POINTS = 3
MIN_CLASSIFIER_POINTS = 4


def fit_power_law(points: Sequence[ScalingPoint]) -> FitResult:
    """Fit τ = A·L^z through at least three distinct sizes."""
    points = sorted(points, key=lambda p: p.L)
    if len(points) < MIN_FIT_POINTS:
        raise ConfigError(f"need at least {MIN_FIT_POINTS} sizes, got {len(points)}")
    if len({p.L for p in points}) != len(points):
        raise ConfigError("duplicate lattice sizes")
    if any(p.mean_tau <= 0 for p in points):
        raise ConfigError("memory times must be positive")

    x = np.log([p.L for p in points])
    y = np.log([p.mean_tau for p in points])
    stderr = np.array([p.stderr_tau for p in points], dtype=np.float64)
    mean = np.array([p.mean_tau for p in points], dtype=np.float64)

    if np.any(stderr <= 0):
        method = "unweighted"
        w = np.ones_like(x)
    else:
        method = "weighted"
        w = 1.0 / (stderr / mean) ** 2

    X = np.column_stack([np.ones_like(x), x])
    sw = np.sqrt(w)
    beta, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    resid = y - X @ beta
    cov = np.linalg.inv(X.T @ (X * w[:, None]))
    if method == "unweighted":
        dof = len(points) - 2
        cov = cov * (float(resid @ resid) / dof)

    y_bar = float(np.sum(w * y) / np.sum(w))
    ss_tot = float(np.sum(w * (y - y_bar) ** 2))
    ss_res = float(np.sum(w * resid**2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0

    log_amplitude, z = float(beta[0]), float(beta[1])
    result = FitResult(
        z=z,
        z_err=math.sqrt(max(float(cov[1, 1]), 0.0)),
        log_amplitude=log_amplitude,
        amplitude=math.exp(log_amplitude),
        r_squared=r_squared,
        local_slopes=(np.diff(y) / np.diff(x)).tolist(),
        method=method,
        weights=w.tolist(),
        points=list(points),
    )
    logger.info("Power-law fit over %d sizes: z = %.4f +/- %.4f (%s)", len(points), z, result.z_err, method)
    return result


def growth_classifier(points: Sequence[ScalingPoint], margin: float = DEFAULT_MARGIN) -> GrowthClass:
    """Label the growth of τ(L) from the trend of its local log-log slopes."""
    if len(points) < MIN_CLASSIFIER_POINTS:
        raise ConfigError(f"need at least {MIN_CLASSIFIER_POINTS} sizes, got {len(points)}")
    if margin <= 0:
        raise ConfigError("margin must be positive")
    slopes = np.asarray(fit_power_law(points).local_slopes)
    steps = np.diff(slopes)
    if np.all(steps > 0) and slopes[-1] - slopes[0] > margin:
        return GrowthClass.SUPER_POLYNOMIAL
    if slopes.max() - slopes.min() <= margin:
        return GrowthClass.POLYNOMIAL_CONSISTENT
    return GrowthClass.UNDETERMINED


# ----------------------------------------------------------------------
# From records to points
# ----------------------------------------------------------------------

def _by_size(records: Sequence[MemoryTimeRecord]) -> dict[int, np.ndarray]:
    taus: dict[int, list[int]] = defaultdict(list)
    censored: dict[int, int] = defaultdict(int)
    for record in records:
        if record.censored:
            censored[record.params.L] += 1
        else:
            taus[record.params.L].append(record.tau)
    for L, n in censored.items():
        logger.warning("L=%d: ignoring %d censored records", L, n)
    return {L: np.asarray(v, dtype=np.float64) for L, v in sorted(taus.items())}


def _stderr_of_mean(taus: np.ndarray) -> float:
    return float(taus.std(ddof=1) / math.sqrt(taus.size)) if taus.size > 1 else 0.0


def _bootstrap_median_stderr(taus: np.ndarray, n_boot: int, rng: np.random.Generator) -> float:
    if taus.size < 2:
        return 0.0
    resampled = rng.choice(taus, size=(n_boot, taus.size), replace=True)
    return float(np.median(resampled, axis=1).std(ddof=1))


def scaling_points(
    records: Sequence[MemoryTimeRecord],
    statistic: str = "mean",
    n_boot: int = 200,
    seed: int = 0,
) -> list[ScalingPoint]:
    """One point per lattice size from the uncensored records."""
    if statistic not in ("mean", "median"):
        raise ConfigError(f"unknown statistic {statistic!r}")
    rng = np.random.default_rng(seed)
    points = []
    for L, taus in _by_size(records).items():
        if statistic == "mean":
            points.append(ScalingPoint(L=L, mean_tau=float(taus.mean()), stderr_tau=_stderr_of_mean(taus), n=taus.size))
        else:
            points.append(ScalingPoint(
                L=L,
                mean_tau=float(np.median(taus)),
                stderr_tau=_bootstrap_median_stderr(taus, n_boot, rng),
                n=taus.size,
            ))
    return points


def bootstrap_exponent(
    records: Sequence[MemoryTimeRecord],
    n_boot: int = 200,
    seed: int = 0,
) -> tuple[float, float]:
    """Mean and spread of z when records are resampled within each size."""
    grouped = _by_size(records)
    if len(grouped) < MIN_FIT_POINTS:
        raise ConfigError(f"need at least {MIN_FIT_POINTS} sizes, got {len(grouped)}")
    rng = np.random.default_rng(seed)
    estimates = np.empty(n_boot)
    for b in range(n_boot):
        points = []
        for L, taus in grouped.items():
            sample = rng.choice(taus, size=taus.size, replace=True)
            points.append(ScalingPoint(L=L, mean_tau=float(sample.mean()), stderr_tau=_stderr_of_mean(sample), n=sample.size))
        estimates[b] = fit_power_law(points).z
    return float(estimates.mean()), float(estimates.std(ddof=1))


def arrhenius_barrier(temperatures: Sequence[float], taus: Sequence[float]) -> tuple[float, float]:
    """Slope and intercept of ln τ against 1/T: an effective barrier and log prefactor."""
    T = np.asarray(temperatures, dtype=np.float64)
    tau = np.asarray(taus, dtype=np.float64)
    if T.size < 2 or T.size != tau.size:
        raise ConfigError("need at least two matched (T, tau) pairs")
    if np.any(T <= 0) or np.any(tau <= 0):
        raise ConfigError("temperatures and memory times must be positive")
    barrier, log_prefactor = np.polyfit(1.0 / T, np.log(tau), 1)
    return float(barrier), float(log_prefactor)
