"""Published memory-time exponents used as acceptance targets."""

from __future__ import annotations

import math
from dataclasses import dataclass

from shared.schemas import CONTINUOUS, QValue, parse_q
from simulator.clusters import exact_critical_temperature


@dataclass(frozen=True)
class ReferenceExponent:
    q: QValue
    T: float | None  # None: at the exact critical temperature
    z: float
    z_err: float


REFERENCE_EXPONENTS: tuple[ReferenceExponent, ...] = (
    ReferenceExponent(2, None, 2.12, 0.01),
    ReferenceExponent(3, None, 2.11, 0.01),
    ReferenceExponent(5, 0.950, 1.92, 0.01),
    ReferenceExponent(5, 0.910, 1.92, 0.02),
    ReferenceExponent(6, 0.890, 2.11, 0.01),
    ReferenceExponent(6, 0.710, 2.00, 0.01),
    ReferenceExponent(8, 0.890, 2.13, 0.02),
    ReferenceExponent(8, 0.710, 2.07, 0.01),
    ReferenceExponent(8, 0.530, 2.04, 0.01),
    ReferenceExponent(8, 0.430, 1.98, 0.02),
    ReferenceExponent(12, 0.890, 2.61, 0.05),
    ReferenceExponent(12, 0.550, 2.30, 0.08),
    ReferenceExponent(12, 0.200, 1.99, 0.03),
    ReferenceExponent(CONTINUOUS, 0.800, 1.96, 0.01),
)


def reference_temperature(entry: ReferenceExponent) -> float:
    """Temperature of a table entry, resolving critical-point entries."""
    if entry.T is not None:
        return entry.T
    return exact_critical_temperature(entry.q)


def reference_exponent(q: QValue, T: float, tol: float = 1e-3) -> ReferenceExponent | None:
    """Table entry for (q, T), matching T within ``tol``."""
    q = parse_q(q)
    for entry in REFERENCE_EXPONENTS:
        if entry.q == q and math.isclose(reference_temperature(entry), T, abs_tol=tol):
            return entry
    return None
