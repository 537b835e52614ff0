"""
Numba kernels for single-spin Metropolis updates.

Kernels take pre-drawn arrays shaped ``(n_sweeps, attempts_per_sweep)``
(site, proposal, acceptance uniform) and mutate the lattice arrays in
place: spins, the species census and, for the clock model, the
bond-class histogram.  After every completed sweep the optional stop
rule is evaluated on the census.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

STOP_NONE = 0
STOP_PLURALITY = 1
STOP_AGGREGATE = 2


@njit(cache=True)
def acceptance_probability(delta_e, T):
    """Metropolis rate min(1, exp(-ΔE/T)); at T = 0 only non-positive ΔE passes."""
    if delta_e <= 0.0:
        return 1.0
    if T <= 0.0:
        return 0.0
    return math.exp(-delta_e / T)


@njit(cache=True)
def bond_class(a, b, q):
    """Canonical angular distance min(d, q - d) with d = (a - b) mod q."""
    d = (a - b + q) % q
    if q - d < d:
        return q - d
    return d


@njit(cache=True)
def angle_bin(theta, q_bin, shift):
    b = int(math.floor(theta * q_bin / TWO_PI + shift))
    if b >= q_bin:
        if shift == 0.0:
            return q_bin - 1
        return b - q_bin
    return b


@njit(cache=True)
def angle_bins(angles, q_bin, shift):
    out = np.empty(angles.shape[0], dtype=np.int64)
    for i in range(angles.shape[0]):
        out[i] = angle_bin(angles[i], q_bin, shift)
    return out


@njit(cache=True)
def stop_fires(counts, kind):
    if kind == STOP_NONE:
        return False
    c0 = counts[0]
    if kind == STOP_PLURALITY:
        for s in range(1, counts.shape[0]):
            if counts[s] > c0:
                return True
        return False
    rest = 0
    for s in range(1, counts.shape[0]):
        rest += counts[s]
    return rest > c0


@njit(cache=True)
def clock_block(
    spins, L, q, cos_class, T, sites, offsets, uniforms,
    bond_hist, counts, stop_kind, check_interval, t0, codes,
):
    """Run finite-q sweeps; returns (sweeps_done, accepts, stop_fired).

    When ``codes`` is non-empty the base-q code of the configuration
    after each sweep is written into it.
    """
    n_sweeps, per = sites.shape
    n_sites = spins.shape[0]
    accepts = 0
    for k in range(n_sweeps):
        for a in range(per):
            i = sites[k, a]
            r = i // L
            c = i - r * L
            up = ((r + L - 1) % L) * L + c
            down = ((r + 1) % L) * L + c
            left = r * L + (c + L - 1) % L
            right = r * L + (c + 1) % L
            old = spins[i]
            new = (old + 1 + offsets[k, a]) % q
            de = 0.0
            for nb in (up, down, left, right):
                s = spins[nb]
                de += cos_class[bond_class(old, s, q)] - cos_class[bond_class(new, s, q)]
            if uniforms[k, a] < acceptance_probability(de, T):
                for nb in (up, down, left, right):
                    s = spins[nb]
                    bond_hist[bond_class(old, s, q)] -= 1
                    bond_hist[bond_class(new, s, q)] += 1
                counts[old] -= 1
                counts[new] += 1
                spins[i] = new
                accepts += 1
        if codes.shape[0] > 0:
            code = 0
            mult = 1
            for j in range(n_sites):
                code += spins[j] * mult
                mult *= q
            codes[k] = code
        t = t0 + k + 1
        if stop_kind != STOP_NONE and t % check_interval == 0 and stop_fires(counts, stop_kind):
            return k + 1, accepts, True
    return n_sweeps, accepts, False


@njit(cache=True)
def xy_block(
    angles, L, q_bin, shift, T, sites, proposals, uniforms,
    counts, stop_kind, check_interval, t0,
):
    """Run XY sweeps; returns (sweeps_done, accepts, energy_change, stop_fired)."""
    n_sweeps, per = sites.shape
    accepts = 0
    de_sum = 0.0
    for k in range(n_sweeps):
        for a in range(per):
            i = sites[k, a]
            r = i // L
            c = i - r * L
            up = ((r + L - 1) % L) * L + c
            down = ((r + 1) % L) * L + c
            left = r * L + (c + L - 1) % L
            right = r * L + (c + 1) % L
            old = angles[i]
            new = proposals[k, a] % TWO_PI
            de = 0.0
            for nb in (up, down, left, right):
                th = angles[nb]
                de += math.cos(old - th) - math.cos(new - th)
            if uniforms[k, a] < acceptance_probability(de, T):
                counts[angle_bin(old, q_bin, shift)] -= 1
                counts[angle_bin(new, q_bin, shift)] += 1
                angles[i] = new
                accepts += 1
                de_sum += de
        t = t0 + k + 1
        if stop_kind != STOP_NONE and t % check_interval == 0 and stop_fires(counts, stop_kind):
            return k + 1, accepts, de_sum, True
    return n_sweeps, accepts, de_sum, False
