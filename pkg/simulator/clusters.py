"""
Same-species cluster labeling on the periodic lattice.

Clusters are found with a union-find that also tracks each site's
displacement from its root.  Joining two sites already in the same
cluster closes a loop; if the displacements disagree the loop goes
round the torus and the cluster wraps in that direction
(x = along a row, y = along a column).
"""

from __future__ import annotations

import math

import numpy as np

from shared.errors import ConfigError
from shared.schemas import ClusterReport, QValue, CONTINUOUS
from simulator.lattice import SpinLattice


class DisplacementUnionFind:
    """Union by size with path compression and per-node offsets to the parent."""

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.size = [1] * n
        self.dx = [0] * n
        self.dy = [0] * n
        self.wraps_x = [False] * n
        self.wraps_y = [False] * n

    def find(self, i: int) -> tuple[int, int, int]:
        """Root of ``i`` and the displacement of ``i`` relative to it."""
        path = []
        while self.parent[i] != i:
            path.append(i)
            i = self.parent[i]
        root = i
        ox = oy = 0
        for node in reversed(path):
            ox += self.dx[node]
            oy += self.dy[node]
            self.dx[node] = ox
            self.dy[node] = oy
            self.parent[node] = root
        return root, ox, oy

    def union(self, i: int, j: int, step_x: int, step_y: int) -> None:
        """Join ``j``, which sits at ``pos(i) + step``, to the cluster of ``i``."""
        ri, ix, iy = self.find(i)
        rj, jx, jy = self.find(j)
        # position of rj relative to ri
        rx = ix + step_x - jx
        ry = iy + step_y - jy
        if ri == rj:
            if rx != 0:
                self.wraps_x[ri] = True
            if ry != 0:
                self.wraps_y[ri] = True
            return
        if self.size[ri] < self.size[rj]:
            ri, rj, rx, ry = rj, ri, -rx, -ry
        self.parent[rj] = ri
        self.dx[rj] = rx
        self.dy[rj] = ry
        self.size[ri] += self.size[rj]
        self.wraps_x[ri] = self.wraps_x[ri] or self.wraps_x[rj]
        self.wraps_y[ri] = self.wraps_y[ri] or self.wraps_y[rj]


def label_mask_clusters(mask: np.ndarray, L: int, target: int = -1) -> ClusterReport:
    """Decompose the sites where ``mask`` is true into connected clusters."""
    mask = np.asarray(mask, dtype=bool).ravel()
    if mask.shape[0] != L * L:
        raise ConfigError(f"mask has {mask.shape[0]} sites, expected {L * L}")

    uf = DisplacementUnionFind(L * L)
    members = np.flatnonzero(mask).tolist()
    for i in members:
        r, c = divmod(i, L)
        right = r * L + (c + 1) % L
        down = ((r + 1) % L) * L + c
        if mask[right]:
            uf.union(i, right, 1, 0)
        if mask[down]:
            uf.union(i, down, 0, 1)

    # roots in order of their lowest member site
    roots: list[int] = []
    seen: set[int] = set()
    for i in members:
        root, _, _ = uf.find(i)
        if root not in seen:
            seen.add(root)
            roots.append(root)

    if not roots:
        return ClusterReport(target=target)

    sizes = [uf.size[r] for r in roots]
    best = roots[int(np.argmax(sizes))]
    return ClusterReport(
        target=target,
        cluster_sizes=sorted(sizes, reverse=True),
        largest=uf.size[best],
        wraps_x=uf.wraps_x[best],
        wraps_y=uf.wraps_y[best],
        n_clusters=len(roots),
        n_wrapping=sum(1 for r in roots if uf.wraps_x[r] or uf.wraps_y[r]),
    )


def label_clusters(lattice: SpinLattice, target: int) -> ClusterReport:
    """Clusters of sites in species ``target`` (XY: in angular bin ``target``)."""
    if not 0 <= target < lattice.params.n_species:
        raise ConfigError(f"target species {target} outside [0, {lattice.params.n_species})")
    return label_mask_clusters(lattice.species_map() == target, lattice.L, target)


def excitation_report(lattice: SpinLattice) -> ClusterReport:
    """Clusters of all sites not in species 0, treated as one excitation pool (target = -1)."""
    return label_mask_clusters(lattice.species_map() != 0, lattice.L, -1)


def largest_other_species(lattice: SpinLattice) -> int:
    """Largest same-species cluster among species 1..q-1."""
    species = lattice.species_map()
    return max(
        (label_mask_clusters(species == s, lattice.L, s).largest for s in range(1, lattice.params.n_species)),
        default=0,
    )


def peierls_percolation_temperature(q: QValue) -> float:
    """Boundary-cost estimate 4/q² of where non-0 islands start to percolate."""
    if q == CONTINUOUS or isinstance(q, str):
        raise ConfigError("percolation estimate needs finite q")
    if q < 2:
        raise ConfigError(f"q must be >= 2, got {q}")
    return 4.0 / (q * q)


def exact_critical_temperature(q: QValue) -> float | None:
    """Known exact transition temperature: Ising for q=2, 3-state Potts for q=3, two Ising copies for q=4."""
    if q == 2:
        return 2.0 / math.log(1.0 + math.sqrt(2.0))
    if q == 3:
        return 1.5 / math.log(1.0 + math.sqrt(3.0))
    if q == 4:
        return 1.0 / math.log(1.0 + math.sqrt(2.0))
    return None
