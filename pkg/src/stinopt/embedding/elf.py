"""Embedding loss over squared pairwise and row distances.

Coordinates are handled in flattened form ``O = [x_0..x_{N-1}, y_0..y_{N-1}]``.
Two fixed-weight linear maps turn ``O`` into distances: a difference matrix
with entries in {-1, 0, 1} producing all pairwise x then y differences ``u``,
and a 0/1 matrix summing squared differences into ``v`` (squared Euclidean
distances followed by squared row distances).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..graph import WeightedGraph
from .geometry import HardwareGeometry, Layout, adjacency_vector, pair_indices

RELAXED_ABOVE = 20
RELAXED_GAP_WEIGHT = 0.1


@lru_cache(maxsize=64)
def difference_matrix(n: int) -> np.ndarray:
    """(2P, 2N) matrix with u = W @ O; pair p=(i,j) maps to rows p and P + p."""
    ii, jj = pair_indices(n)
    p = len(ii)
    w = np.zeros((2 * p, 2 * n))
    rows = np.arange(p)
    w[rows, ii] = 1.0
    w[rows, jj] = -1.0
    w[p + rows, n + ii] = 1.0
    w[p + rows, n + jj] = -1.0
    w.setflags(write=False)
    return w


@lru_cache(maxsize=64)
def distance_matrix(n: int) -> np.ndarray:
    """(2P, 2P) 0/1 matrix with v = W @ u**2."""
    p = n * (n - 1) // 2
    w = np.zeros((2 * p, 2 * p))
    rows = np.arange(p)
    w[rows, rows] = 1.0
    w[rows, p + rows] = 1.0
    w[p + rows, p + rows] = 1.0
    w.setflags(write=False)
    return w


@dataclass
class ELF:
    """Loss bound to one graph and register geometry; reusable across epochs."""

    g: WeightedGraph
    geo: HardwareGeometry

    def __post_init__(self):
        n = self.g.n
        self.n = n
        self.n_pairs = n * (n - 1) // 2
        self.adj = adjacency_vector(self.g)
        geo = self.geo
        self.lo_target = np.where(self.adj, geo.d_min ** 2, geo.d_adj ** 2)
        diag = max(geo.width, geo.height) * np.sqrt(2.0)
        self.hi_target = np.where(self.adj, geo.d_adj ** 2, diag ** 2)
        self.wdiff = difference_matrix(n)
        self.wdist = distance_matrix(n)
        self.has_edges = bool(self.adj.any())
        self.has_non_edges = bool((~self.adj).any())

    def distances(self, flat: np.ndarray):
        u = self.wdiff @ flat
        v = self.wdist @ (u * u)
        return u, v[: self.n_pairs], v[self.n_pairs:]

    def __call__(self, flat: np.ndarray, grad: bool = False):
        """Return (total, components) and, with ``grad``, dTotal/dFlat."""
        p = self.n_pairs
        if p == 0:
            comps = {"L_min": 0.0, "L_max": 0.0, "L_row": 0.0, "L_ud": 0.0}
            return (0.0, comps, np.zeros_like(flat)) if grad else (0.0, comps)
        u, d2, r2 = self.distances(flat)
        drow = self.geo.d_row
        lo = self.lo_target - d2
        hi = d2 - self.hi_target
        row_poly = -(4.0 / drow ** 2) * r2 ** 2 + 4.0 * r2
        l_min = float(np.maximum(lo, 0.0).sum())
        l_max = float(np.maximum(hi, 0.0).sum())
        l_row = float(np.maximum(row_poly, 0.0).sum())
        l_ud = 0.0
        imax = imin = None
        if self.has_edges:
            e_idx = np.nonzero(self.adj)[0]
            imax = e_idx[np.argmax(d2[e_idx])]
            l_ud += float(d2[imax])
        if self.has_non_edges:
            ne_idx = np.nonzero(~self.adj)[0]
            imin = ne_idx[np.argmin(d2[ne_idx])]
            l_ud -= float(d2[imin])
        full = self.n <= RELAXED_ABOVE
        gap_w = 1.0 if full else RELAXED_GAP_WEIGHT
        total = l_min + l_row + (l_max if full else 0.0) + gap_w * l_ud
        comps = {"L_min": l_min, "L_max": l_max, "L_row": l_row, "L_ud": l_ud}
        if not grad:
            return total, comps
        g_d2 = -(lo > 0).astype(float)
        if full:
            g_d2 += (hi > 0)
        if imax is not None:
            g_d2[imax] += gap_w
        if imin is not None:
            g_d2[imin] -= gap_w
        g_r2 = np.where(row_poly > 0, -(8.0 / drow ** 2) * r2 + 4.0, 0.0)
        g_u = np.empty_like(u)
        g_u[:p] = 2.0 * u[:p] * g_d2
        g_u[p:] = 2.0 * u[p:] * (g_d2 + g_r2)
        return total, comps, self.wdiff.T @ g_u


def flatten(coords: np.ndarray) -> np.ndarray:
    return np.concatenate([coords[:, 0], coords[:, 1]])


def unflatten(flat: np.ndarray) -> np.ndarray:
    n = flat.shape[0] // 2
    return np.stack([flat[:n], flat[n:]], axis=1)


def elf_loss(layout: Layout, g: WeightedGraph, geo: HardwareGeometry | None = None):
    """(total, {L_min, L_max, L_row, L_ud}) for a layout."""
    return ELF(g, geo or HardwareGeometry())(flatten(layout.coords))
