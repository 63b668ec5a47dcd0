"""Fruchterman-Reingold initial placement, in micrometres."""

from __future__ import annotations

import numpy as np

from ..graph import WeightedGraph
from .geometry import HardwareGeometry, Layout


def fr_init(g: WeightedGraph, k: float = 7.0, max_iter: int = 1000, seed: int = 0,
            geo: HardwareGeometry | None = None) -> Layout:
    """Force-directed layout centred in the register.

    Repulsion k^2/r^2 acts on every pair and attraction r/k on edges, so an
    isolated edge settles at length k. Displacements are capped by a linearly
    cooled temperature. The result is shifted to the register centre and only
    shrunk if it would not fit.
    """
    if not k > 0:
        raise ValueError("k must be positive")
    geo = geo or HardwareGeometry()
    n = g.n
    center = geo.extent / 2.0
    if n == 0:
        return Layout(np.zeros((0, 2)))
    if n == 1:
        return Layout(center[None, :])
    rng = np.random.default_rng(seed)
    side = k * np.sqrt(n)
    pos = rng.uniform(0.0, side, size=(n, 2))
    adj = np.zeros((n, n))
    for i, j in g.edges:
        adj[i, j] = adj[j, i] = 1.0
    t0 = 0.1 * side
    temp = t0
    dt = t0 / (max_iter + 1)
    for _ in range(max_iter):
        delta = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((delta ** 2).sum(-1))
        np.fill_diagonal(dist, 1.0)
        dist = np.maximum(dist, 1e-3)
        mag = k * k / dist ** 2 - adj * dist / k
        np.fill_diagonal(mag, 0.0)
        disp = np.einsum("ijk,ij->ik", delta / dist[:, :, None], mag)
        length = np.maximum(np.sqrt((disp ** 2).sum(-1)), 1e-12)
        step = disp * (np.minimum(length, temp) / length)[:, None]
        pos += step
        temp -= dt
        if np.abs(step).sum() / n < 1e-6 * k:
            break
    pos -= (pos.min(0) + pos.max(0)) / 2.0
    span = pos.max(0) - pos.min(0)
    limit = 0.9 * geo.extent
    shrink = np.min(np.where(span > 0, limit / np.maximum(span, 1e-12), np.inf))
    if shrink < 1.0:
        pos *= shrink
    return Layout(pos + center)
