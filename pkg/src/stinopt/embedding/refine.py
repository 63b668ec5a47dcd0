"""Snap a layout into the register and nudge it toward a unit-disk realisation
without ever breaking the hard spacing constraints."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

from ..graph import WeightedGraph
from .geometry import (HardwareGeometry, Layout, adjacency_vector, hard_violations,
                       pair_indices)

_EPS = 1e-9


class RefinementError(RuntimeError):
    def __init__(self, message: str, violations: list[str]):
        super().__init__(message)
        self.violations = violations


def snap(coords: np.ndarray, grid: float) -> np.ndarray:
    return np.round(coords / grid) * grid


def _legalize_rows(c: np.ndarray, geo: HardwareGeometry) -> np.ndarray:
    """Merge near-coincident rows and push the rest at least d_row apart.

    A point joins the current row only if it stays d_min/2 away in x from the
    points already there (a later uniform scale then restores d_min);
    otherwise it opens a new row above.
    """
    y = c[:, 1]
    order = np.lexsort((c[:, 0], y))
    out = y.copy()
    level_src = level_dst = None
    level_xs: list[float] = []
    for k in order:
        x = c[k, 0]
        if (level_src is not None and y[k] - level_src < geo.d_row / 2
                and all(abs(x - xo) >= geo.d_min / 2 for xo in level_xs)):
            out[k] = level_dst
            level_xs.append(x)
            continue
        new = y[k] if level_dst is None else max(y[k], level_dst + geo.d_row)
        new = math.ceil(new / geo.grid - 1e-9) * geo.grid
        level_src, level_dst, level_xs = y[k], new, [x]
        out[k] = new
    return out


def _pair_dist(c: np.ndarray):
    ii, jj = pair_indices(c.shape[0])
    diff = c[ii] - c[jj]
    return ii, jj, np.hypot(diff[:, 0], diff[:, 1]), np.abs(diff[:, 1])


def _push_apart(c: np.ndarray, geo: HardwareGeometry) -> np.ndarray:
    """Move each too-close pair apart symmetrically along its separation
    (coincident points split along x)."""
    target = geo.d_min * 1.001
    ii, jj, dist, _ = _pair_dist(c)
    for p in np.nonzero(dist < geo.d_min - _EPS)[0]:
        i, j = ii[p], jj[p]
        diff = c[i] - c[j]
        r = math.hypot(diff[0], diff[1])
        u = diff / r if r > 1e-9 else np.array([1.0, 0.0])
        if r <= 1e-9 and i > j:
            u = -u
        shift = (target - r) / 2.0 * u
        c[i] += shift
        c[j] -= shift
    return c


def _fit(c: np.ndarray, geo: HardwareGeometry) -> np.ndarray:
    c = c - c.min(0)
    return np.minimum(c, geo.extent)


def _legalize(c: np.ndarray, geo: HardwareGeometry) -> np.ndarray:
    for _ in range(60):
        c = _fit(c, geo)
        c[:, 1] = _legalize_rows(c, geo)
        c = _fit(c, geo)
        if not hard_violations(c, geo):
            return c
        # saturated outputs can pile up on the border; pushes then slide
        # them along it
        c = snap(_push_apart(c, geo), geo.grid)
    # local pushes oscillate; fall back to uniform growth
    for _ in range(100):
        c = c - c.min(0)
        c[:, 1] = _legalize_rows(c, geo)
        _, _, dist, _ = _pair_dist(c)
        if dist.min() >= geo.d_min - _EPS:
            return c
        factor = min(geo.d_min / max(dist.min(), geo.grid), 2.0)
        c = snap(c * factor * 1.001, geo.grid)
    return c


def safe_boxes(c: np.ndarray, geo: HardwareGeometry) -> np.ndarray:
    """Per-vertex (xlo, xhi, ylo, yhi) such that any simultaneous moves inside
    the boxes keep every pairwise constraint satisfied.

    Each vertex may travel at most half the slack to every other vertex; a
    vertex sharing a row keeps its y fixed.
    """
    n = c.shape[0]
    ii, jj, dist, dy = _pair_dist(c)
    rho = np.full(n, np.inf)
    row_slack = np.full(n, np.inf)
    same_row = np.zeros(n, dtype=bool)
    for i, j, d, ddy in zip(ii, jj, dist, dy):
        half = max((d - geo.d_min) / 2.0 - _EPS, 0.0)
        rho[i] = min(rho[i], half)
        rho[j] = min(rho[j], half)
        if ddy < _EPS:
            same_row[i] = same_row[j] = True
        else:
            rs = max((ddy - geo.d_row) / 2.0 - _EPS, 0.0)
            row_slack[i] = min(row_slack[i], rs)
            row_slack[j] = min(row_slack[j], rs)
    rho = np.minimum(rho, max(geo.width, geo.height))
    hx = np.where(same_row, rho, rho / math.sqrt(2.0))
    hy = np.where(same_row, 0.0, np.minimum(rho / math.sqrt(2.0), row_slack))
    boxes = np.empty((n, 4))
    g = geo.grid
    boxes[:, 0] = np.maximum(np.ceil((c[:, 0] - hx) / g - 1e-9) * g, 0.0)
    boxes[:, 1] = np.minimum(np.floor((c[:, 0] + hx) / g + 1e-9) * g, geo.width)
    boxes[:, 2] = np.maximum(np.ceil((c[:, 1] - hy) / g - 1e-9) * g, 0.0)
    boxes[:, 3] = np.minimum(np.floor((c[:, 1] + hy) / g + 1e-9) * g, geo.height)
    boxes[:, 0] = np.minimum(boxes[:, 0], c[:, 0])
    boxes[:, 1] = np.maximum(boxes[:, 1], c[:, 0])
    boxes[:, 2] = np.minimum(boxes[:, 2], c[:, 1])
    boxes[:, 3] = np.maximum(boxes[:, 3], c[:, 1])
    return boxes


def margin_loss(flat: np.ndarray, adj: np.ndarray, geo: HardwareGeometry, margin: float):
    """Squared hinge on adjacent pairs beyond d_adj - margin and non-adjacent
    pairs inside d_adj; returns (loss, gradient)."""
    c = flat.reshape(-1, 2)
    ii, jj = pair_indices(c.shape[0])
    diff = c[ii] - c[jj]
    dist = np.maximum(np.hypot(diff[:, 0], diff[:, 1]), 1e-12)
    viol = np.where(adj, dist - (geo.d_adj - margin), geo.d_adj - dist)
    viol = np.maximum(viol, 0.0)
    loss = float((viol ** 2).sum())
    g_dist = 2.0 * viol * np.where(adj, 1.0, -1.0)
    g_pair = (g_dist / dist)[:, None] * diff
    grad = np.zeros_like(c)
    np.add.at(grad, ii, g_pair)
    np.add.at(grad, jj, -g_pair)
    return loss, grad.ravel()


def refine_layout(layout: Layout, g: WeightedGraph, geo: HardwareGeometry | None = None,
                  margin: float = 0.5, rounds: int = 30) -> Layout:
    """Translate to the origin, snap to the grid, repair spacing, then improve
    the adjacency separation with box-constrained L-BFGS-B rounds."""
    geo = geo or HardwareGeometry()
    c = np.array(layout.coords, dtype=float)
    if c.shape[0] != g.n:
        raise ValueError("layout size does not match the graph")
    if not np.isfinite(c).all():
        raise RefinementError("layout has non-finite coordinates", ["non-finite coordinates"])
    if g.n == 0:
        return Layout(c)
    c = snap(c - c.min(0), geo.grid)
    c = _legalize(c, geo)
    viol = hard_violations(c, geo)
    if viol:
        raise RefinementError("layout cannot be legalised inside the register", viol)
    adj = adjacency_vector(g)
    loss, _ = margin_loss(c.ravel(), adj, geo, margin)
    for _ in range(rounds):
        if loss <= 0.0:
            break
        boxes = safe_boxes(c, geo)
        bounds = [(b[0], b[1]) if k == 0 else (b[2], b[3])
                  for b in boxes for k in (0, 1)]
        res = minimize(margin_loss, c.ravel(), args=(adj, geo, margin), jac=True,
                       method="L-BFGS-B", bounds=bounds)
        new = snap(res.x.reshape(-1, 2), geo.grid)
        new = np.clip(new, boxes[:, [0, 2]], boxes[:, [1, 3]])
        new_loss, _ = margin_loss(new.ravel(), adj, geo, margin)
        if hard_violations(new, geo) or new_loss >= loss - 1e-12:
            break
        c, loss = new, new_loss
    return Layout(c)
