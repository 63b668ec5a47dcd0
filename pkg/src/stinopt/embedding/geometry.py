from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..graph import WeightedGraph

TOL = 1e-6


@dataclass(frozen=True)
class HardwareGeometry:
    """Register limits in micrometres (defaults match a typical commercial analog register)."""

    d_min: float = 4.0
    d_row: float = 2.0
    width: float = 76.0
    height: float = 128.0
    d_adj: float = 10.0
    grid: float = 0.1

    def __post_init__(self):
        if not (0 < self.d_row <= self.d_min <= self.d_adj <= min(self.width, self.height)):
            raise ValueError("need 0 < d_row <= d_min <= d_adj <= min(width, height)")
        if not self.grid > 0:
            raise ValueError("grid must be positive")

    @property
    def extent(self) -> np.ndarray:
        return np.array([self.width, self.height])


@dataclass(frozen=True)
class Layout:
    coords: np.ndarray  # shape (N, 2), micrometres

    def __post_init__(self):
        c = np.array(self.coords, dtype=np.float64).reshape(-1, 2)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def to_json(self, geo: HardwareGeometry | None = None) -> dict:
        d: dict = {"coords": [[float(x), float(y)] for x, y in self.coords]}
        if geo is not None:
            d["geometry"] = asdict(geo)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Layout":
        return cls(np.asarray(d["coords"], dtype=float).reshape(-1, 2))

    def save(self, path, geo: HardwareGeometry | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_json(geo), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> tuple["Layout", HardwareGeometry | None]:
        d = json.loads(Path(path).read_text())
        geo = HardwareGeometry(**d["geometry"]) if "geometry" in d else None
        return cls.from_json(d), geo


@dataclass(frozen=True)
class EmbeddingReport:
    d: float
    D: float
    is_unit_disk: bool
    gap: float
    constraint_violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        def fin(x):
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")
        return {"d": fin(self.d), "D": fin(self.D), "is_unit_disk": self.is_unit_disk,
                "gap": fin(self.gap), "constraint_violations": list(self.constraint_violations)}


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Pairs (i < j) in row-major upper-triangle order."""
    return np.triu_indices(n, k=1)


def adjacency_vector(g: WeightedGraph) -> np.ndarray:
    """Boolean edge flag per pair, in :func:`pair_indices` order."""
    ii, jj = pair_indices(g.n)
    return np.array([g.has_edge(int(i), int(j)) for i, j in zip(ii, jj)], dtype=bool)


def hard_violations(coords: np.ndarray, geo: HardwareGeometry, tol: float = TOL) -> list[str]:
    out: list[str] = []
    n = coords.shape[0]
    for k, (x, y) in enumerate(coords):
        if x < -tol or y < -tol or x > geo.width + tol or y > geo.height + tol:
            out.append(f"vertex {k} at ({x:.3f}, {y:.3f}) outside the {geo.width}x{geo.height} register")
    ii, jj = pair_indices(n)
    if len(ii):
        diff = coords[ii] - coords[jj]
        dist = np.hypot(diff[:, 0], diff[:, 1])
        dy = np.abs(diff[:, 1])
        for p in np.nonzero(dist < geo.d_min - tol)[0]:
            out.append(f"pair ({ii[p]},{jj[p]}) distance {dist[p]:.4f} < {geo.d_min}")
        for p in np.nonzero((dy > tol) & (dy < geo.d_row - tol))[0]:
            out.append(f"pair ({ii[p]},{jj[p]}) row separation {dy[p]:.4f} < {geo.d_row}")
    return out


def adjacency_extremes(coords: np.ndarray, g: WeightedGraph) -> tuple[float, float]:
    """(largest adjacent distance, smallest non-adjacent distance)."""
    ii, jj = pair_indices(g.n)
    if not len(ii):
        return 0.0, math.inf
    diff = coords[ii] - coords[jj]
    dist = np.hypot(diff[:, 0], diff[:, 1])
    adj = adjacency_vector(g)
    d = float(dist[adj].max()) if adj.any() else 0.0
    D = float(dist[~adj].min()) if (~adj).any() else math.inf
    return d, D


def validate_embedding(layout: Layout, g: WeightedGraph,
                       geo: HardwareGeometry | None = None) -> EmbeddingReport:
    geo = geo or HardwareGeometry()
    if layout.n != g.n:
        raise ValueError(f"layout has {layout.n} points for a graph with {g.n} vertices")
    d, D = adjacency_extremes(layout.coords, g)
    return EmbeddingReport(d=d, D=D, is_unit_disk=d < D, gap=D - d,
                           constraint_violations=hard_violations(layout.coords, geo))
