"""Assemble SSP, GSP and SAP instances from coverage tracks and site lists."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import networkx as nx
import numpy as np

from ..graph import (BipartiteInstance, ColoringInstance, InstanceError, VertexSet,
                     WeightedGraph)
from .coverage import CoverageTrack, Region, Site, elevation_deg

DEFAULT_OVERLAP = 0.90
DEFAULT_ELEVATION = 10.0


def overlap_fraction(a: np.ndarray, b: np.ndarray) -> float:
    """|A and B| / min(|A|, |B|) over sample-point masks; 0 if either is empty."""
    na, nb = int(a.sum()), int(b.sum())
    if na == 0 or nb == 0:
        return 0.0
    return int((a & b).sum()) / min(na, nb)


def build_ssp_instance(tracks: list[CoverageTrack], region: Region,
                       overlap_threshold: float = DEFAULT_OVERLAP) -> WeightedGraph:
    """Satellites with positive mean coverage become vertices weighted by it;
    an edge joins two whose footprints overlap by more than the threshold at
    some common sample time."""
    if not 0.0 <= overlap_threshold <= 1.0:
        raise ValueError("overlap threshold must lie in [0, 1]")
    if tracks:
        grid = tracks[0].times
        for t in tracks[1:]:
            if t.times != grid:
                raise InstanceError(f"track {t.satellite!r} uses a different time grid")
    kept = [t for t in tracks if t.mean_fraction > 0.0]
    pts = region.uncovered_points
    masks = [[s.footprint.mask(pts) if s.fraction > 0 else None for s in t.samples]
             for t in kept]
    edges = []
    for i in range(len(kept)):
        for j in range(i + 1, len(kept)):
            for a, b in zip(masks[i], masks[j]):
                if a is not None and b is not None and overlap_fraction(a, b) > overlap_threshold:
                    edges.append((i, j))
                    break
    weights = [min(max(t.mean_fraction, 0.0), 1.0) for t in kept]
    return WeightedGraph(len(kept), weights, edges, [t.satellite for t in kept])


def elevation_visibility(tracks: list[CoverageTrack],
                         min_elevation_deg: float = DEFAULT_ELEVATION
                         ) -> Callable[[int, Site], bool]:
    """Predicate: satellite ``k`` (index into ``tracks``) is above the mask at
    the site at some sampled time."""
    def visible(k: int, site: Site) -> bool:
        for s in tracks[k].samples:
            fp = s.footprint
            if elevation_deg(fp.lat, fp.lon, s.alt_km, site.lat, site.lon) >= min_elevation_deg:
                return True
        return False
    return visible


def _bipartite(n_sats: int, n_gws: int, links, sat_labels, gw_labels) -> BipartiteInstance:
    inst = BipartiteInstance(n_sats, n_gws, frozenset(links), None, sat_labels, gw_labels)
    lonely = inst.isolated_satellites()
    if not lonely:
        return inst
    msgs = tuple(f"satellite {sat_labels[k]} has no feasible gateway link" for k in lonely)
    return BipartiteInstance(n_sats, n_gws, inst.links, None, sat_labels, gw_labels, msgs)


def build_gsp_instance(selected: VertexSet, gateways: list[Site],
                       visibility: Callable[[int, Site], bool],
                       labels: list[str] | None = None) -> BipartiteInstance:
    """Links between the selected satellites (renumbered in sorted order) and
    the gateways that can see them. Satellites without any link are reported
    in ``warnings`` since no assignment can serve them."""
    sats = selected.sorted()
    links = [(k, j) for k, s in enumerate(sats) for j, gw in enumerate(gateways)
             if visibility(s, gw)]
    sl = tuple(labels[s] if labels else f"s{s}" for s in sats)
    return _bipartite(len(sats), len(gateways), links, sl, tuple(gw.name for gw in gateways))


def restrict_gsp(full: BipartiteInstance, selected: VertexSet) -> BipartiteInstance:
    """Sub-instance of a visibility instance over all satellites."""
    sats = selected.sorted()
    index = {s: k for k, s in enumerate(sats)}
    links = [(index[s], j) for s, j in full.links if s in index]
    names = full.satellite_labels or tuple(f"s{s}" for s in range(full.n_satellites))
    return _bipartite(len(sats), full.n_gateways, links, tuple(names[s] for s in sats),
                      full.gateway_labels)


@dataclass(frozen=True)
class GroundNetwork:
    """Gateways and base stations joined by terrestrial links (edges between
    node indices: gateways first, then base stations)."""

    n_gateways: int
    n_base_stations: int
    links: tuple
    bands: int
    labels: tuple = ()
    demands: tuple | None = None   # (satellite, base station) pairs; None: nearest

    def __post_init__(self):
        n = self.n_gateways + self.n_base_stations
        links = tuple(sorted({(min(a, b), max(a, b)) for a, b in self.links}))
        for a, b in links:
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise InstanceError(f"bad terrestrial link ({a},{b})")
        object.__setattr__(self, "links", links)
        if self.bands < 1:
            raise InstanceError("need at least one band")

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(("gw", j) for j in range(self.n_gateways))
        g.add_nodes_from(("bs", k) for k in range(self.n_base_stations))
        for a, b in self.links:
            g.add_edge(self._node(a), self._node(b))
        return g

    def _node(self, idx: int):
        return ("gw", idx) if idx < self.n_gateways else ("bs", idx - self.n_gateways)

    def to_json(self) -> dict:
        d = {"kind": "network", "n_gateways": self.n_gateways,
             "n_base_stations": self.n_base_stations, "bands": self.bands,
             "links": [list(l) for l in self.links], "labels": list(self.labels)}
        if self.demands is not None:
            d["demands"] = [list(x) for x in self.demands]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "GroundNetwork":
        dem = d.get("demands")
        return cls(int(d["n_gateways"]), int(d["n_base_stations"]),
                   tuple(tuple(l) for l in d["links"]), int(d["bands"]),
                   tuple(d.get("labels", ())),
                   None if dem is None else tuple(tuple(x) for x in dem))


@dataclass(frozen=True)
class RoutedPath:
    satellite: int
    gateway: int
    base_station: int
    links: frozenset = field(repr=False)

    @property
    def label(self) -> str:
        return f"s{self.satellite}>g{self.gateway}>b{self.base_station}"


def route_paths(assignment: dict, network: GroundNetwork) -> tuple[list[RoutedPath], list[str]]:
    """Shortest satellite -> gateway -> base station routes.

    Each physical link is a frozenset of its two endpoints; the feeder link of
    satellite s to its gateway is ``{("sat", s), ("gw", g)}``. Without explicit
    demands every base station is served by the satellite whose gateway is
    fewest hops away (ties by satellite index).
    """
    g = network.graph()
    for s, gw in sorted(assignment.items()):
        g.add_edge(("sat", int(s)), ("gw", int(gw)))
    warn: list[str] = []
    pairs = []
    if network.demands is not None:
        pairs = [(int(s), int(b)) for s, b in network.demands]
    else:
        for b in range(network.n_base_stations):
            best = None
            for s, gw in sorted(assignment.items()):
                try:
                    d = nx.shortest_path_length(g, ("gw", gw), ("bs", b))
                except nx.NetworkXNoPath:
                    continue
                if best is None or d < best[0]:
                    best = (d, s)
            if best is None:
                warn.append(f"base station {b} is unreachable from every gateway; path omitted")
            else:
                pairs.append((best[1], b))
    paths = []
    for s, b in pairs:
        if s not in assignment:
            warn.append(f"satellite {s} has no gateway; demand to base station {b} omitted")
            continue
        try:
            nodes = nx.shortest_path(g, ("sat", s), ("bs", b))
        except nx.NetworkXNoPath:
            warn.append(f"base station {b} unreachable from satellite {s}; path omitted")
            continue
        links = frozenset(frozenset(e) for e in zip(nodes, nodes[1:]))
        paths.append(RoutedPath(s, int(assignment[s]), b, links))
    return paths, warn


def build_sap_instance(assignment: dict, network: GroundNetwork,
                       bands: int | None = None) -> ColoringInstance:
    """One path per routed demand; conflicts between paths sharing a link."""
    paths, warn = route_paths(assignment, network)
    for w in warn:
        warnings.warn(w, stacklevel=2)
    conflicts = [(i, j) for i in range(len(paths)) for j in range(i + 1, len(paths))
                 if paths[i].links & paths[j].links]
    k = network.bands if bands is None else bands
    return ColoringInstance(len(paths), conflicts, tuple(range(k)), None,
                            tuple(p.label for p in paths))
