"""Instance triples and a seeded synthetic generator for desk-scale runs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..graph import (BipartiteInstance, WeightedGraph, instance_from_dict, instance_to_dict)
from .build import (DEFAULT_ELEVATION, DEFAULT_OVERLAP, GroundNetwork, build_ssp_instance,
                    elevation_visibility)
from .coverage import Region, Site, coverage_track, great_circle_km, stable_seed
from .tle import TLERecord


@dataclass(frozen=True)
class InstanceTriple:
    """Everything one pipeline run needs: the SSP graph, gateway visibility for
    every SSP vertex, and the terrestrial network routed after the GSP."""

    id: str
    ssp: WeightedGraph
    gsp: BipartiteInstance
    network: GroundNetwork

    def __post_init__(self):
        if self.gsp.n_satellites != self.ssp.n:
            raise ValueError("visibility instance must cover every SSP vertex")
        if self.network.n_gateways != self.gsp.n_gateways:
            raise ValueError("network and visibility disagree on the gateway count")

    def to_json(self) -> dict:
        return {"id": self.id, "ssp": instance_to_dict(self.ssp),
                "gsp": instance_to_dict(self.gsp), "network": self.network.to_json()}

    @classmethod
    def from_json(cls, d: dict) -> "InstanceTriple":
        return cls(str(d["id"]), instance_from_dict(d["ssp"], "ssp"),
                   instance_from_dict(d["gsp"], "gsp"), GroundNetwork.from_json(d["network"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "InstanceTriple":
        return cls.from_json(json.loads(Path(path).read_text()))


def _gateway_links(sat_xy, gw_xy, reach):
    links = set()
    for s, p in enumerate(sat_xy):
        d = np.hypot(*(gw_xy - p).T)
        links.update((s, int(j)) for j in np.nonzero(d <= reach)[0])
        links.add((s, int(np.argmin(d))))
    return frozenset(links)


def synth_triple(seed: int, n: int, ident: str = "synth") -> InstanceTriple:
    """One triple with ``n`` satellites on a unit square.

    Footprint centres that land close together conflict (a sparse, clustered
    overlap graph); weights are coverage-like fractions in (0, 1]. Each
    satellite sees its nearest gateway plus any within reach. Gateways form a
    backbone chain; base stations hang off their nearest gateway and nearest
    other base station.
    """
    rng = np.random.default_rng(stable_seed("synth", seed, ident))
    n_clusters = max(1, n // 4)
    centres = rng.uniform(0.15, 0.85, (n_clusters, 2))
    sat_xy = centres[rng.integers(0, n_clusters, n)] + rng.normal(0, 0.08, (n, 2))
    radius = 0.12
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if np.hypot(*(sat_xy[i] - sat_xy[j])) < radius]
    weights = np.round(rng.uniform(0.05, 1.0, n), 4)
    ssp = WeightedGraph(n, weights, edges, [f"sat{i}" for i in range(n)])

    n_gw = int(rng.integers(2, 5))
    gw_xy = rng.uniform(0.0, 1.0, (n_gw, 2))
    gsp = BipartiteInstance(n, n_gw, _gateway_links(sat_xy, gw_xy, 0.35), None,
                            ssp.labels, tuple(f"gw{j}" for j in range(n_gw)))

    n_bs = int(rng.integers(3, 7))
    bs_xy = rng.uniform(0.0, 1.0, (n_bs, 2))
    links = {(j, j + 1) for j in range(n_gw - 1)}   # gateway backbone
    for b, p in enumerate(bs_xy):
        links.add((int(np.argmin(np.hypot(*(gw_xy - p).T))), n_gw + b))
        if n_bs > 1:
            d = np.hypot(*(bs_xy - p).T)
            d[b] = np.inf
            links.add((n_gw + b, n_gw + int(np.argmin(d))))
    labels = tuple(f"gw{j}" for j in range(n_gw)) + tuple(f"bs{b}" for b in range(n_bs))
    network = GroundNetwork(n_gw, n_bs, tuple(links), bands=max(4, n_bs), labels=labels)
    return InstanceTriple(ident, ssp, gsp, network)


def synth_suite(seed: int, count: int, size_range=(5, 10)) -> list[InstanceTriple]:
    lo, hi = int(size_range[0]), int(size_range[1])
    if lo < 1 or hi < lo:
        raise ValueError("size range must satisfy 1 <= n_min <= n_max")
    rng = np.random.default_rng(stable_seed("suite", seed))
    sizes = rng.integers(lo, hi + 1, count)
    return [synth_triple(seed, int(n), f"synth-{seed}-{k:03d}") for k, n in enumerate(sizes)]


def triple_from_sources(records: list[TLERecord], region: Region, sites: list[Site],
                        t0, t1, step: float = 10.0, half_angle_deg: float = 40.0,
                        overlap_threshold: float = DEFAULT_OVERLAP,
                        min_elevation_deg: float = DEFAULT_ELEVATION,
                        backhaul_km: float = 500.0, bands: int = 8,
                        ident: str | None = None) -> InstanceTriple:
    """Orbital elements + region + sites -> instance triple.

    Gateways and base stations come from the site list by ``kind``; ground
    sites closer than ``backhaul_km`` share a terrestrial link.
    """
    tracks = [coverage_track(r, region, t0, t1, step, half_angle_deg) for r in records]
    ssp = build_ssp_instance(tracks, region, overlap_threshold)
    kept = [t for t in tracks if t.mean_fraction > 0.0]
    gws = [s for s in sites if s.kind == "gateway"]
    bss = [s for s in sites if s.kind == "base_station"]
    visible = elevation_visibility(kept, min_elevation_deg)
    links = frozenset((k, j) for k in range(len(kept)) for j, gw in enumerate(gws)
                      if visible(k, gw))
    gsp = BipartiteInstance(ssp.n, len(gws), links, None, ssp.labels,
                            tuple(g.name for g in gws))
    ground = gws + bss
    tl = [(a, b) for a in range(len(ground)) for b in range(a + 1, len(ground))
          if great_circle_km(ground[a], ground[b]) <= backhaul_km]
    network = GroundNetwork(len(gws), len(bss), tuple(tl), bands,
                            tuple(s.name for s in ground))
    return InstanceTriple(ident or region.name, ssp, gsp, network)
