"""Instance data model shared by every stage: weighted conflict graphs,
bipartite gateway instances and path-coloring instances, plus JSON I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Sequence


class InstanceError(ValueError):
    """Raised for structurally invalid instances."""


class SchemaError(InstanceError):
    pass


class SelfLoopError(InstanceError):
    pass


class DuplicateEdgeError(InstanceError):
    pass


class NegativeWeightError(InstanceError):
    pass


class ContractError(ValueError):
    """An operation was called with an argument violating its precondition."""


def _norm_edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def _check_edges(n: int, edges: Iterable[Sequence[int]], what: str = "edge") -> frozenset:
    seen: set[tuple[int, int]] = set()
    for e in edges:
        if len(e) != 2:
            raise SchemaError(f"{what} {e!r} must have exactly two endpoints")
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise SelfLoopError(f"{what} ({i},{j}) is a self-loop")
        if not (0 <= i < n and 0 <= j < n):
            raise InstanceError(f"{what} ({i},{j}) references a vertex outside [0, {n})")
        key = _norm_edge(i, j)
        if key in seen:
            raise DuplicateEdgeError(f"duplicate {what} {key}")
        seen.add(key)
    return frozenset(seen)


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected simple graph with non-negative vertex weights."""

    n: int
    weights: tuple[float, ...]
    edges: frozenset = frozenset()
    labels: tuple[str, ...] | None = None

    def __init__(self, n, weights, edges=(), labels=None):
        n = int(n)
        if n < 0:
            raise InstanceError("vertex count must be non-negative")
        w = tuple(float(x) for x in weights)
        if len(w) != n:
            raise InstanceError(f"expected {n} weights, got {len(w)}")
        for i, x in enumerate(w):
            if not x >= 0.0:
                raise NegativeWeightError(f"weight of vertex {i} is {x}")
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != n:
                raise InstanceError(f"expected {n} labels, got {len(labels)}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "edges", _check_edges(n, edges))
        object.__setattr__(self, "labels", labels)

    @property
    def adjacency(self) -> tuple[frozenset, ...]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return tuple(frozenset(a) for a in adj)

    def neighbor_masks(self) -> list[int]:
        """Bitmask of neighbours per vertex (Python ints, any n)."""
        masks = [0] * self.n
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return masks

    def has_edge(self, i: int, j: int) -> bool:
        return _norm_edge(i, j) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in e)

    def subgraph(self, keep: Sequence[int]) -> "WeightedGraph":
        """Induced subgraph on ``keep``, vertices renumbered in the given order."""
        index = {v: k for k, v in enumerate(keep)}
        edges = [(index[i], index[j]) for i, j in self.edges if i in index and j in index]
        labels = None if self.labels is None else [self.labels[v] for v in keep]
        return WeightedGraph(len(keep), [self.weights[v] for v in keep], edges, labels)

    def permuted(self, perm: Sequence[int]) -> "WeightedGraph":
        """Relabel so that old vertex ``perm[k]`` becomes new vertex ``k``."""
        return self.subgraph(list(perm))


@dataclass(frozen=True)
class VertexSet:
    members: frozenset
    objective: float

    @classmethod
    def of(cls, g: WeightedGraph, members: Iterable[int]) -> "VertexSet":
        m = frozenset(int(v) for v in members)
        for v in m:
            if not 0 <= v < g.n:
                raise InstanceError(f"vertex {v} not in graph with n={g.n}")
        return cls(m, float(sum(g.weights[v] for v in sorted(m))))

    def sorted(self) -> list[int]:
        return sorted(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v) -> bool:
        return v in self.members


@dataclass(frozen=True)
class BipartiteInstance:
    """Satellites on one side, gateways on the other, feasible links between."""

    n_satellites: int
    n_gateways: int
    links: frozenset
    link_costs: dict | None = None
    satellite_labels: tuple[str, ...] | None = None
    gateway_labels: tuple[str, ...] | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        links = frozenset((int(s), int(g)) for s, g in self.links)
        for s, g in links:
            if not (0 <= s < self.n_satellites and 0 <= g < self.n_gateways):
                raise InstanceError(f"link ({s},{g}) references an invalid index")
        object.__setattr__(self, "links", links)
        for name, size in (("satellite_labels", self.n_satellites), ("gateway_labels", self.n_gateways)):
            lab = getattr(self, name)
            if lab is not None:
                lab = tuple(str(x) for x in lab)
                if len(lab) != size:
                    raise InstanceError(f"expected {size} {name.replace('_', ' ')}, got {len(lab)}")
                object.__setattr__(self, name, lab)
        object.__setattr__(self, "warnings", tuple(self.warnings))
        if self.link_costs is not None:
            costs = {(int(s), int(g)): float(c) for (s, g), c in self.link_costs.items()}
            if set(costs) - links:
                raise InstanceError("link_costs given for links that do not exist")
            object.__setattr__(self, "link_costs", costs)

    def options(self) -> list[list[int]]:
        opts: list[list[int]] = [[] for _ in range(self.n_satellites)]
        for s, g in sorted(self.links):
            opts[s].append(g)
        return opts

    def isolated_satellites(self) -> list[int]:
        return [s for s, o in enumerate(self.options()) if not o]


@dataclass(frozen=True)
class ColoringInstance:
    """Paths to colour with frequency bands; conflicting paths differ."""

    n_paths: int
    conflicts: frozenset
    bands: tuple
    costs: tuple | None = None
    path_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "conflicts", _check_edges(self.n_paths, self.conflicts, "conflict"))
        object.__setattr__(self, "bands", tuple(self.bands))
        if self.costs is not None:
            rows = tuple(tuple(float(c) for c in row) for row in self.costs)
            if len(rows) != self.n_paths or any(len(r) != len(self.bands) for r in rows):
                raise InstanceError("costs must be an |P| x |K| matrix")
            object.__setattr__(self, "costs", rows)

    def cost(self, p: int, q: int) -> float:
        """Cost of band position ``q`` (0-based) on path ``p``; default is q + 1."""
        if self.costs is None:
            return float(q + 1)
        return self.costs[p][q]

    def as_graph(self) -> WeightedGraph:
        return WeightedGraph(self.n_paths, [1.0] * self.n_paths, self.conflicts)


# -- predicates ---------------------------------------------------------------

def _members(s) -> frozenset:
    return s.members if isinstance(s, VertexSet) else frozenset(s)


def is_independent(g: WeightedGraph, s) -> bool:
    m = _members(s)
    for v in m:
        if not 0 <= v < g.n:
            raise InstanceError(f"vertex {v} not in graph with n={g.n}")
    if len(m) < 2:
        return True
    return not any(i in m and j in m for i, j in g.edges)


def is_maximal(g: WeightedGraph, s) -> bool:
    m = _members(s)
    if not is_independent(g, m):
        raise ContractError("is_maximal requires an independent set")
    adj = g.adjacency
    for v in range(g.n):
        if v not in m and not (adj[v] & m):
            return False
    return True


# -- serialization ------------------------------------------------------------

def _weight_str(x: float) -> str:
    return repr(float(x))


def _parse_weight(s, idx: int) -> float:
    if not isinstance(s, str):
        raise SchemaError(f"weight {idx} must be a decimal string, got {type(s).__name__}")
    try:
        Decimal(s)
    except InvalidOperation:
        raise SchemaError(f"weight {idx} is not a decimal string: {s!r}") from None
    x = float(s)
    if x < 0:
        raise NegativeWeightError(f"weight of vertex {idx} is negative: {s}")
    return x


def instance_to_dict(inst) -> dict:
    if isinstance(inst, WeightedGraph):
        d: dict = {
            "kind": "ssp",
            "n": inst.n,
            "weights": [_weight_str(w) for w in inst.weights],
            "edges": [list(e) for e in inst.sorted_edges()],
        }
        if inst.labels is not None:
            d["labels"] = list(inst.labels)
        return d
    if isinstance(inst, BipartiteInstance):
        links = sorted(inst.links)
        d = {
            "kind": "gsp",
            "n": inst.n_satellites + inst.n_gateways,
            "weights": [],
            "edges": [[s, inst.n_satellites + g] for s, g in links],
            "satellites": list(range(inst.n_satellites)),
            "gateways": list(range(inst.n_gateways)),
            "links": [list(l) for l in links],
        }
        if inst.link_costs is not None:
            d["link_costs"] = [_weight_str(inst.link_costs[l]) for l in links]
        labels = []
        if inst.satellite_labels is not None or inst.gateway_labels is not None:
            labels = list(inst.satellite_labels or [f"s{i}" for i in range(inst.n_satellites)])
            labels += list(inst.gateway_labels or [f"g{j}" for j in range(inst.n_gateways)])
            d["labels"] = labels
        if inst.warnings:
            d["warnings"] = list(inst.warnings)
        return d
    if isinstance(inst, ColoringInstance):
        conflicts = sorted(inst.conflicts)
        d = {
            "kind": "sap",
            "n": inst.n_paths,
            "weights": [],
            "edges": [list(e) for e in conflicts],
            "paths": list(range(inst.n_paths)),
            "conflicts": [list(e) for e in conflicts],
            "bands": list(inst.bands),
        }
        if inst.costs is not None:
            d["costs"] = [[_weight_str(c) for c in row] for row in inst.costs]
        if inst.path_labels is not None:
            d["labels"] = list(inst.path_labels)
        return d
    raise TypeError(f"cannot serialize {type(inst).__name__}")


def _require(d: dict, key: str, typ):
    if key not in d:
        raise SchemaError(f"missing required key {key!r}")
    if not isinstance(d[key], typ) or (typ is int and isinstance(d[key], bool)):
        raise SchemaError(f"key {key!r} has wrong type {type(d[key]).__name__}")
    return d[key]


def instance_from_dict(d: dict, kind: str | None = None):
    if not isinstance(d, dict):
        raise SchemaError("instance must be a JSON object")
    k = _require(d, "kind", str)
    if kind is not None and k != kind:
        raise SchemaError(f"expected kind {kind!r}, file has {k!r}")
    n = _require(d, "n", int)
    weights = _require(d, "weights", list)
    edges = _require(d, "edges", list)
    labels = d.get("labels")
    if k == "ssp":
        w = [_parse_weight(s, i) for i, s in enumerate(weights)]
        return WeightedGraph(n, w, [tuple(e) for e in edges], labels)
    if k == "gsp":
        sats = _require(d, "satellites", list)
        gws = _require(d, "gateways", list)
        links = [tuple(l) for l in _require(d, "links", list)]
        if len(set(links)) != len(links):
            raise DuplicateEdgeError("duplicate link in GSP instance")
        costs = d.get("link_costs")
        link_costs = None
        if costs is not None:
            if len(costs) != len(links):
                raise SchemaError("link_costs must align with links")
            link_costs = {l: _parse_weight(c, i) for i, (l, c) in enumerate(zip(links, costs))}
        ns = len(sats)
        sl = gl = None
        if labels is not None:
            sl, gl = labels[:ns], labels[ns:]
        return BipartiteInstance(ns, len(gws), frozenset(links), link_costs, sl, gl,
                                 tuple(d.get("warnings", ())))
    if k == "sap":
        paths = _require(d, "paths", list)
        conflicts = [tuple(e) for e in _require(d, "conflicts", list)]
        bands = _require(d, "bands", list)
        costs = d.get("costs")
        if costs is not None:
            costs = [[_parse_weight(c, i) for c in row] for i, row in enumerate(costs)]
        return ColoringInstance(len(paths), conflicts, tuple(bands), costs,
                                None if labels is None else tuple(labels))
    raise SchemaError(f"unknown instance kind {k!r}")


def read_instance(path, kind: str | None = None):
    text = Path(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed JSON: {exc}") from None
    return instance_from_dict(d, kind)


def write_instance(path, inst) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1) + "\n")
