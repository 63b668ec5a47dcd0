"""Spectrum assignment as minimum-cost proper colouring of the path conflict graph."""

from __future__ import annotations

import math
import time

import networkx as nx
import numpy as np
from scipy.optimize import linear_sum_assignment

from ..graph import ColoringInstance
from .result import INFEASIBLE, OPTIMAL, TIMEOUT, SolveResult

EXACT_MAX_PATHS = 30


def _adjacency(inst: ColoringInstance) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(inst.n_paths)]
    for p, r in inst.conflicts:
        adj[p].add(r)
        adj[r].add(p)
    return adj


def coloring_cost(inst: ColoringInstance, colors: dict[int, int]) -> float:
    return float(sum(inst.cost(p, q) for p, q in sorted(colors.items())))


def is_proper(inst: ColoringInstance, colors: dict[int, int]) -> bool:
    if set(colors) != set(range(inst.n_paths)):
        return False
    if any(not 0 <= q < len(inst.bands) for q in colors.values()):
        return False
    return all(colors[p] != colors[r] for p, r in inst.conflicts)


def bands_used(colors: dict[int, int] | None) -> int:
    return len(set(colors.values())) if colors else 0


def largest_clique(inst: ColoringInstance) -> list[int]:
    g = nx.Graph()
    g.add_nodes_from(range(inst.n_paths))
    g.add_edges_from(inst.conflicts)
    if inst.n_paths == 0:
        return []
    return sorted(max(nx.find_cliques(g), key=lambda c: (len(c), [-v for v in sorted(c)])))


def dsatur(inst: ColoringInstance) -> dict[int, int]:
    """Saturation-degree greedy colouring; band positions may exceed |K|."""
    adj = _adjacency(inst)
    colors: dict[int, int] = {}
    sat: list[set[int]] = [set() for _ in range(inst.n_paths)]
    for _ in range(inst.n_paths):
        v = max((u for u in range(inst.n_paths) if u not in colors),
                key=lambda u: (len(sat[u]), len(adj[u]), -u))
        q = 0
        while q in sat[v]:
            q += 1
        colors[v] = q
        for u in adj[v]:
            sat[u].add(q)
    return colors


_BIG = 1e15


def rebalance(inst: ColoringInstance, colors: dict[int, int]) -> dict[int, int]:
    """Move whole colour classes to the bands that make them cheapest.

    Classes stay independent, so the result is proper; band choice is a linear
    assignment over (class, band) with cost summed over class members.
    """
    classes = sorted({q for q in colors.values()})
    k = len(inst.bands)
    if len(classes) > k:
        return colors
    members = {q: [p for p, c in colors.items() if c == q] for q in classes}
    mat = np.array([[sum(inst.cost(p, b) for p in members[q]) for b in range(k)]
                    for q in classes])
    rows, cols = linear_sum_assignment(mat)
    out = {}
    for r, c in zip(rows, cols):
        for p in members[classes[r]]:
            out[p] = int(c)
    return out if coloring_cost(inst, out) <= coloring_cost(inst, colors) else colors


def _exact(inst: ColoringInstance, incumbent, deadline: float):
    n, k = inst.n_paths, len(inst.bands)
    adj = _adjacency(inst)
    cost = np.array([[inst.cost(p, q) for q in range(k)] for p in range(n)], dtype=float)
    best = [coloring_cost(inst, incumbent) if incumbent else math.inf, incumbent]
    colors: dict[int, int] = {}
    nodes = [0]
    timed_out = [False]

    def lower_bound(partial: float) -> float:
        # unassigned paths split greedily into cliques; each clique needs
        # pairwise distinct bands, which is an assignment problem
        free = sorted((p for p in range(n) if p not in colors), key=lambda p: -len(adj[p]))
        lb = partial
        remaining = list(free)
        while remaining:
            clique = [remaining[0]]
            for p in remaining[1:]:
                if all(p in adj[c] for c in clique):
                    clique.append(p)
            remaining = [p for p in remaining if p not in clique]
            sub = cost[clique].copy()
            for i, p in enumerate(clique):
                for r in adj[p]:
                    if r in colors:
                        sub[i, colors[r]] = _BIG
            if len(clique) == 1:
                val = sub[0].min()
            else:
                rows, cols = linear_sum_assignment(sub)
                val = sub[rows, cols].sum()
            if val >= _BIG:
                return math.inf
            lb += val
        return lb

    def search(partial: float) -> None:
        if timed_out[0]:
            return
        nodes[0] += 1
        if nodes[0] % 512 == 0 and time.perf_counter() > deadline:
            timed_out[0] = True
            return
        if len(colors) == n:
            if partial < best[0] - 1e-12:
                best[0], best[1] = partial, dict(colors)
            return
        if lower_bound(partial) >= best[0] - 1e-12:
            return
        free = [u for u in range(n) if u not in colors]
        v = max(free, key=lambda u: (len({colors[r] for r in adj[u] if r in colors}),
                                     len(adj[u]), -u))
        banned = {colors[r] for r in adj[v] if r in colors}
        for q in range(k):
            if q in banned:
                continue
            colors[v] = q
            search(partial + cost[v, q])
            del colors[v]

    search(0.0)
    return best[1], not timed_out[0]


def _band_only_costs(inst: ColoringInstance) -> list[float] | None:
    """Per-band cost vector when every path prices bands identically."""
    k = len(inst.bands)
    first = [inst.cost(0, q) for q in range(k)]
    if inst.costs is not None and any(
            [inst.cost(p, q) for q in range(k)] != first for p in range(1, inst.n_paths)):
        return None
    return first


def _maximal_independent_sets(mask: int, nbr: list[int]):
    """Maximal independent sets of the subgraph induced by ``mask`` (pivoting
    Bron-Kerbosch on the complement), as bitmasks."""
    out: list[int] = []

    def expand(r: int, p: int, x: int) -> None:
        if not p and not x:
            out.append(r)
            return
        px = p | x
        # pivot with most candidates among its non-neighbours
        best_u, best_cnt = -1, -1
        m = px
        while m:
            low = m & -m
            u = low.bit_length() - 1
            m ^= low
            cnt = bin(p & ~nbr[u] & ~low).count("1")
            if cnt > best_cnt:
                best_u, best_cnt = u, cnt
        m = p & (nbr[best_u] | (1 << best_u))
        while m:
            low = m & -m
            v = low.bit_length() - 1
            m ^= low
            keep = ~nbr[v] & ~low
            expand(r | low, p & keep, x & keep)
            p &= ~low
            x |= low

    expand(0, mask, 0)
    return out


def _exact_by_classes(inst: ColoringInstance, band_cost: list[float], incumbent,
                      deadline: float):
    """Minimum-cost colouring when cost depends only on the band.

    Bands are filled cheapest first; each band takes a maximal independent set
    of the still-uncoloured paths (moving a path to an earlier, cheaper band
    never costs more, so some optimum has this shape).
    """
    n = inst.n_paths
    order = sorted(range(len(band_cost)), key=lambda q: (band_cost[q], q))
    c = [band_cost[q] for q in order]
    k = len(c)
    adj = _adjacency(inst)
    nbr = [sum(1 << r for r in adj[p]) for p in range(n)]
    best = [coloring_cost(inst, incumbent) if incumbent else math.inf, incumbent]
    classes: list[int] = []
    nodes = [0]
    timed_out = [False]

    def clique_bound(mask: int, level: int) -> float:
        lb = 0.0
        rest = mask
        while rest:
            # greedy clique: highest remaining degree first
            verts = [v for v in range(n) if rest >> v & 1]
            v0 = max(verts, key=lambda v: bin(nbr[v] & rest).count("1"))
            clique = 1 << v0
            common = nbr[v0] & rest
            while common:
                u = max((v for v in range(n) if common >> v & 1),
                        key=lambda v: bin(nbr[v] & common).count("1"))
                clique |= 1 << u
                common &= nbr[u]
            size = bin(clique).count("1")
            if level + size > k:
                return math.inf
            lb += sum(c[level:level + size])
            rest &= ~clique
        return lb

    def search(mask: int, partial: float) -> None:
        if timed_out[0]:
            return
        nodes[0] += 1
        if nodes[0] % 256 == 0 and time.perf_counter() > deadline:
            timed_out[0] = True
            return
        if mask == 0:
            if partial < best[0] - 1e-12:
                sol = {}
                for level, cls in enumerate(classes):
                    for p in range(n):
                        if cls >> p & 1:
                            sol[p] = order[level]
                best[0], best[1] = partial, sol
            return
        level = len(classes)
        if level >= k or partial + clique_bound(mask, level) >= best[0] - 1e-12:
            return
        cands = _maximal_independent_sets(mask, nbr)
        cands.sort(key=lambda m: (-bin(m).count("1"), m))
        for cls in cands:
            classes.append(cls)
            search(mask & ~cls, partial + c[level] * bin(cls).count("1"))
            classes.pop()

    search((1 << n) - 1, 0.0)
    return best[1], not timed_out[0]


def _fewest_bands(inst: ColoringInstance, band_cost: list[float], incumbent, lower: int,
                  deadline: float):
    """Cheapest colouring among those using the fewest bands.

    Tries the cheapest ``k`` bands for k = lower, lower + 1, ...; the first k
    that admits a colouring is the chromatic number.
    """
    order = sorted(range(len(band_cost)), key=lambda q: (band_cost[q], q))
    for k in range(max(lower, 1), len(band_cost) + 1):
        keep = set(order[:k])
        # only an incumbent inside the first k bands may bound this round
        inc = incumbent if incumbent and set(incumbent.values()) <= keep else None
        sub = [c if q in keep else math.inf for q, c in enumerate(band_cost)]
        colors, proved = _exact_by_classes(inst, sub, inc, deadline)
        if colors is not None and bands_used(colors) <= k:
            return colors, proved
        if not proved:
            return incumbent, False
    return None, True


def sap_solve(inst: ColoringInstance, mode: str = "exact", budget: float = 60.0,
              objective: str | None = None) -> SolveResult:
    """Colour paths with bands so conflicting paths differ.

    ``exact`` backtracks (<= 30 paths). Its ``objective`` is ``"bands"``
    (fewest distinct bands, then lowest summed cost) or ``"cost"`` (lowest
    summed cost alone, which may spread over more bands than necessary);
    the default is ``"bands"`` for default costs and ``"cost"`` for an
    explicit cost matrix. ``dsatur`` runs the saturation-degree heuristic.
    """
    t0 = time.perf_counter()
    k = len(inst.bands)
    if inst.n_paths == 0:
        return SolveResult({}, 0.0, OPTIMAL, 0.0, {"bands_used": 0})
    greedy = dsatur(inst)
    greedy_ok = max(greedy.values()) < k
    if mode == "dsatur":
        if not greedy_ok:
            return SolveResult(None, math.inf, INFEASIBLE, time.perf_counter() - t0,
                               {"bands_needed": bands_used(greedy)})
        return SolveResult(greedy, coloring_cost(inst, greedy), "feasible",
                           time.perf_counter() - t0, {"bands_used": bands_used(greedy)})
    if mode != "exact":
        raise ValueError(f"unknown SAP mode {mode!r}")
    if inst.n_paths > EXACT_MAX_PATHS:
        raise ValueError(f"exact SAP limited to {EXACT_MAX_PATHS} paths, got {inst.n_paths}")
    clique = largest_clique(inst)
    if len(clique) > k:
        return SolveResult(None, math.inf, INFEASIBLE, time.perf_counter() - t0,
                           {"certificate_clique": clique})
    deadline = t0 + budget if math.isfinite(budget) else math.inf
    incumbent = rebalance(inst, greedy) if greedy_ok else None
    band_cost = _band_only_costs(inst)
    if objective is None:
        objective = "bands" if inst.costs is None else "cost"
    if objective not in ("bands", "cost"):
        raise ValueError(f"unknown SAP objective {objective!r}")
    if objective == "bands":
        if band_cost is None:
            raise ValueError("band-count objective needs costs that depend only on the band")
        colors, proved = _fewest_bands(inst, band_cost, incumbent, len(clique), deadline)
    elif band_cost is not None:
        colors, proved = _exact_by_classes(inst, band_cost, incumbent, deadline)
    else:
        colors, proved = _exact(inst, incumbent, deadline)
    elapsed = time.perf_counter() - t0
    if colors is None:
        info = {} if proved else {"reason": "budget exhausted before any colouring was found"}
        return SolveResult(None, math.inf, INFEASIBLE, elapsed, info)
    return SolveResult(colors, coloring_cost(inst, colors), OPTIMAL if proved else TIMEOUT,
                       elapsed, {"bands_used": bands_used(colors)})
