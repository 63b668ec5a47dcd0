"""Gateway selection: assign each satellite to one linked gateway, minimising the
largest gateway load."""

from __future__ import annotations

import itertools
import math
import time

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from ..graph import BipartiteInstance
from .result import INFEASIBLE, OPTIMAL, SolveResult

BRUTEFORCE_MAX_SATS = 8
BRUTEFORCE_MAX_GWS = 5


def assignment_with_cap(inst: BipartiteInstance, cap: int) -> dict[int, int] | None:
    """Assignment with every gateway load <= ``cap``, or None if none exists.

    Source -> satellite (capacity 1) -> gateway (1 per link) -> sink (``cap``);
    a flow of |S| is exactly a feasible assignment.
    """
    ns, ng = inst.n_satellites, inst.n_gateways
    if ns == 0:
        return {}
    if cap <= 0 or ng == 0:
        return None
    src, sink = ns + ng, ns + ng + 1
    links = sorted(inst.links)
    rows = [src] * ns + [s for s, _ in links] + [ns + g for g in range(ng)]
    cols = list(range(ns)) + [ns + g for _, g in links] + [sink] * ng
    data = [1] * ns + [1] * len(links) + [cap] * ng
    size = ns + ng + 2
    graph = csr_matrix((np.asarray(data, dtype=np.int32), (rows, cols)), shape=(size, size))
    res = maximum_flow(graph, src, sink)
    if res.flow_value < ns:
        return None
    flow = res.flow.tocoo()
    out: dict[int, int] = {}
    for r, c, f in zip(flow.row, flow.col, flow.data):
        if f > 0 and r < ns and ns <= c < ns + ng:
            out[int(r)] = int(c - ns)
    return out


def max_load(assign: dict[int, int]) -> int:
    if not assign:
        return 0
    return max(np.bincount(list(assign.values())))


def is_valid_assignment(inst: BipartiteInstance, assign: dict[int, int]) -> bool:
    return (set(assign) == set(range(inst.n_satellites))
            and all((s, g) in inst.links for s, g in assign.items()))


def gsp_solve(inst: BipartiteInstance) -> SolveResult:
    """Exact min-max load by binary search on the cap with a max-flow check."""
    t0 = time.perf_counter()
    ns = inst.n_satellites
    if ns == 0:
        return SolveResult({}, 0, OPTIMAL, time.perf_counter() - t0)
    isolated = inst.isolated_satellites()
    if isolated:
        return SolveResult(None, math.inf, INFEASIBLE, time.perf_counter() - t0,
                           {"isolated_satellites": isolated})
    lo = max(1, -(-ns // max(inst.n_gateways, 1)))
    hi = ns
    best = assignment_with_cap(inst, hi)
    assert best is not None  # every satellite has a link, so cap=|S| is feasible
    while lo < hi:
        mid = (lo + hi) // 2
        a = assignment_with_cap(inst, mid)
        if a is None:
            lo = mid + 1
        else:
            hi, best = mid, a
    if max_load(best) != lo:
        best = assignment_with_cap(inst, lo)
    return SolveResult(best, lo, OPTIMAL, time.perf_counter() - t0)


def gsp_bruteforce(inst: BipartiteInstance) -> SolveResult:
    """Enumerate every assignment (|S| <= 8, |G| <= 5)."""
    if inst.n_satellites > BRUTEFORCE_MAX_SATS or inst.n_gateways > BRUTEFORCE_MAX_GWS:
        raise ValueError("instance too large for brute force")
    t0 = time.perf_counter()
    opts = inst.options()
    if inst.n_satellites == 0:
        return SolveResult({}, 0, OPTIMAL, time.perf_counter() - t0)
    if any(not o for o in opts):
        return SolveResult(None, math.inf, INFEASIBLE, time.perf_counter() - t0)
    best_m, best = None, None
    for choice in itertools.product(*opts):
        m = max(choice.count(g) for g in set(choice))
        if best_m is None or m < best_m:
            best_m, best = m, dict(enumerate(choice))
    return SolveResult(best, best_m, OPTIMAL, time.perf_counter() - t0)
