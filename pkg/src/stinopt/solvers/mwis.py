"""Maximum weight independent set: enumeration oracle, branch-and-bound, greedy."""

from __future__ import annotations

import math
import time

import numpy as np

from .. import kernels
from ..graph import VertexSet, WeightedGraph
from .result import OPTIMAL, TIMEOUT, SolveResult

BRUTEFORCE_MAX_N = 25
_LOW_BITS = 20


class SizeError(ValueError):
    pass


def _subset_tables(weights, nbr, nbits):
    """Independence flag and weight for every subset of the first ``nbits`` vertices."""
    size = 1 << nbits
    indep = np.ones(size, dtype=bool)
    total = np.zeros(size, dtype=np.float64)
    for b in range(nbits):
        lo, hi = 1 << b, 1 << (b + 1)
        prev = np.arange(0, lo, dtype=np.int64)
        clash = (prev & (nbr[b] & (lo - 1))) != 0
        indep[lo:hi] = indep[:lo] & ~clash
        total[lo:hi] = total[:lo] + weights[b]
    return indep, total


def mwis_bruteforce(g: WeightedGraph) -> SolveResult:
    """Exact MWIS by enumerating every vertex subset (n <= 25).

    Subsets of the low 20 vertices are tabulated once; each independent subset
    of the remaining high vertices is combined with the compatible low subsets.
    """
    if g.n > BRUTEFORCE_MAX_N:
        raise SizeError(f"brute force limited to n <= {BRUTEFORCE_MAX_N}, got {g.n}")
    t0 = time.perf_counter()
    nbr = g.neighbor_masks()
    w = np.asarray(g.weights, dtype=np.float64)
    low = min(g.n, _LOW_BITS)
    low_mask = (1 << low) - 1
    indep_lo, total_lo = _subset_tables(w, nbr, low)
    idx = np.arange(1 << low, dtype=np.int64)
    best_w, best_mask = -1.0, 0
    for hmask in range(1 << (g.n - low)):
        members_hi = [low + b for b in range(g.n - low) if hmask >> b & 1]
        hbits = sum(1 << v for v in members_hi)
        if any(nbr[v] & hbits for v in members_hi):
            continue
        blocked = 0
        for v in members_hi:
            blocked |= nbr[v] & low_mask
        ok = indep_lo & ((idx & blocked) == 0)
        cand = np.where(ok, total_lo, -np.inf)
        k = int(np.argmax(cand))
        val = float(cand[k]) + float(sum(w[v] for v in members_hi))
        if val > best_w:
            best_w, best_mask = val, k | hbits
    members = [v for v in range(g.n) if best_mask >> v & 1]
    vs = VertexSet.of(g, members)
    return SolveResult(vs, vs.objective, OPTIMAL, time.perf_counter() - t0)


def _greedy_members(g: WeightedGraph, start=()) -> list[int]:
    nbr = g.neighbor_masks()
    chosen = 0
    blocked = 0
    for v in start:
        chosen |= 1 << v
        blocked |= nbr[v] | (1 << v)
    for v in sorted(range(g.n), key=lambda v: (-g.weights[v], v)):
        if not blocked >> v & 1:
            chosen |= 1 << v
            blocked |= nbr[v] | (1 << v)
    return [v for v in range(g.n) if chosen >> v & 1]


def greedy_mwis(g: WeightedGraph) -> SolveResult:
    """Heaviest-first greedy; equal weights resolved by lowest index."""
    t0 = time.perf_counter()
    vs = VertexSet.of(g, _greedy_members(g))
    return SolveResult(vs, vs.objective, "feasible", time.perf_counter() - t0,
                       {"maximal": True})


def mwis_exact(g: WeightedGraph, budget: float = 60.0) -> SolveResult:
    """Branch-and-bound with a weighted clique-cover bound and greedy incumbent.

    Returns ``optimal`` when the search finishes inside ``budget`` seconds,
    otherwise ``feasible-timeout`` with the best incumbent found.
    """
    if not budget > 0:
        raise ValueError("budget must be positive")
    t0 = time.perf_counter()
    if g.n == 0:
        return SolveResult(VertexSet(frozenset(), 0.0), 0.0, OPTIMAL, 0.0)
    greedy = _greedy_members(g)
    inc_mask = sum(1 << v for v in greedy)
    inc_w = float(sum(g.weights[v] for v in greedy))
    deadline = t0 + budget if math.isfinite(budget) else math.inf
    mask, _, proved, nodes = kernels.mwis_bnb(
        list(g.weights), g.neighbor_masks(), inc_mask, inc_w, deadline)
    vs = VertexSet.of(g, [v for v in range(g.n) if mask >> v & 1])
    status = OPTIMAL if proved else TIMEOUT
    return SolveResult(vs, vs.objective, status, time.perf_counter() - t0,
                       {"nodes": nodes, "backend": kernels.BACKEND})
