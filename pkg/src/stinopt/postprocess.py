"""Turn measured shots into feasible MWIS solutions: discard bitstrings that
violate independence, greedily augment the rest, keep the best."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import ContractError, VertexSet, WeightedGraph, is_independent
from .rydberg.sim import ShotSet, pattern_members
from .solvers.mwis import _greedy_members

TIE_TOL = 1e-9


def decode_shots(shots: ShotSet, g: WeightedGraph) -> list[tuple[VertexSet, int]]:
    """One (vertex set, count) per distinct pattern; '0' at position i selects i."""
    out = []
    for p, count in shots.counts.items():
        if len(p) != g.n:
            raise ValueError(f"pattern of length {len(p)} for a graph with {g.n} vertices")
        out.append((VertexSet.of(g, pattern_members(p)), count))
    return out


def greedy_augment(s: VertexSet, g: WeightedGraph) -> VertexSet:
    """Add free vertices by descending weight (ties by index) until maximal."""
    if not is_independent(g, s.members):
        raise ContractError("cannot augment a set that is not independent")
    return VertexSet.of(g, _greedy_members(g, sorted(s.members)))


def _best(sets) -> VertexSet:
    top = max(s.objective for s in sets)
    near = [s for s in sets if s.objective >= top - TIE_TOL * max(1.0, abs(top))]
    return min(near, key=lambda s: tuple(s.sorted()))


@dataclass(frozen=True)
class RefinementOutcome:
    n: int
    shots: int
    raw_sets: list            # [(VertexSet, count)] per distinct pattern
    feasible_sets: list       # independent subset of raw_sets
    refined_sets: list        # augmented counterpart of each feasible entry
    best: VertexSet
    n_nonindependent: int
    hamming_mean: float
    hamming_max: float

    def histogram(self) -> dict:
        """Shot counts per category: independence, best hits, and whether the
        refined set was sampled directly or needed augmentation."""
        best = self.best.members
        feasible = sum(c for _, c in self.feasible_sets)
        sampled = sum(c for (r, c), (a, _) in zip(self.feasible_sets, self.refined_sets)
                      if r.members == a.members)
        return {
            "independent": feasible,
            "non_independent": self.n_nonindependent,
            "raw_best": sum(c for s, c in self.raw_sets if s.members == best),
            "refined_best": sum(c for s, c in self.refined_sets if s.members == best),
            "refined_sampled": sampled,
            "refined_augmented": feasible - sampled,
        }

    def to_json(self) -> dict:
        def rows(items):
            return [{"members": s.sorted(), "count": c, "objective": s.objective}
                    for s, c in items]
        return {
            "n": self.n, "shots": self.shots,
            "best": {"members": self.best.sorted(), "objective": self.best.objective},
            "n_nonindependent": self.n_nonindependent,
            "hamming_mean": self.hamming_mean, "hamming_max": self.hamming_max,
            "histogram": self.histogram(),
            "raw_sets": rows(self.raw_sets),
            "feasible_sets": rows(self.feasible_sets),
            "refined_sets": rows(self.refined_sets),
        }


def refine(shots: ShotSet, g: WeightedGraph) -> RefinementOutcome:
    """Discard-and-augment over a shot set.

    Hamming distances (refined minus raw, over N) are averaged per shot over
    kept bitstrings only. If every shot is discarded the best set falls back
    to greedy augmentation of the empty set.
    """
    raw = decode_shots(shots, g)
    feasible, refined = [], []
    dropped = 0
    for s, c in raw:
        if is_independent(g, s.members):
            feasible.append((s, c))
            refined.append((greedy_augment(s, g), c))
        else:
            dropped += c
    if refined:
        best = _best([s for s, _ in refined])
        n = max(g.n, 1)
        # integer flip counts keep the mean from rounding past the max
        flips = [len(a.members - r.members) for (r, _), (a, _) in zip(feasible, refined)]
        kept = sum(c for _, c in feasible)
        h_mean = sum(f * c for f, (_, c) in zip(flips, feasible)) / (kept * n)
        h_max = max(flips) / n
    else:
        best = greedy_augment(VertexSet.of(g, ()), g)
        h_mean = h_max = 0.0
    return RefinementOutcome(g.n, shots.shots, raw, feasible, refined, best, dropped,
                             h_mean, h_max)


def bootstrap_objectives(shots: ShotSet, g: WeightedGraph, subsample: int = 100,
                         reps: int = 20, seed: int = 0) -> list[float]:
    """Best refined objective of ``reps`` resamples (with replacement) of
    ``subsample`` shots from the empirical distribution."""
    if subsample <= 0 or subsample > shots.shots:
        raise ValueError(f"subsample must lie in [1, {shots.shots}]")
    if reps < 0:
        raise ValueError("reps must be non-negative")
    patterns = list(shots.counts)
    probs = np.array([shots.counts[p] for p in patterns], dtype=float) / shots.shots
    full = refine(shots, g)
    value = {}
    for (s, _), (a, _) in zip(full.feasible_sets, full.refined_sets):
        value[frozenset(s.members)] = a.objective
    fallback = greedy_augment(VertexSet.of(g, ()), g).objective
    per_pattern = [value.get(pattern_members(p)) for p in patterns]
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(reps):
        draws = rng.multinomial(subsample, probs)
        vals = [per_pattern[k] for k in np.nonzero(draws)[0] if per_pattern[k] is not None]
        out.append(max(vals) if vals else fallback)
    return out
