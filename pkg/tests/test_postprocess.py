import numpy as np
import pytest

from stinopt.embedding import DENConfig, embed
from stinopt.graph import ContractError, VertexSet, WeightedGraph, is_independent, is_maximal
from stinopt.postprocess import bootstrap_objectives, decode_shots, greedy_augment, refine
from stinopt.rydberg import PhysicsConfig, ShotSet, run_qaa
from stinopt.solvers.mwis import greedy_mwis, mwis_bruteforce

from conftest import complete, cycle, path, random_graph


def shots_of(counts, n, seed=0):
    return ShotSet(dict(counts), sum(counts.values()), seed, n)


def test_decode_examples():
    g = path(3)
    for p, want in (("111", set()), ("000", {0, 1, 2}), ("011", {0})):
        ((s, c),) = decode_shots(shots_of({p: 4}, 3), g)
        assert s.members == want and c == 4
    with pytest.raises(ValueError):
        decode_shots(shots_of({"01": 1}, 2), g)


def test_augment_examples():
    k3 = WeightedGraph(3, [1, 2, 3], [(0, 1), (1, 2), (0, 2)])
    assert greedy_augment(VertexSet.of(k3, ()), k3).members == {2}
    c5 = cycle(5)
    assert greedy_augment(VertexSet.of(c5, {0}), c5).members == {0, 2}
    full = VertexSet.of(c5, {0, 2})
    assert greedy_augment(full, c5) == full
    with pytest.raises(ContractError):
        greedy_augment(VertexSet.of(c5, {0, 1}), c5)


def test_augment_empty_is_greedy(rng):
    for _ in range(200):
        g = random_graph(rng, int(rng.integers(1, 15)), rng.uniform(0.1, 0.9))
        assert greedy_augment(VertexSet.of(g, ()), g).members == greedy_mwis(g).solution.members


def test_refine_all_empty_is_greedy():
    g = WeightedGraph(4, [1, 3, 2, 1], [(0, 1), (1, 2), (2, 3)])
    out = refine(shots_of({"1111": 300}, 4), g)
    greedy = greedy_mwis(g).solution
    assert out.best == greedy
    assert out.hamming_mean == pytest.approx(len(greedy) / 4)
    assert out.n_nonindependent == 0


def test_refine_optimum_shot_has_zero_distance():
    g = path(3)
    out = refine(shots_of({"010": 10}, 3), g)
    assert out.best.members == {0, 2} and out.hamming_mean == 0.0 and out.hamming_max == 0.0


def test_refine_counts_and_tie_break():
    g = cycle(4)
    out = refine(shots_of({"0011": 5, "1010": 3, "0101": 2}, 4), g)
    assert out.n_nonindependent == 5
    assert out.n_nonindependent + sum(c for _, c in out.feasible_sets) == 10
    # {0, 2} and {1, 3} tie at 2; the smaller member list wins
    assert out.best.sorted() == [0, 2]
    h = out.histogram()
    assert h["independent"] == 5 and h["refined_sampled"] == 5 and h["refined_augmented"] == 0


def test_refine_all_discarded_falls_back():
    g = complete(3)
    out = refine(shots_of({"000": 7}, 3), g)
    assert out.n_nonindependent == 7 and out.feasible_sets == []
    assert out.best == greedy_mwis(g).solution


def test_refine_properties_on_random_shots(rng):
    for _ in range(100):
        n = int(rng.integers(1, 9))
        g = random_graph(rng, n, rng.uniform(0.1, 0.8))
        counts = {}
        for _ in range(int(rng.integers(1, 20))):
            p = "".join(rng.choice(["0", "1"], n))
            counts[p] = counts.get(p, 0) + int(rng.integers(1, 5))
        ss = shots_of(counts, n)
        out = refine(ss, g)
        for s, _ in out.refined_sets:
            assert is_independent(g, s.members) and is_maximal(g, s.members)
        assert is_independent(g, out.best.members) and is_maximal(g, out.best.members)
        assert 0.0 <= out.hamming_mean <= out.hamming_max <= 1.0
        assert out.n_nonindependent + sum(c for _, c in out.feasible_sets) == ss.shots
        assert out.best.objective <= mwis_bruteforce(g).objective + 1e-9
        # adding an all-excluded shot puts the greedy answer among the candidates
        counts["1" * n] = counts.get("1" * n, 0) + 1
        assert refine(shots_of(counts, n), g).best.objective >= greedy_mwis(g).objective - 1e-9


def test_bootstrap_basics():
    g = path(3)
    ss = shots_of({"010": 100}, 3)
    assert bootstrap_objectives(ss, g, 100, 0, 0) == []
    vals = bootstrap_objectives(ss, g, 100, 20, 0)
    assert vals == [2.0] * 20
    with pytest.raises(ValueError):
        bootstrap_objectives(ss, g, 101, 1, 0)


def test_bootstrap_bounded_and_deterministic(rng):
    for _ in range(30):
        n = int(rng.integers(2, 7))
        g = random_graph(rng, n, 0.4)
        counts = {}
        for _ in range(8):
            p = "".join(rng.choice(["0", "1"], n))
            counts[p] = counts.get(p, 0) + int(rng.integers(1, 30))
        ss = shots_of(counts, n)
        top = refine(ss, g).best.objective
        vals = bootstrap_objectives(ss, g, min(50, ss.shots), 10, 5)
        assert len(vals) == 10 and max(vals) <= top + 1e-12
        assert vals == bootstrap_objectives(ss, g, min(50, ss.shots), 10, 5)


def test_ideal_blockade_has_no_violations():
    phys = PhysicsConfig()
    graphs = [path(4), cycle(5), WeightedGraph(6, [1, 2, 1, 2, 1, 2],
                                               [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)])]
    for k, g in enumerate(graphs):
        lay, rep, _ = embed(g, seed=k, cfg=DENConfig(epochs=500))
        assert rep.is_unit_disk
        ss = run_qaa(g, lay, phys, 300, k, ideal_blockade=True)
        assert refine(ss, g).n_nonindependent == 0


def test_triangle_run_best_is_three():
    g = WeightedGraph(3, [1, 1, 3], [(0, 1), (1, 2), (0, 2)])
    lay, _, _ = embed(g, seed=1, cfg=DENConfig(epochs=300))
    assert refine(run_qaa(g, lay, PhysicsConfig(), 300, 1), g).best.objective == 3.0


def test_outcome_json_shape():
    g = path(2)
    d = refine(shots_of({"01": 2, "11": 1}, 2), g).to_json()
    assert d["best"] == {"members": [0], "objective": 1.0}
    assert set(d["histogram"]) == {"independent", "non_independent", "raw_best", "refined_best",
                                   "refined_sampled", "refined_augmented"}
    # "11" decodes to the empty set and gains vertex 0: one flip in two
    assert np.isclose(d["hamming_max"], 0.5)
    assert np.isclose(d["hamming_mean"], 0.5 / 3)
