"""Acceptance criteria, one test per criterion.

Each test prints a single ``[criterion k] PASS|FAIL ...`` line (visible
without ``-s``) before asserting. Criteria 5 and 8 take several minutes and
carry the ``slow`` marker.
"""

import itertools
import math
import time

import numpy as np
import pytest

from stinopt.config import RunConfig
from stinopt.embedding import DENConfig, ELF, Layout, elf_loss, embed, hard_violations
from stinopt.embedding.elf import flatten
from stinopt.embedding import HardwareGeometry
from stinopt.graph import (BipartiteInstance, ColoringInstance, VertexSet, WeightedGraph,
                           is_independent, is_maximal)
from stinopt.instances import synth_suite
from stinopt.pipeline import bench, js_divergence, relative_improvement
from stinopt.postprocess import greedy_augment, refine
from stinopt.rydberg import (DUR_1, DUR_2, PhysicsConfig, PulseSchedule, ShotSet, Waveform,
                             build_qaa_schedule, evolve, local_factors, plan_qaa, run_qaa)
from stinopt.solvers.gsp import assignment_with_cap, gsp_bruteforce, gsp_solve
from stinopt.solvers.mwis import greedy_mwis, mwis_bruteforce, mwis_exact
from stinopt.solvers.result import INFEASIBLE
from stinopt.solvers.sap import bands_used, is_proper, sap_solve

from conftest import complete, cycle, ladder, path, random_graph

GEO = HardwareGeometry()


@pytest.fixture
def verdict(capsys):
    def report(k, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {k:2d}] {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return report


def random_graphs(seed, count=1000):
    rng = np.random.default_rng(seed)
    densities = np.linspace(0.1, 0.9, 9)
    return [random_graph(rng, int(rng.integers(1, 21)), densities[k % 9]) for k in range(count)]


@pytest.fixture(scope="module")
def graphs_1000():
    return random_graphs(2024)


# 1 ---------------------------------------------------------------------------

def test_mwis_oracle_equivalence(graphs_1000, verdict):
    t0 = time.perf_counter()
    bad = [k for k, g in enumerate(graphs_1000)
           if not math.isclose(mwis_exact(g, math.inf).objective,
                               mwis_bruteforce(g).objective, rel_tol=1e-12, abs_tol=1e-12)]
    dt = time.perf_counter() - t0
    verdict(1, not bad and dt < 120,
            f"mwis_exact vs brute force: {len(bad)} mismatches / 1000, {dt:.1f}s (< 120s)")


# 2 ---------------------------------------------------------------------------

def test_greedy_dominance_and_maximality(graphs_1000, verdict):
    bad = 0
    for g in graphs_1000:
        s = greedy_mwis(g).solution
        ok = (is_independent(g, s.members) and is_maximal(g, s.members)
              and s.objective <= mwis_bruteforce(g).objective + 1e-12)
        bad += not ok
    verdict(2, bad == 0, f"greedy independent, maximal, <= optimum: {bad} violations / 1000")


# 3 ---------------------------------------------------------------------------

def random_bipartite(rng):
    ns, ng = int(rng.integers(1, 9)), int(rng.integers(1, 6))
    links = set()
    for s in range(ns):
        seen = [g for g in range(ng) if rng.random() < 0.45]
        if not seen and rng.random() < 0.95:
            seen = [int(rng.integers(ng))]
        links |= {(s, g) for g in seen}
    return BipartiteInstance(ns, ng, frozenset(links))


def test_gsp_exactness(verdict):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    bad, infeasible = 0, 0
    for _ in range(500):
        inst = random_bipartite(rng)
        a, b = gsp_solve(inst), gsp_bruteforce(inst)
        if a.status == INFEASIBLE or b.status == INFEASIBLE:
            infeasible += 1
            bad += a.status != b.status
            continue
        m = int(a.objective)
        bad += (m != b.objective or assignment_with_cap(inst, m) is None
                or (m > 0 and assignment_with_cap(inst, m - 1) is not None))
    dt = time.perf_counter() - t0
    verdict(3, bad == 0 and dt < 60,
            f"gsp_solve vs brute force, M feasible / M-1 infeasible: {bad} mismatches / 500 "
            f"({infeasible} infeasible instances agreed), {dt:.1f}s (< 60s)")


# 4 ---------------------------------------------------------------------------

PETERSEN = WeightedGraph(10, [1] * 10, [(i, (i + 1) % 5) for i in range(5)]
                         + [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
                         + [(i, i + 5) for i in range(5)])


def chromatic_number(g):
    """Smallest k with a cover of V by k independent sets, by inclusion-exclusion
    over vertex subsets (counts are exact Python integers)."""
    n = g.n
    if n == 0:
        return 0
    nbr = [0] * n
    for i, j in g.edges:
        nbr[i] |= 1 << j
        nbr[j] |= 1 << i
    ind = [1] * (1 << n)           # independent subsets of S, including the empty set
    for mask in range(1, 1 << n):
        v = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << v)
        ind[mask] = ind[rest] + ind[rest & ~nbr[v]]
    sign = [(-1) ** (n - bin(m).count("1")) for m in range(1 << n)]
    for k in range(1, n + 1):
        if sum(sg * c ** k for sg, c in zip(sign, ind)) > 0:
            return k
    return n


def test_sap_correctness(verdict):
    rng = np.random.default_rng(4)
    cases = [(cycle(5), 3), (PETERSEN, 3), (complete(4), 4)]
    for _ in range(200):
        n = int(rng.integers(1, 13))
        g = random_graph(rng, n, rng.uniform(0.1, 0.7))
        cases.append((g, None))
    t_oracle = 0.0
    t0 = time.perf_counter()
    bad = 0
    for g, known in cases:
        t1 = time.perf_counter()
        chi = known if known is not None else chromatic_number(g)
        t_oracle += time.perf_counter() - t1
        inst = ColoringInstance(g.n, g.edges, tuple(range(max(g.n, 1))))
        r = sap_solve(inst, "exact", math.inf)
        d = sap_solve(inst, "dsatur")
        bad += (bands_used(r.solution) != chi or not is_proper(inst, r.solution)
                or not is_proper(inst, d.solution))
    dt = time.perf_counter() - t0 - t_oracle
    verdict(4, bad == 0 and dt < 60,
            f"SAP bands = chromatic number on C5, Petersen, K4 + 200 random; DSATUR proper: "
            f"{bad} failures, solver time {dt:.1f}s (< 60s)")


# 5 ---------------------------------------------------------------------------

EMBED_GRAPHS = {"P4": path(4), "P7": path(7), "P10": path(10), "C4": cycle(4), "C7": cycle(7),
                "C10": cycle(10), "2x2": ladder(2), "2x3": ladder(3), "2x5": ladder(5)}


@pytest.mark.slow
def test_embedding_feasibility(verdict):
    t0 = time.perf_counter()
    illegal, worst_ud = 0, 1.0
    worst = ""
    for name, g in EMBED_GRAPHS.items():
        ud = 0
        for seed in range(20):
            lay, rep, _ = embed(g, seed=seed)
            illegal += bool(hard_violations(lay.coords, GEO)) or bool(rep.constraint_violations)
            ud += rep.is_unit_disk
        if ud / 20 < worst_ud:
            worst_ud, worst = ud / 20, name
    dt = time.perf_counter() - t0
    verdict(5, illegal == 0 and worst_ud >= 0.9 and dt <= 600,
            f"embedding over 9 graphs x 20 seeds: {illegal} constraint violations, lowest "
            f"unit-disk rate {worst_ud:.0%} ({worst}), {dt:.0f}s (<= 600s)")


# 6 ---------------------------------------------------------------------------

def test_elf_analytics(verdict):
    k2 = WeightedGraph(2, [1, 1], [(0, 1)])
    e2 = WeightedGraph(2, [1, 1])
    exact = (elf_loss(Layout([[0, 0], [3, 0]]), k2)[1]["L_min"] == 7.0
             and elf_loss(Layout([[0, 0], [20, 2]]), e2)[1]["L_row"] == 0.0
             and elf_loss(Layout([[0, 0], [20, 1]]), e2)[1]["L_row"] == 3.0)
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 10))
        g = random_graph(rng, n, 0.4)
        loss = ELF(g, GEO)
        x = flatten(rng.uniform(0, 40, (n, 2)))
        _, _, grad = loss(x, grad=True)
        fd = np.empty_like(x)
        h = 1e-5
        for k in range(x.size):
            e = np.zeros_like(x)
            e[k] = h
            fd[k] = (loss(x + e)[0] - loss(x - e)[0]) / (2 * h)
        worst = max(worst, float(np.abs(fd - grad).max() / max(np.abs(grad).max(), 1.0)))
    verdict(6, exact and worst < 1e-4,
            f"ELF hand values exact={exact}; worst gradient vs central FD rel. error "
            f"{worst:.1e} on 50 layouts (< 1e-4)")


# 7 ---------------------------------------------------------------------------

def test_simulator_physics(verdict):
    phys = PhysicsConfig()
    drifts = []
    # Rabi flop
    om, rabi_err = 2.0, 0.0
    for t in (0.3, 0.8, 1.6, 2.7):
        eps = 1e-9
        s = PulseSchedule(Waveform((0, eps, t - eps, t), (0, om, om, 0)),
                          Waveform((0, t), (0, 0)), Waveform((0, t), (0, 0)), (0.0,))
        st = {}
        psi = evolve(Layout([[0, 0]]), s, phys, stats=st)
        drifts.append(st["norm_drift"])
        rabi_err = max(rabi_err, abs(abs(psi[1]) ** 2 - math.sin(om * t / 2) ** 2))
    # blockade at 4 um under the annealing schedule
    plan = plan_qaa(complete(2), Layout([[0, 0], [4, 0]]), phys)
    st = {}
    p11 = abs(evolve(plan.layout, plan.schedule, phys, stats=st)[3]) ** 2
    drifts.append(st["norm_drift"])
    # tolerance halving on three qubits
    g = WeightedGraph(3, [1, 2, 1.5], [(0, 1), (1, 2)])
    lay = Layout([[0, 0], [6, 0], [12, 0]])
    states = []
    for tol in (1e-8, 5e-9):
        ph = PhysicsConfig(integrator_tol=tol)
        pl = plan_qaa(g, lay, ph)
        st = {}
        states.append(evolve(pl.layout, pl.schedule, ph, stats=st))
        drifts.append(st["norm_drift"])
    halving = 1 - abs(np.vdot(states[0], states[1])) ** 2
    shift = float(np.linalg.norm(states[0] - states[1]))
    # plus a batch of full annealing runs
    rng = np.random.default_rng(7)
    for k in range(10):
        g = random_graph(rng, int(rng.integers(2, 8)), 0.4, 0.5, 2.0, 2)
        lay, _, _ = embed(g, seed=k, cfg=DENConfig(epochs=300))
        drifts.append(run_qaa(g, lay, phys, 50, k).info["norm_drift"])
    ok = max(drifts) <= 1e-6 and rabi_err < 1e-4 and p11 < 0.05 and halving < 1e-6
    verdict(7, ok, f"norm drift max {max(drifts):.1e} (<= 1e-6) over {len(drifts)} runs; Rabi "
                   f"error {rabi_err:.1e} (< 1e-4); P(11) at 4um {p11:.1e} (< 0.05); "
                   f"tolerance-halving infidelity {halving:.1e} (< 1e-6, state shift {shift:.1e})")


# 8 ---------------------------------------------------------------------------

def random_udg(rng):
    n = int(rng.integers(3, 11))
    while True:
        pts = rng.uniform(0, 1, (n, 2)) * math.sqrt(n) * 0.9
        edges = [(i, j) for i, j in itertools.combinations(range(n), 2)
                 if np.hypot(*(pts[i] - pts[j])) < 1]
        if edges:
            return WeightedGraph(n, rng.uniform(0.5, 2, n).round(2), edges)


@pytest.mark.slow
def test_quantum_pipeline(verdict):
    rng = np.random.default_rng(0)
    phys = PhysicsConfig()
    t0 = time.perf_counter()
    hits = infeasible = above_exact = 0
    for k in range(50):
        g = random_udg(rng)
        lay, _, _ = embed(g, seed=k)
        best = refine(run_qaa(g, lay, phys, 300, k), g).best
        infeasible += not is_independent(g, best.members)
        hits += abs(best.objective - mwis_bruteforce(g).objective) < 1e-9
        above_exact += best.objective > mwis_exact(g, math.inf).objective + 1e-12
    dt = time.perf_counter() - t0
    verdict(8, hits >= 45 and infeasible == 0 and above_exact == 0 and dt <= 900,
            f"simulated annealing + refinement hit the optimum on {hits}/50 (>= 45); "
            f"{infeasible} infeasible; {above_exact} above exact; {dt:.0f}s (<= 900s)")


# 9 ---------------------------------------------------------------------------

def test_postprocess_identities(graphs_1000, verdict):
    rng = np.random.default_rng(9)
    aug_bad = set_bad = ham_bad = 0
    for g in graphs_1000:
        aug_bad += greedy_augment(VertexSet.of(g, ()), g) != greedy_mwis(g).solution
        counts = {}
        for _ in range(10):
            p = "".join(rng.choice(["0", "1"], g.n, p=[0.3, 0.7]))
            counts[p] = counts.get(p, 0) + 1
        out = refine(ShotSet(counts, 10, 0, g.n), g)
        set_bad += not all(is_independent(g, s.members) and is_maximal(g, s.members)
                           for s, _ in out.refined_sets)
        ham_bad += not (0.0 <= out.hamming_mean <= 1.0 and 0.0 <= out.hamming_max <= 1.0)
    verdict(9, aug_bad == set_bad == ham_bad == 0,
            f"augment(empty) != greedy on {aug_bad}/1000; refined sets not independent+maximal "
            f"on {set_bad}; Hamming outside [0,1] on {ham_bad}")


# 10 --------------------------------------------------------------------------

def test_schedule_arithmetic(verdict):
    sums = sum(DUR_1) == 3.0 and sum(DUR_2) == 3.0
    equal = all(f == 0.0 for f in local_factors([1.3] * 5))
    rng = np.random.default_rng(10)
    monotone = True
    for _ in range(200):
        w = rng.uniform(0.1, 3.0, 6)
        s = build_qaa_schedule(WeightedGraph(6, w), 8.0)
        det = s.local_detunings(s.total)[np.argsort(w)]
        monotone &= bool(np.all(np.diff(det) >= 0))
    verdict(10, sums and equal and monotone,
            f"durations sum to 3.0 exactly: {sums}; equal weights -> zero factors: {equal}; "
            f"weight order -> detuning order on 200 draws: {monotone}")


# 11 --------------------------------------------------------------------------

def test_metrics(verdict):
    p = [0.1, 0.2, 0.7]
    same = js_divergence(p, p)
    disjoint = js_divergence([0.5, 0.5, 0, 0], [0, 0, 0.25, 0.75])
    imp = relative_improvement(16.50, 16.22)
    ok = same == 0.0 and abs(disjoint - math.log(2)) <= 1e-12 and abs(imp - 0.01726) <= 1e-5
    verdict(11, ok, f"JS(p,p) = {same}; JS(disjoint) - ln2 = {disjoint - math.log(2):.1e}; "
                    f"relative_improvement(16.50, 16.22) = {imp:.6f}")


# 12 --------------------------------------------------------------------------

def test_bench_determinism(tmp_path, verdict):
    cfg = RunConfig(shots=300, den_epochs=1000)
    suite = synth_suite(12, 3, (4, 7))
    files = []
    for k in range(2):
        bench(suite, cfg, seed=12, out_dir=tmp_path / f"run{k}")
        files.append({p.name: p.read_bytes() for p in sorted((tmp_path / f"run{k}").glob("*.csv"))})
    same = files[0] == files[1] and len(files[0]) == 4
    verdict(12, same, f"two bench runs with seed 12 over {len(suite)} instances: "
                      f"{len(files[0])} CSVs byte-identical={same}")
