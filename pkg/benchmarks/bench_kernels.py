"""Compiled vs pure-Python timings for the two hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Both backends are loaded side by side (the dispatch module only picks one),
checked for identical results, then timed on the same inputs.
"""

from __future__ import annotations

import argparse
import json
import math
import time

import numpy as np

from stinopt import _pykernels
from stinopt.graph import WeightedGraph

try:
    from stinopt import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def random_graph(n: int, p: float, seed: int) -> WeightedGraph:
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return WeightedGraph(n, np.round(rng.uniform(0.1, 1.0, n), 3), edges)


def mwis_case(g: WeightedGraph):
    return list(g.weights), g.neighbor_masks(), 0, 0.0, math.inf


def hamiltonian_case(n: int, seed: int):
    rng = np.random.default_rng(seed)
    dim = 1 << n
    idx = np.arange(dim)
    pop = np.array([bin(k).count("1") for k in idx], dtype=float)
    f = rng.uniform(0, 1, n)
    wcount = np.array([sum(f[i] for i in range(n) if k >> i & 1) for k in idx])
    vdiag = rng.uniform(0, 50, dim) * (pop > 1)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    return psi, 3.1, -12.0, -4.0, pop, wcount, vdiag


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run(repeat: int = 5) -> list[dict]:
    mods = {"python": _pykernels}
    if _ckernels is not None:
        mods["cython"] = _ckernels
    rows = []
    for n, p in ((20, 0.2), (32, 0.15), (48, 0.1), (64, 0.08)):
        g = random_graph(n, p, seed=n)
        args = mwis_case(g)
        results = {k: m.mwis_bnb(*args)[:2] for k, m in mods.items()}
        ref = results["python"]
        agree = all(abs(r[1] - ref[1]) < 1e-9 for r in results.values())
        row = {"kernel": "mwis_bnb", "size": n, "agree": agree}
        for k, m in mods.items():
            row[k] = best_of(lambda m=m: m.mwis_bnb(*args), repeat)
        rows.append(row)
    for n in (8, 12, 14):
        psi, ho, dg, dl, pop, wc, vd = hamiltonian_case(n, seed=n)
        outs = {}
        for k, m in mods.items():
            out = np.empty_like(psi)
            m.apply_hamiltonian(psi, ho, dg, dl, pop, wc, vd, out)
            outs[k] = out
        agree = all(np.allclose(o, outs["python"], rtol=1e-12, atol=1e-12) for o in outs.values())
        row = {"kernel": "apply_hamiltonian", "size": n, "agree": agree}
        for k, m in mods.items():
            out = np.empty_like(psi)
            row[k] = best_of(lambda m=m, out=out: [m.apply_hamiltonian(psi, ho, dg, dl, pop, wc,
                                                                       vd, out)
                                                   for _ in range(20)], repeat) / 20
        rows.append(row)
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    rows = run(args.repeat)
    print(f"{'kernel':18s} {'size':>4s} {'python s':>11s} {'cython s':>11s} {'speedup':>8s} agree")
    for r in rows:
        c = r.get("cython")
        speed = f"{r['python'] / c:8.1f}" if c else "     n/a"
        cs = f"{c:11.2e}" if c else "        n/a"
        print(f"{r['kernel']:18s} {r['size']:4d} {r['python']:11.2e} {cs} {speed} {r['agree']}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)
    return 0 if all(r["agree"] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
