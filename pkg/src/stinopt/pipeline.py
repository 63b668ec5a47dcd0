"""SSP -> GSP -> SAP chains, three-way comparison reports and the benchmark
harness."""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import xlogy

from .config import RunConfig
from .embedding import DENConfig, embed
from .graph import VertexSet, is_independent
from .instances import InstanceTriple, build_sap_instance, restrict_gsp
from .postprocess import bootstrap_objectives, refine
from .rydberg import SizeError, run_qaa
from .seeds import derive_seed
from .solvers.gsp import gsp_solve, is_valid_assignment, max_load
from .solvers.mwis import greedy_mwis, mwis_exact
from .solvers.result import INFEASIBLE, OPTIMAL, SolveResult
from .solvers.sap import bands_used, coloring_cost, is_proper, sap_solve

SOLVERS = ("qaa", "exact", "greedy")


class PipelineSizeError(SizeError):
    pass


def relative_improvement(a: float, b: float) -> float:
    """(a - b) / b for a baseline b > 0."""
    if not b > 0:
        raise ValueError("relative improvement needs a positive baseline")
    return (a - b) / b


def js_divergence(p, q, tol: float = 1e-9) -> float:
    """Jensen-Shannon divergence in nats between two distributions on a
    common support."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError("distributions must be 1-D on the same support")
    for name, x in (("p", p), ("q", q)):
        if (x < 0).any() or abs(x.sum() - 1.0) > tol:
            raise ValueError(f"{name} is not a normalised distribution")
    m = (p + q) / 2.0
    kl_p = np.sum(xlogy(p, p) - xlogy(p, m))
    kl_q = np.sum(xlogy(q, q) - xlogy(q, m))
    return float(min(max(0.5 * kl_p + 0.5 * kl_q, 0.0), math.log(2.0)))


def integer_histograms(a, b) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Normalised histograms of two integer samples over their joint support."""
    ca, cb = Counter(int(x) for x in a), Counter(int(x) for x in b)
    support = sorted(set(ca) | set(cb))
    pa = np.array([ca[v] for v in support], dtype=float)
    pb = np.array([cb[v] for v in support], dtype=float)
    return support, pa / max(pa.sum(), 1), pb / max(pb.sum(), 1)


# -- one chain ----------------------------------------------------------------

@dataclass
class ChainResult:
    solver: str
    ssp_objective: float
    ssp_status: str
    ssp_solution: list
    ssp_elapsed: float
    gsp_objective: int | None
    gsp_status: str
    gsp_assignment: dict
    sap_objective: float | None
    sap_bands: int | None
    sap_status: str
    sap_coloring: dict
    sap_paths: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    qaa: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["gsp_assignment"] = {str(k): v for k, v in sorted(self.gsp_assignment.items())}
        d["sap_coloring"] = {str(k): v for k, v in sorted(self.sap_coloring.items())}
        return d


def _solve_ssp(triple: InstanceTriple, solver: str, cfg: RunConfig, seed: int,
               out: Path | None):
    g = triple.ssp
    extras: dict = {}
    if solver == "exact":
        return mwis_exact(g, cfg.exact_budget), extras
    if solver == "greedy":
        return greedy_mwis(g), extras
    if solver != "qaa":
        raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}")
    if g.n > cfg.physics.max_qubits:
        raise PipelineSizeError(
            f"SSP graph has {g.n} vertices, above the simulator limit of "
            f"{cfg.physics.max_qubits}; use the exact or greedy solver")
    if g.n == 0:
        return SolveResult(VertexSet(frozenset(), 0.0), 0.0, OPTIMAL, 0.0), extras
    t0 = time.perf_counter()
    layout, report, _ = embed(g, seed=derive_seed(seed, triple.id, "embed"), geo=cfg.geometry,
                              cfg=DENConfig(epochs=cfg.den_epochs))
    shots = run_qaa(g, layout, cfg.physics, cfg.shots, derive_seed(seed, triple.id, "shots"),
                    cfg.geometry, ideal_blockade=cfg.ideal_blockade)
    outcome = refine(shots, g)
    boots = bootstrap_objectives(shots, g, min(cfg.bootstrap_subsample, cfg.shots),
                                 cfg.bootstrap_reps, derive_seed(seed, triple.id, "bootstrap"))
    elapsed = time.perf_counter() - t0
    extras = {
        "embedding": report.to_json(),
        "r_b": shots.info.get("r_b"),
        "omega": shots.info.get("omega"),
        "layout_scale": shots.info.get("layout_scale"),
        "n_nonindependent": outcome.n_nonindependent,
        "hamming_mean": outcome.hamming_mean,
        "hamming_max": outcome.hamming_max,
        "histogram": outcome.histogram(),
        "bootstrap": {"subsample": min(cfg.bootstrap_subsample, cfg.shots),
                      "reps": cfg.bootstrap_reps, "mean": float(np.mean(boots)),
                      "std": float(np.std(boots)), "min": float(np.min(boots)),
                      "max": float(np.max(boots)), "values": boots},
    }
    if out is not None:
        layout.save(out / "layout.json", cfg.geometry)
        shots.save(out / "shots.json")
        (out / "refinement.json").write_text(json.dumps(outcome.to_json(), indent=1) + "\n")
    best = outcome.best
    return SolveResult(best, best.objective, "feasible", elapsed), extras


def run_chain(triple: InstanceTriple, solver: str, cfg: RunConfig | None = None,
              seed: int = 0, out_dir=None) -> ChainResult:
    """Solve the SSP with ``solver`` and feed its selection downstream."""
    cfg = cfg or RunConfig()
    out = None
    if out_dir is not None:
        out = Path(out_dir) / triple.id / solver
        out.mkdir(parents=True, exist_ok=True)
    ssp, extras = _solve_ssp(triple, solver, cfg, seed, out)
    selected: VertexSet = ssp.solution
    gsp_inst = restrict_gsp(triple.gsp, selected)
    gsp = gsp_solve(gsp_inst)
    warn = list(gsp_inst.warnings)
    sap_obj = sap_bands = None
    sap_status, coloring, labels = "skipped", {}, []
    if gsp.status != INFEASIBLE:
        # restrict_gsp renumbers satellites; route with original SSP indices
        order = selected.sorted()
        assign = {order[k]: g for k, g in gsp.solution.items()}
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            sap_inst = build_sap_instance(assign, triple.network)
        warn += [str(c.message) for c in caught]
        sap = sap_solve(sap_inst, "exact", cfg.sap_budget)
        sap_status = sap.status
        labels = list(sap_inst.path_labels or ())
        if sap.status != INFEASIBLE:
            sap_obj, coloring = sap.objective, dict(sap.solution)
            sap_bands = bands_used(coloring)
    result = ChainResult(
        solver=solver, ssp_objective=ssp.objective, ssp_status=ssp.status,
        ssp_solution=selected.sorted(), ssp_elapsed=ssp.elapsed,
        gsp_objective=None if gsp.status == INFEASIBLE else int(gsp.objective),
        gsp_status=gsp.status,
        gsp_assignment={} if gsp.status == INFEASIBLE else dict(gsp.solution),
        sap_objective=sap_obj, sap_bands=sap_bands, sap_status=sap_status,
        sap_coloring=coloring, sap_paths=labels, warnings=warn, qaa=extras)
    if out is not None:
        (out / "chain.json").write_text(json.dumps(result.to_json(), indent=1) + "\n")
    return result


def verify_chain(triple: InstanceTriple, chain: ChainResult) -> list[str]:
    """Re-derive every stored objective from the stored solutions."""
    problems = []
    g = triple.ssp
    sel = VertexSet.of(g, chain.ssp_solution)
    if not is_independent(g, sel.members):
        problems.append("SSP solution is not independent")
    if not math.isclose(sel.objective, chain.ssp_objective, rel_tol=1e-12, abs_tol=1e-12):
        problems.append("SSP objective does not match its solution")
    gsp_inst = restrict_gsp(triple.gsp, sel)
    if chain.gsp_objective is not None:
        a = {int(k): int(v) for k, v in chain.gsp_assignment.items()}
        if not is_valid_assignment(gsp_inst, a) or max_load(a) != chain.gsp_objective:
            problems.append("GSP assignment invalid or M mismatch")
        order = sel.sorted()
        sap_inst = build_sap_instance({order[k]: v for k, v in a.items()}, triple.network)
        if chain.sap_objective is not None:
            c = {int(k): int(v) for k, v in chain.sap_coloring.items()}
            if not is_proper(sap_inst, c) or not math.isclose(
                    coloring_cost(sap_inst, c), chain.sap_objective):
                problems.append("SAP colouring improper or cost mismatch")
    return problems


# -- three-way report ---------------------------------------------------------

@dataclass
class PipelineReport:
    instance_id: str
    n: int
    chains: dict
    improvements: dict
    failures: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"instance_id": self.instance_id, "n": self.n,
                "chains": {k: v.to_json() for k, v in self.chains.items()},
                "improvements": self.improvements, "failures": self.failures}


def _improvements(chains: dict) -> dict:
    out = {}
    for a, b in (("qaa", "greedy"), ("qaa", "exact"), ("exact", "greedy")):
        if a in chains and b in chains:
            oa, ob = chains[a].ssp_objective, chains[b].ssp_objective
            out[f"{a}_vs_{b}"] = 0.0 if oa == ob else (
                relative_improvement(oa, ob) if ob > 0 else math.inf)
    return out


def run_pipeline(triple: InstanceTriple, solvers=SOLVERS, cfg: RunConfig | None = None,
                 seed: int = 0, out_dir=None) -> PipelineReport:
    """Run one chain per solver; a failing chain is recorded, not raised,
    when several solvers are requested."""
    cfg = cfg or RunConfig()
    if isinstance(solvers, str):
        solvers = (solvers,)
    chains, failures = {}, {}
    for s in solvers:
        try:
            chains[s] = run_chain(triple, s, cfg, seed, out_dir)
        except Exception as exc:  # noqa: BLE001 - recorded per chain
            if len(solvers) == 1:
                raise
            failures[s] = f"{type(exc).__name__}: {exc}"
    report = PipelineReport(triple.id, triple.ssp.n, chains, _improvements(chains), failures)
    if out_dir is not None:
        path = Path(out_dir) / triple.id
        path.mkdir(parents=True, exist_ok=True)
        (path / "report.json").write_text(json.dumps(report.to_json(), indent=1) + "\n")
    return report


# -- benchmark ----------------------------------------------------------------

CSV_COLUMNS = [
    "id", "n", "obj_qaa", "obj_exact", "obj_greedy", "imp_qaa_vs_greedy", "imp_qaa_vs_exact",
    "imp_exact_vs_greedy", "M_qaa", "M_exact", "bands_qaa", "bands_exact",
    "hamming_mean", "hamming_max", "n_nonindependent", "status",
]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(round(x, 12))
    return str(x)


def _row(rep: PipelineReport) -> dict:
    c = rep.chains
    q = c.get("qaa")
    get = lambda s, attr: getattr(c[s], attr) if s in c else None  # noqa: E731
    return {
        "id": rep.instance_id, "n": rep.n,
        "obj_qaa": get("qaa", "ssp_objective"), "obj_exact": get("exact", "ssp_objective"),
        "obj_greedy": get("greedy", "ssp_objective"),
        "imp_qaa_vs_greedy": rep.improvements.get("qaa_vs_greedy"),
        "imp_qaa_vs_exact": rep.improvements.get("qaa_vs_exact"),
        "imp_exact_vs_greedy": rep.improvements.get("exact_vs_greedy"),
        "M_qaa": get("qaa", "gsp_objective"), "M_exact": get("exact", "gsp_objective"),
        "bands_qaa": get("qaa", "sap_bands"), "bands_exact": get("exact", "sap_bands"),
        "hamming_mean": q.qaa.get("hamming_mean") if q else None,
        "hamming_max": q.qaa.get("hamming_max") if q else None,
        "n_nonindependent": q.qaa.get("n_nonindependent") if q else None,
        "status": "ok" if not rep.failures else ";".join(f"{k}:{v}" for k, v in
                                                         sorted(rep.failures.items())),
    }


def _write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    path.write_text(buf.getvalue())


def _bench_one(args):
    triple_json, cfg_json, seed, out_dir = args
    triple = InstanceTriple.from_json(triple_json)
    cfg = RunConfig.from_dict(cfg_json)
    try:
        return run_pipeline(triple, SOLVERS, cfg, seed, out_dir)
    except Exception as exc:  # noqa: BLE001 - the run continues
        return PipelineReport(triple.id, triple.ssp.n, {}, {}, {"all": f"{exc}"})


def bench(suite: list[InstanceTriple], cfg: RunConfig | None = None, seed: int = 0,
          out_dir=None) -> dict:
    """Three-way comparison over a suite; writes CSV tables and a summary.

    CSVs carry no timings so reruns with the same seeds are byte-identical.
    """
    cfg = cfg or RunConfig()
    jobs = [(t.to_json(), cfg.to_dict(), seed, None if out_dir is None else str(out_dir))
            for t in suite]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(_bench_one, jobs))
    else:
        reports = [_bench_one(j) for j in jobs]
    rows = [_row(r) for r in reports]

    def mean(key):
        vals = [r[key] for r in rows if r[key] is not None and math.isfinite(r[key])]
        return float(np.mean(vals)) if vals else None

    ok = [r for r in reports if {"qaa", "exact"} <= set(r.chains)]
    m_q = [r.chains["qaa"].gsp_objective for r in ok if r.chains["qaa"].gsp_objective is not None
           and r.chains["exact"].gsp_objective is not None]
    m_e = [r.chains["exact"].gsp_objective for r in ok if r.chains["qaa"].gsp_objective
           is not None and r.chains["exact"].gsp_objective is not None]
    b_q = [r.chains["qaa"].sap_bands for r in ok if r.chains["qaa"].sap_bands is not None
           and r.chains["exact"].sap_bands is not None]
    b_e = [r.chains["exact"].sap_bands for r in ok if r.chains["qaa"].sap_bands is not None
           and r.chains["exact"].sap_bands is not None]
    div = {}
    dists = []
    for stage, a, b in (("gsp_M", m_q, m_e), ("sap_bands", b_q, b_e)):
        if a:
            support, pa, pb = integer_histograms(a, b)
            div[stage] = js_divergence(pa, pb)
            dists += [{"stage": stage, "value": v, "p_qaa": x, "p_exact": y}
                      for v, x, y in zip(support, pa, pb)]
        else:
            div[stage] = None
    differ = [r for r in ok if r.chains["qaa"].ssp_solution != r.chains["exact"].ssp_solution]
    affecting = [r for r in differ
                 if not math.isclose(r.chains["qaa"].ssp_objective,
                                     r.chains["exact"].ssp_objective, rel_tol=1e-12)]
    summary = {
        "instances": len(reports),
        "seed": seed,
        "mean_improvement": {k: mean(f"imp_{k}") for k in
                             ("qaa_vs_greedy", "qaa_vs_exact", "exact_vs_greedy")},
        "js_divergence": div,
        "differing_ssp_solutions": {"total": len(differ), "affecting_objective": len(affecting),
                                    "same_objective": len(differ) - len(affecting)},
        "failures": {r.instance_id: r.failures for r in reports if r.failures},
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "bench.csv", CSV_COLUMNS, rows)
        _write_csv(out / "fig_improvement.csv",
                   ["id", "n", "imp_qaa_vs_greedy", "imp_qaa_vs_exact", "imp_exact_vs_greedy"],
                   rows)
        _write_csv(out / "fig_nonindependent.csv",
                   ["id", "n", "n_nonindependent", "hamming_mean", "hamming_max"], rows)
        _write_csv(out / "fig_distributions.csv", ["stage", "value", "p_qaa", "p_exact"], dists)
        (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    summary["reports"] = reports
    summary["rows"] = rows
    return summary
