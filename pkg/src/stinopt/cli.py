"""Command-line entry point: ``stinopt <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from .config import ConfigError, RunConfig
from .embedding import DENConfig, Layout, RefinementError, embed
from .graph import (BipartiteInstance, ColoringInstance, InstanceError, WeightedGraph,
                    read_instance)
from .instances import (InstanceTriple, Region, TLEError, parse_tle, read_sites, synth_suite,
                        triple_from_sources)
from .postprocess import refine
from .rydberg import SizeError, run_qaa
from .seeds import derive_seed
from .solvers.gsp import gsp_bruteforce, gsp_solve
from .solvers.mwis import greedy_mwis, mwis_bruteforce, mwis_exact
from .solvers.sap import sap_solve

log = logging.getLogger("stinopt")


def _dump(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1) + "\n")


def _time(text: str) -> datetime:
    t = datetime.fromisoformat(text.replace("Z", "+00:00"))
    return t if t.tzinfo else t.replace(tzinfo=timezone.utc)


def _load_any(path: str):
    """A bare instance file or an instance triple."""
    d = json.loads(Path(path).read_text())
    if "ssp" in d and "gsp" in d:
        return InstanceTriple.from_json(d)
    return read_instance(path)


def _ssp_of(path: str) -> tuple[str, WeightedGraph]:
    obj = _load_any(path)
    if isinstance(obj, InstanceTriple):
        return obj.id, obj.ssp
    if not isinstance(obj, WeightedGraph):
        raise InstanceError(f"{path} does not hold an SSP graph")
    return Path(path).stem, obj


# -- subcommands --------------------------------------------------------------

def cmd_generate(args, cfg: RunConfig) -> int:
    out = Path(args.out_dir) / "instances"
    out.mkdir(parents=True, exist_ok=True)
    if args.tle:
        if not (args.region and args.sites and args.start and args.end):
            raise SystemExit("generate from TLEs needs --region, --sites, --start and --end")
        records = parse_tle(Path(args.tle).read_text())
        region = Region.load(args.region, seed=derive_seed(args.seed, "region"))
        triple = triple_from_sources(records, region, read_sites(args.sites), _time(args.start),
                                     _time(args.end), args.step, args.half_angle,
                                     backhaul_km=args.backhaul_km, bands=args.bands,
                                     ident=args.id or region.name)
        triples = [triple]
    else:
        count = args.count if args.count is not None else cfg.suite_count
        sizes = (args.n_min or cfg.suite_sizes[0], args.n_max or cfg.suite_sizes[1])
        triples = synth_suite(args.seed, count, sizes)
    for t in triples:
        t.save(out / f"{t.id}.json")
        print(f"{t.id}: n={t.ssp.n} edges={len(t.ssp.edges)} gateways={t.gsp.n_gateways} "
              f"base_stations={t.network.n_base_stations}")
    return 0


def cmd_embed(args, cfg: RunConfig) -> int:
    ident, g = _ssp_of(args.instance)
    epochs = cfg.den_epochs if args.epochs is None else args.epochs
    layout, report, trace = embed(g, seed=derive_seed(args.seed, ident, "embed"),
                                  geo=cfg.geometry, cfg=DENConfig(epochs=epochs))
    out = Path(args.out_dir) / ident
    lpath = Path(args.out) if args.out else out / "layout.json"
    lpath.parent.mkdir(parents=True, exist_ok=True)
    layout.save(lpath, cfg.geometry)
    _dump(Path(args.report) if args.report else out / "embedding.json",
          {**report.to_json(), "epochs_run": len(trace)})
    print(f"{ident}: unit_disk={report.is_unit_disk} gap={report.gap:.3f} um "
          f"violations={len(report.constraint_violations)}")
    return 0 if not report.constraint_violations else 1


def cmd_solve(args, cfg: RunConfig) -> int:
    obj = _load_any(args.instance)
    if isinstance(obj, InstanceTriple):
        obj = obj.ssp
    budget = math.inf if args.budget == "inf" else float(args.budget or cfg.exact_budget)
    if isinstance(obj, WeightedGraph):
        fn = {"exact": lambda g: mwis_exact(g, budget), "greedy": greedy_mwis,
              "bruteforce": mwis_bruteforce}.get(args.solver)
    elif isinstance(obj, BipartiteInstance):
        fn = {"exact": gsp_solve, "bruteforce": gsp_bruteforce}.get(args.solver)
    elif isinstance(obj, ColoringInstance):
        fn = {"exact": lambda c: sap_solve(c, "exact", budget),
              "dsatur": lambda c: sap_solve(c, "dsatur")}.get(args.solver)
    else:
        fn = None
    if fn is None:
        raise SystemExit(f"solver {args.solver!r} does not apply to this instance kind")
    res = fn(obj)
    out = Path(args.out_dir) / f"{Path(args.instance).stem}.{args.solver}.json"
    _dump(out, res.to_json())
    print(f"objective={res.objective} status={res.status} elapsed={res.elapsed:.3f}s")
    return 0 if res.feasible else 1


def cmd_simulate(args, cfg: RunConfig) -> int:
    ident, g = _ssp_of(args.instance)
    if args.layout:
        layout, geo = Layout.load(args.layout)
        geo = geo or cfg.geometry
    else:
        layout, _, _ = embed(g, seed=derive_seed(args.seed, ident, "embed"), geo=cfg.geometry,
                             cfg=DENConfig(epochs=cfg.den_epochs))
        geo = cfg.geometry
    shots = args.shots or cfg.shots
    result = run_qaa(g, layout, cfg.physics, shots, derive_seed(args.seed, ident, "shots"), geo,
                     ideal_blockade=cfg.ideal_blockade)
    outcome = refine(result, g)
    out = Path(args.out_dir) / ident
    out.mkdir(parents=True, exist_ok=True)
    result.save(out / "shots.json")
    _dump(out / "refinement.json", outcome.to_json())
    print(f"{ident}: best={outcome.best.objective:.6g} set={outcome.best.sorted()} "
          f"non_independent={outcome.n_nonindependent}/{shots}")
    return 0


def cmd_pipeline(args, cfg: RunConfig) -> int:
    from .pipeline import SOLVERS, run_pipeline
    triple = InstanceTriple.load(args.instance)
    solvers = SOLVERS if args.solver == "all" else (args.solver,)
    rep = run_pipeline(triple, solvers, cfg, args.seed, args.out_dir)
    for name, c in rep.chains.items():
        print(f"{name:7s} ssp={c.ssp_objective:.6g} M={c.gsp_objective} bands={c.sap_bands}")
    for name, msg in rep.failures.items():
        print(f"{name:7s} FAILED {msg}")
    return 0 if not rep.failures else 1


def cmd_bench(args, cfg: RunConfig) -> int:
    from .pipeline import bench
    if args.suite:
        paths = sorted(Path(args.suite).glob("*.json")) if Path(args.suite).is_dir() \
            else [Path(args.suite)]
        suite = [InstanceTriple.load(p) for p in paths]
    else:
        count = args.count if args.count is not None else cfg.suite_count
        suite = synth_suite(args.seed, count, cfg.suite_sizes)
    if args.workers:
        cfg = RunConfig.from_dict({**cfg.to_dict(), "workers": args.workers})
    summary = bench(suite, cfg, args.seed, args.out_dir)
    print(json.dumps({k: v for k, v in summary.items() if k not in ("reports", "rows")},
                     indent=1, sort_keys=True))
    return 0 if not summary["failures"] else 1


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stinopt",
                                description="Satellite/terrestrial network optimisation with "
                                            "classical and simulated neutral-atom solvers.")
    p.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    p.add_argument("--out-dir", default="out", help="output directory (default ./out)")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("-v", "--verbose", action="store_true")
    # the global flags are also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out-dir", default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    def add_instance(parser):
        parser.add_argument("instance", nargs="?")
        parser.add_argument("--instance", dest="instance_opt", metavar="PATH")

    g = add("generate", help="write instance triples")
    g.add_argument("--count", type=int)
    g.add_argument("--n-min", type=int)
    g.add_argument("--n-max", type=int)
    g.add_argument("--tle", help="TLE file; switches to orbital generation")
    g.add_argument("--region", help="region JSON (boundary, covered)")
    g.add_argument("--sites", help="CSV of ground sites (name,lat,lon,kind)")
    g.add_argument("--start", help="window start, ISO 8601 (UTC)")
    g.add_argument("--end", help="window end, ISO 8601 (UTC)")
    g.add_argument("--step", type=float, default=10.0, help="sample step in seconds")
    g.add_argument("--half-angle", type=float, default=40.0, help="antenna half-angle, deg")
    g.add_argument("--backhaul-km", type=float, default=500.0,
                   help="ground sites closer than this share a terrestrial link")
    g.add_argument("--bands", type=int, default=8, help="spectrum bands available")
    g.add_argument("--id")
    g.set_defaults(func=cmd_generate)

    e = add("embed", help="place an SSP graph on the atom register")
    add_instance(e)
    e.add_argument("--epochs", type=int, help="DEN epoch cap (overrides the config)")
    e.add_argument("--out", help="layout JSON path")
    e.add_argument("--report", help="embedding report JSON path")
    e.set_defaults(func=cmd_embed)

    s = add("solve", help="solve a single SSP, GSP or SAP instance")
    add_instance(s)
    s.add_argument("--solver", default="exact",
                   choices=["exact", "greedy", "bruteforce", "dsatur"])
    s.add_argument("--budget", help="seconds, or 'inf'")
    s.set_defaults(func=cmd_solve)

    m = add("simulate", help="simulate the annealing run and refine shots")
    add_instance(m)
    m.add_argument("--layout", help="layout JSON from 'embed'; embeds afresh if omitted")
    m.add_argument("--shots", type=int)
    m.set_defaults(func=cmd_simulate)

    r = add("pipeline", help="SSP -> GSP -> SAP on one instance triple")
    add_instance(r)
    r.add_argument("--solver", default="all", choices=["qaa", "exact", "greedy", "all"])
    r.set_defaults(func=cmd_pipeline)

    b = add("bench", help="three-way comparison over a suite")
    b.add_argument("--suite", help="directory of triples (or one file); synthetic if omitted")
    b.add_argument("--count", type=int)
    b.add_argument("--workers", type=int)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "instance_opt"):
        args.instance = args.instance_opt or args.instance
        if args.instance is None:
            parser.error(f"{args.command}: an instance file is required")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        return args.func(args, cfg)
    except (ConfigError, InstanceError, TLEError, SizeError, RefinementError,
            FileNotFoundError, ValueError) as exc:
        print(f"stinopt {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
