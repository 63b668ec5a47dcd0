import csv
import json
import math

import numpy as np
import pytest

from stinopt.cli import main
from stinopt.config import ConfigError, RunConfig
from stinopt.graph import BipartiteInstance, WeightedGraph
from stinopt.instances import GroundNetwork, InstanceTriple, synth_suite
from stinopt.pipeline import (CSV_COLUMNS, PipelineSizeError, bench, integer_histograms,
                              js_divergence, relative_improvement, run_chain, run_pipeline,
                              verify_chain)
from stinopt.rydberg import PhysicsConfig, SizeError
from stinopt.solvers.mwis import mwis_bruteforce

FAST = RunConfig(shots=100, bootstrap_subsample=50, bootstrap_reps=5, den_epochs=300)


def tiny_triple(n=1, ident="tiny"):
    g = WeightedGraph(n, [1.0] * n)
    gsp = BipartiteInstance(n, 1, frozenset((i, 0) for i in range(n)))
    return InstanceTriple(ident, g, gsp, GroundNetwork(1, 1, ((0, 1),), 4))


# -- metrics ------------------------------------------------------------------

def test_relative_improvement():
    assert relative_improvement(2.0, 2.0) == 0.0
    assert relative_improvement(1.1, 1.0) == pytest.approx(0.10)
    assert relative_improvement(16.50, 16.22) == pytest.approx(0.01726, abs=1e-5)
    for b in (0.0, -1.0):
        with pytest.raises(ValueError):
            relative_improvement(1.0, b)


def test_js_divergence_examples():
    assert js_divergence([0.2, 0.8], [0.2, 0.8]) == 0.0
    assert js_divergence([1, 0, 0], [0, 0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-12)
    assert js_divergence([0.5, 0.5], [1, 0]) == pytest.approx(0.2158, abs=1e-4)
    with pytest.raises(ValueError):
        js_divergence([0.5, 0.6], [0.5, 0.5])
    with pytest.raises(ValueError):
        js_divergence([0.5, 0.5], [1.0])


def test_js_divergence_symmetric_and_bounded(rng):
    for _ in range(1000):
        k = int(rng.integers(1, 8))
        p = rng.dirichlet(np.ones(k))
        q = rng.dirichlet(np.ones(k))
        d = js_divergence(p, q)
        assert 0.0 <= d <= math.log(2)
        assert d == pytest.approx(js_divergence(q, p), abs=1e-15)


def test_integer_histograms():
    support, p, q = integer_histograms([1, 1, 2], [2, 3])
    assert support == [1, 2, 3]
    np.testing.assert_allclose(p, [2 / 3, 1 / 3, 0])
    np.testing.assert_allclose(q, [0, 0.5, 0.5])


# -- chains -------------------------------------------------------------------

def test_greedy_chain_on_synth(tmp_path):
    triple = synth_suite(1, 1)[0]
    rep = run_pipeline(triple, "greedy", FAST, seed=1, out_dir=tmp_path)
    c = rep.chains["greedy"]
    assert c.ssp_objective > 0 and c.gsp_objective is not None and c.sap_bands is not None
    assert verify_chain(triple, c) == []
    stored = json.loads((tmp_path / triple.id / "greedy" / "chain.json").read_text())
    assert stored["ssp_objective"] == c.ssp_objective
    assert (tmp_path / triple.id / "report.json").exists()


def test_exact_unbounded_matches_bruteforce():
    cfg = RunConfig(exact_budget=math.inf)
    for triple in synth_suite(3, 4, (5, 12)):
        c = run_chain(triple, "exact", cfg)
        assert c.ssp_objective == pytest.approx(mwis_bruteforce(triple.ssp).objective)
        assert verify_chain(triple, c) == []


def test_empty_ssp_gives_empty_chain():
    triple = tiny_triple(0, "empty")
    for solver in ("qaa", "exact", "greedy"):
        c = run_chain(triple, solver, FAST)
        assert c.ssp_objective == 0.0 and c.gsp_objective == 0 and c.sap_paths == []


def test_qaa_chain_records_diagnostics(tmp_path):
    triple = synth_suite(2, 1, (4, 4))[0]
    c = run_chain(triple, "qaa", FAST, seed=2, out_dir=tmp_path)
    assert verify_chain(triple, c) == []
    assert c.ssp_objective <= mwis_bruteforce(triple.ssp).objective + 1e-9
    assert len(c.qaa["bootstrap"]["values"]) == 5
    assert 0 <= c.qaa["hamming_mean"] <= 1
    for name in ("layout.json", "shots.json", "refinement.json", "chain.json"):
        assert (tmp_path / triple.id / "qaa" / name).exists()


def test_qaa_size_limit():
    cfg = RunConfig(physics=PhysicsConfig(max_qubits=3))
    triple = tiny_triple(4)
    with pytest.raises(PipelineSizeError, match="exact or greedy"):
        run_pipeline(triple, "qaa", cfg)
    assert issubclass(PipelineSizeError, SizeError)
    rep = run_pipeline(triple, ("qaa", "greedy"), cfg)
    assert "qaa" in rep.failures and "greedy" in rep.chains


def test_verify_chain_catches_tampering():
    triple = synth_suite(1, 1)[0]
    c = run_chain(triple, "exact", FAST)
    c.ssp_objective += 1.0
    assert verify_chain(triple, c)


# -- bench --------------------------------------------------------------------

def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_bench_trivial_instance(tmp_path):
    summary = bench([tiny_triple()], FAST, seed=0, out_dir=tmp_path)
    rows = read_csv(tmp_path / "bench.csv")
    assert len(rows) == 1 and list(rows[0]) == CSV_COLUMNS
    for key in ("imp_qaa_vs_greedy", "imp_qaa_vs_exact", "imp_exact_vs_greedy"):
        assert float(rows[0][key]) == 0.0
    assert summary["failures"] == {}


def test_bench_is_deterministic(tmp_path):
    suite = synth_suite(4, 2, (3, 5))
    outs = []
    for k in range(2):
        bench(suite, FAST, seed=4, out_dir=tmp_path / str(k))
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / str(k)).glob("*.csv"))})
    assert outs[0] == outs[1] and len(outs[0]) == 4


def test_bench_records_failures(tmp_path):
    cfg = RunConfig(shots=100, bootstrap_subsample=50, bootstrap_reps=2, den_epochs=100,
                    physics=PhysicsConfig(max_qubits=3))
    summary = bench([tiny_triple(4, "big"), tiny_triple(1, "small")], cfg, out_dir=tmp_path)
    rows = read_csv(tmp_path / "bench.csv")
    assert [r["id"] for r in rows] == ["big", "small"]
    assert rows[0]["status"].startswith("qaa:") and rows[1]["status"] == "ok"
    assert "big" in summary["failures"]


# -- config -------------------------------------------------------------------

def test_config_round_trip(tmp_path):
    cfg = RunConfig.from_dict({"budgets": {"exact_s": "inf", "sap_s": 5}, "shots": 50,
                               "physics": {"max_qubits": 10}, "suite": {"count": 3}})
    assert math.isinf(cfg.exact_budget) and cfg.physics.max_qubits == 10
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"workers": 2}))
    assert RunConfig.load(p).workers == 2


@pytest.mark.parametrize("bad", [{"shot": 3}, {"physics": {"omega": 1}}, {"budgets": {"x": 1}},
                                 {"budgets": {"exact_s": 0}}, {"shots": 0}])
def test_config_rejects_bad_input(bad):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(bad)


# -- CLI ----------------------------------------------------------------------

def test_cli_end_to_end(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"shots": 100, "den_epochs": 200,
                               "bootstrap": {"subsample": 50, "reps": 3}}))
    base = ["--seed", "3", "--out-dir", str(tmp_path), "--config", str(cfg)]
    assert main(base + ["generate", "--count", "2", "--n-min", "3", "--n-max", "4"]) == 0
    inst = sorted((tmp_path / "instances").glob("*.json"))
    assert len(inst) == 2
    first = str(inst[0])
    assert main(base + ["solve", first, "--solver", "greedy"]) == 0
    assert main(base + ["solve", "--instance", first, "--budget", "inf"]) == 0
    assert main(base + ["embed", first]) == 0
    ident = inst[0].stem
    layout = tmp_path / ident / "layout.json"
    assert layout.exists()
    assert main(base + ["simulate", first, "--layout", str(layout)]) == 0
    assert (tmp_path / ident / "shots.json").exists()
    assert main(base + ["pipeline", first, "--solver", "all"]) == 0
    assert main(base + ["bench", "--suite", str(tmp_path / "instances")]) == 0
    assert (tmp_path / "bench.csv").exists()
    out = capsys.readouterr().out
    assert "objective=" in out and "mean_improvement" in out


def test_cli_flags_after_subcommand(tmp_path):
    assert main(["generate", "--count", "1", "--out-dir", str(tmp_path), "--seed", "9"]) == 0
    assert len(list((tmp_path / "instances").glob("synth-9-*.json"))) == 1


def test_cli_reports_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nope": 1}))
    assert main(["--config", str(bad), "--out-dir", str(tmp_path), "generate"]) == 2
    assert "unknown config keys" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing.json")]) == 2
    with pytest.raises(SystemExit):
        main(["embed"])
