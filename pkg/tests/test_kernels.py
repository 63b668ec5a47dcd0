import math
import os
import subprocess
import sys

import numpy as np
import pytest

from stinopt import _pykernels, kernels

from conftest import random_graph

compiled = pytest.mark.skipif("cython" not in kernels.backend_modules(),
                              reason="compiled extension not built")


@compiled
@pytest.mark.parametrize("n, p", [(12, 0.3), (31, 0.15), (32, 0.15), (33, 0.12), (50, 0.1),
                                  (64, 0.08)])
def test_mwis_backends_agree(n, p):
    g = random_graph(np.random.default_rng(n), n, p)
    c = kernels.backend_modules()["cython"]
    args = (list(g.weights), g.neighbor_masks(), 0, 0.0, math.inf)
    a, b = _pykernels.mwis_bnb(*args), c.mwis_bnb(*args)
    assert a[1] == pytest.approx(b[1], abs=1e-12)
    assert a[2] and b[2]


@compiled
@pytest.mark.parametrize("n", [1, 3, 7, 10])
def test_hamiltonian_backends_agree(n):
    rng = np.random.default_rng(n)
    dim = 1 << n
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    pop = np.array([bin(k).count("1") for k in range(dim)], dtype=float)
    wc = rng.uniform(0, 2, dim)
    vd = rng.uniform(0, 100, dim)
    outs = []
    for m in kernels.backend_modules().values():
        out = np.empty_like(psi)
        m.apply_hamiltonian(psi, 1.3, -4.0, -0.5, pop, wc, vd, out)
        outs.append(out)
    np.testing.assert_allclose(outs[0], outs[1], rtol=1e-13, atol=1e-13)


def test_pure_fallback_selected_by_environment():
    code = "from stinopt import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, STINOPT_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "python"


def test_dispatch_routes_wide_graphs_to_python():
    g = random_graph(np.random.default_rng(1), 70, 0.08)
    mask, w, proved, _ = kernels.mwis_bnb(list(g.weights), g.neighbor_masks(), 0, 0.0,
                                          math.inf)
    assert proved and w == pytest.approx(sum(g.weights[v] for v in range(70) if mask >> v & 1))
