"""Pure-Python/numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` exactly (same signatures, same search order) and
are used when the compiled extension is missing or ``STINOPT_PURE=1`` is set.
"""

from __future__ import annotations

import time

import numpy as np

_CHECK_EVERY = 1024


def _clique_cover_bound(cand: int, order: list[int], nbr: list[int], weights) -> float:
    # order is descending weight, so the first member of each clique is its max
    commons: list[int] = []
    bound = 0.0
    for v in order:
        bit = 1 << v
        if not cand & bit:
            continue
        for k in range(len(commons)):
            if commons[k] & bit:
                commons[k] &= nbr[v]
                break
        else:
            commons.append(nbr[v])
            bound += weights[v]
    return bound


def mwis_bnb(weights, nbr_masks, incumbent_mask: int, incumbent_weight: float,
             deadline: float):
    """Exact MWIS branch-and-bound over vertex bitmasks.

    Returns ``(best_mask, best_weight, proved_optimal, nodes)``.
    """
    n = len(weights)
    w = [float(x) for x in weights]
    nbr = [int(m) for m in nbr_masks]
    deg = [bin(m).count("1") for m in nbr]
    order = sorted(range(n), key=lambda v: (-w[v], v))
    ratio_order = sorted(range(n), key=lambda v: (-w[v] / (deg[v] + 1.0), v))

    best = [incumbent_mask, incumbent_weight]
    nodes = [0]
    timed_out = [False]

    def search(cand: int, chosen: int, cur: float) -> None:
        if timed_out[0]:
            return
        nodes[0] += 1
        if nodes[0] % _CHECK_EVERY == 0 and time.perf_counter() > deadline:
            timed_out[0] = True
            return
        # forced inclusions: vertices with no candidate neighbour
        changed = True
        while changed and cand:
            changed = False
            m = cand
            while m:
                low = m & -m
                v = low.bit_length() - 1
                m ^= low
                if not nbr[v] & cand:
                    cand ^= low
                    chosen |= low
                    cur += w[v]
                    changed = True
        if cand == 0:
            if cur > best[1]:
                best[0], best[1] = chosen, cur
            return
        if cur + _clique_cover_bound(cand, order, nbr, w) <= best[1]:
            return
        for v in ratio_order:
            if cand >> v & 1:
                break
        bit = 1 << v
        search(cand & ~bit & ~nbr[v], chosen | bit, cur + w[v])
        search(cand & ~bit, chosen, cur)

    search((1 << n) - 1, 0, 0.0)
    return best[0], best[1], not timed_out[0], nodes[0]


def apply_hamiltonian(psi, half_omega: float, delta_g: float, delta_loc: float,
                      popcount, wcount, vdiag, out) -> None:
    """out <- -i H psi for the Rydberg Hamiltonian at one instant.

    ``H = half_omega * sum_i X_i - delta_g * sum_i n_i - delta_loc * sum_i f_i n_i
    + sum_{j<k} V_jk n_j n_k`` with the diagonal pieces supplied precomputed.
    """
    n_states = psi.shape[0]
    diag = vdiag - delta_g * popcount - delta_loc * wcount
    acc = diag * psi
    if half_omega != 0.0:
        bit = 1
        while bit < n_states:
            view = psi.reshape(-1, 2, bit)
            acc += half_omega * view[:, ::-1, :].reshape(n_states)
            bit <<= 1
    np.multiply(acc, -1j, out=out)
