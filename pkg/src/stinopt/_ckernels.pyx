# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``.

The MWIS search uses 64-bit masks, so callers route graphs with more than 64
vertices to the Python implementation.
"""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free

import time

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef long CHECK_EVERY = 1024


cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int _lowbit_index(uint64_t x) noexcept nogil:
    return __builtin_ctzll(x)


cdef struct Search:
    int n
    double *w
    uint64_t *nbr
    int *order
    int *ratio_order
    uint64_t *commons
    uint64_t best_mask
    double best_weight
    long nodes
    int timed_out
    double deadline


cdef double _bound(Search *s, uint64_t cand):
    cdef int ncl = 0
    cdef int i, k, v
    cdef uint64_t bit
    cdef double b = 0.0
    for i in range(s.n):
        v = s.order[i]
        bit = (<uint64_t>1) << v
        if not (cand & bit):
            continue
        for k in range(ncl):
            if s.commons[k] & bit:
                s.commons[k] &= s.nbr[v]
                break
        else:
            s.commons[ncl] = s.nbr[v]
            ncl += 1
            b += s.w[v]
    return b


cdef void _search(Search *s, uint64_t cand, uint64_t chosen, double cur):
    cdef uint64_t m, low, bit
    cdef int v, i, changed
    if s.timed_out:
        return
    s.nodes += 1
    if s.nodes % CHECK_EVERY == 0:
        if time.perf_counter() > s.deadline:
            s.timed_out = 1
            return
    changed = 1
    while changed and cand:
        changed = 0
        m = cand
        while m:
            low = m & (~m + 1)
            v = _lowbit_index(low)
            m ^= low
            if not (s.nbr[v] & cand):
                cand ^= low
                chosen |= low
                cur += s.w[v]
                changed = 1
    if cand == 0:
        if cur > s.best_weight:
            s.best_weight = cur
            s.best_mask = chosen
        return
    if cur + _bound(s, cand) <= s.best_weight:
        return
    v = -1
    for i in range(s.n):
        if (cand >> s.ratio_order[i]) & 1:
            v = s.ratio_order[i]
            break
    bit = (<uint64_t>1) << v
    _search(s, cand & ~bit & ~s.nbr[v], chosen | bit, cur + s.w[v])
    _search(s, cand & ~bit, chosen, cur)


def mwis_bnb(weights, nbr_masks, incumbent_mask, double incumbent_weight, double deadline):
    cdef int n = len(weights)
    if n > 64:
        raise ValueError("compiled MWIS kernel supports at most 64 vertices")
    cdef Search s
    cdef int i
    cdef uint64_t full
    w = [float(x) for x in weights]
    nbr = [int(m) for m in nbr_masks]
    deg = [bin(m).count("1") for m in nbr]
    order = sorted(range(n), key=lambda v: (-w[v], v))
    ratio_order = sorted(range(n), key=lambda v: (-w[v] / (deg[v] + 1.0), v))
    s.n = n
    s.w = <double *> malloc(max(n, 1) * sizeof(double))
    s.nbr = <uint64_t *> malloc(max(n, 1) * sizeof(uint64_t))
    s.order = <int *> malloc(max(n, 1) * sizeof(int))
    s.ratio_order = <int *> malloc(max(n, 1) * sizeof(int))
    s.commons = <uint64_t *> malloc(max(n, 1) * sizeof(uint64_t))
    try:
        for i in range(n):
            s.w[i] = w[i]
            s.nbr[i] = <uint64_t> nbr[i]
            s.order[i] = order[i]
            s.ratio_order[i] = ratio_order[i]
        s.best_mask = <uint64_t> int(incumbent_mask)
        s.best_weight = incumbent_weight
        s.nodes = 0
        s.timed_out = 0
        s.deadline = deadline
        # build the mask in 64 bits; a C int shift overflows past 30 vertices
        full = (~(<uint64_t>0)) >> (64 - n) if n > 0 else 0
        _search(&s, full, 0, 0.0)
        return int(s.best_mask), s.best_weight, not s.timed_out, s.nodes
    finally:
        free(s.w)
        free(s.nbr)
        free(s.order)
        free(s.ratio_order)
        free(s.commons)


def apply_hamiltonian(cnp.complex128_t[::1] psi, double half_omega, double delta_g,
                      double delta_loc, double[::1] popcount, double[::1] wcount,
                      double[::1] vdiag, cnp.complex128_t[::1] out):
    cdef Py_ssize_t n_states = psi.shape[0]
    cdef Py_ssize_t idx, bit
    cdef double complex acc
    cdef double d
    with nogil:
        for idx in range(n_states):
            d = vdiag[idx] - delta_g * popcount[idx] - delta_loc * wcount[idx]
            acc = d * psi[idx]
            if half_omega != 0.0:
                bit = 1
                while bit < n_states:
                    acc = acc + half_omega * psi[idx ^ bit]
                    bit <<= 1
            out[idx] = acc * (-1j)
