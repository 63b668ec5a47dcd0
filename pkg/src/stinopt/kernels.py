"""Kernel dispatch: compiled extension when importable, numpy/Python otherwise.

Set ``STINOPT_PURE=1`` in the environment to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("STINOPT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def mwis_bnb(weights, nbr_masks, incumbent_mask, incumbent_weight, deadline):
    if BACKEND == "cython" and len(weights) <= 64:
        return _impl.mwis_bnb(weights, nbr_masks, incumbent_mask, incumbent_weight, deadline)
    return _pykernels.mwis_bnb(weights, nbr_masks, incumbent_mask, incumbent_weight, deadline)


def apply_hamiltonian(psi, half_omega, delta_g, delta_loc, popcount, wcount, vdiag, out):
    _impl.apply_hamiltonian(psi, half_omega, delta_g, delta_loc, popcount, wcount, vdiag, out)


def backend_modules():
    """Both implementations keyed by name, for cross-checking and benchmarks."""
    mods = {"python": _pykernels}
    if BACKEND == "cython":
        mods["cython"] = _impl
    return mods
