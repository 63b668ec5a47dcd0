"""Labelled seed derivation: every random stream descends from one root seed."""

from __future__ import annotations

import hashlib


def stable_seed(*parts) -> int:
    """64-bit seed from labels, independent of process and hash salt."""
    h = hashlib.sha256("\x1f".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(h[:8], "little")


def derive_seed(root: int, *labels) -> int:
    """32-bit child seed for (root, labels...)."""
    return stable_seed(root, *labels) % (1 << 32)
