"""Graph-to-register embedding: force-directed start, learned correction,
constrained refinement, validation."""

from __future__ import annotations

from ..graph import WeightedGraph
from .den import DENConfig, TrainingError, den_train
from .elf import ELF, elf_loss
from .fr import fr_init
from .geometry import (EmbeddingReport, HardwareGeometry, Layout, hard_violations,
                       validate_embedding)
from .refine import RefinementError, refine_layout

__all__ = [
    "DENConfig", "ELF", "EmbeddingReport", "HardwareGeometry", "Layout", "RefinementError",
    "TrainingError", "den_train", "elf_loss", "embed", "fr_init", "hard_violations",
    "refine_layout", "validate_embedding",
]


def embed(g: WeightedGraph, seed: int = 0, geo: HardwareGeometry | None = None,
          cfg: DENConfig | None = None, k: float = 7.0, fr_iter: int = 1000,
          attempts: int = 3):
    """Run the full placement pipeline; returns (layout, report, loss trace).

    Training can settle where two vertices coincide, so up to ``attempts``
    restarts (seeds ``seed``, ``seed + 1000``, ...) are made until a legal
    unit-disk layout appears. The best attempt by (legal, unit-disk, gap)
    is returned.
    """
    geo = geo or HardwareGeometry()
    best = None
    for a in range(max(attempts, 1)):
        s = seed + 1000 * a
        init = fr_init(g, k=k, max_iter=fr_iter, seed=s, geo=geo)
        learned, trace = den_train(g, init, cfg, seed=s, geo=geo)
        try:
            layout = refine_layout(learned, g, geo)
        except RefinementError:
            if a == attempts - 1 and best is None:
                raise
            continue
        report = validate_embedding(layout, g, geo)
        key = (not report.constraint_violations, report.is_unit_disk, report.gap)
        if best is None or key > best[0]:
            best = (key, layout, report, trace)
        if key[0] and key[1]:
            break
    return best[1], best[2], best[3]
