from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

OPTIMAL = "optimal"
TIMEOUT = "feasible-timeout"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one solver call.

    ``solution`` is a :class:`~stinopt.graph.VertexSet` for MWIS, a
    ``{satellite: gateway}`` dict for the GSP and a ``{path: band position}``
    dict for the SAP.
    """

    solution: Any
    objective: float
    status: str
    elapsed: float
    info: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status != INFEASIBLE

    def to_json(self) -> dict:
        sol = self.solution
        if hasattr(sol, "members"):
            sol = sorted(sol.members)
        elif isinstance(sol, dict):
            sol = {str(k): v for k, v in sorted(sol.items())}
        return {
            "objective": self.objective,
            "status": self.status,
            "solution": sol,
            "elapsed_s": self.elapsed,
            **({"info": self.info} if self.info else {}),
        }
