"""State-vector evolution under the Rydberg Hamiltonian, measurement sampling
and the composed QAA run."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .. import kernels
from ..embedding.geometry import (EmbeddingReport, HardwareGeometry, Layout, hard_violations,
                                  pair_indices, validate_embedding)
from ..graph import WeightedGraph
from .schedule import (PhysicsConfig, PulseSchedule, ScheduleError, blockade_radius,
                       build_qaa_schedule)

NORM_TOL = 1e-6
CONVENTION = "empty_trap_is_selected"


class SizeError(ValueError):
    pass


class IntegratorError(RuntimeError):
    pass


class Hamiltonian:
    """Matrix-free H(t) for one layout and schedule.

    Diagonal pieces (excitation counts, weighted local counts, pair
    interactions) are tabulated once per basis state; the drive is applied by
    bit flips in the kernel.
    """

    def __init__(self, layout: Layout, schedule: PulseSchedule, phys: PhysicsConfig,
                 blockade: float | None = None):
        n = layout.n
        if schedule.n != n:
            raise ValueError(f"schedule has {schedule.n} local factors for {n} atoms")
        if n > phys.max_qubits:
            raise SizeError(f"{n} atoms exceed max_qubits = {phys.max_qubits}")
        self.n = n
        self.schedule = schedule
        idx = np.arange(1 << n, dtype=np.int64)
        bits = [((idx >> i) & 1).astype(float) for i in range(n)]
        self.popcount = np.ascontiguousarray(sum(bits, np.zeros(1 << n)))
        f = schedule.local_factors
        self.wcount = np.ascontiguousarray(sum((f[i] * bits[i] for i in range(n)),
                                               np.zeros(1 << n)))
        vdiag = np.zeros(1 << n)
        self.allowed = None
        blocked = np.zeros(1 << n, dtype=bool)
        ii, jj = pair_indices(n)
        c = layout.coords
        for i, j in zip(ii, jj):
            r = math.dist(c[i], c[j])
            both = (bits[i] * bits[j]) > 0
            if blockade is not None and r < blockade:
                blocked |= both
            else:
                vdiag[both] += phys.c6 / max(r, 1e-12) ** 6
        if blockade is not None:
            vdiag[blocked] = 0.0
            self.allowed = ~blocked
        self.vdiag = np.ascontiguousarray(vdiag)

    def controls(self, t: float) -> tuple[float, float, float]:
        s = self.schedule
        return float(s.omega(t)) / 2.0, float(s.delta_global(t)), float(s.local(t))

    def rhs(self, t: float, psi: np.ndarray) -> np.ndarray:
        """-i H(t) psi."""
        half_omega, dg, dl = self.controls(t)
        psi = np.ascontiguousarray(psi, dtype=np.complex128)
        out = np.empty_like(psi)
        kernels.apply_hamiltonian(psi, half_omega, dg, dl, self.popcount, self.wcount,
                                  self.vdiag, out)
        if self.allowed is not None:
            out[~self.allowed] = 0.0
        return out

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        return 1j * self.rhs(t, psi)

    def expectation(self, t: float, psi: np.ndarray) -> complex:
        return complex(np.vdot(psi, self.apply(t, psi)))


def ground_state(n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def evolve(layout: Layout, schedule: PulseSchedule, phys: PhysicsConfig | None = None,
           blockade: float | None = None, psi0: np.ndarray | None = None,
           stats: dict | None = None) -> np.ndarray:
    """Integrate the Schroedinger equation from |0...0> over the schedule.

    Each linear piece between breakpoints is integrated separately with an
    adaptive 8th-order Runge-Kutta method (rtol = integrator_tol). With
    ``blockade`` set, states exciting two atoms closer than it are projected
    out (idealised blockade) instead of paying the stiff interaction energy.
    The largest norm drift seen is stored in ``stats["norm_drift"]``.
    """
    phys = phys or PhysicsConfig()
    ham = Hamiltonian(layout, schedule, phys, blockade)
    psi = ground_state(ham.n) if psi0 is None else np.array(psi0, dtype=np.complex128)
    if psi.shape != (1 << ham.n,):
        raise ValueError("initial state has the wrong dimension")
    tol = phys.integrator_tol
    pts = schedule.breakpoints()
    drift = 0.0
    for t0, t1 in zip(pts, pts[1:]):
        sol = solve_ivp(ham.rhs, (t0, t1), psi, method="DOP853", rtol=tol, atol=tol * 1e-2)
        if sol.status != 0:
            raise IntegratorError(f"integration failed on [{t0}, {t1}] us: {sol.message}")
        psi = sol.y[:, -1]
        norm = float(np.linalg.norm(psi))
        drift = max(drift, abs(norm - 1.0))
        if abs(norm - 1.0) > NORM_TOL:
            raise IntegratorError(f"norm drifted to {norm:.9f} by t = {t1} us")
    if stats is not None:
        stats["norm_drift"] = drift
    return psi / np.linalg.norm(psi)


def pattern(index: int, n: int) -> str:
    """Measured pattern for a basis index: position i is qubit i, an excited
    atom (empty trap after readout) reads '0'."""
    return "".join("0" if (index >> i) & 1 else "1" for i in range(n))


def pattern_members(p: str) -> frozenset:
    return frozenset(i for i, ch in enumerate(p) if ch == "0")


@dataclass(frozen=True)
class ShotSet:
    counts: dict
    shots: int
    seed: int
    n: int
    convention: str = CONVENTION
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        counts = {str(k): int(v) for k, v in sorted(self.counts.items())}
        if sum(counts.values()) != self.shots:
            raise ValueError("counts do not sum to the number of shots")
        if any(len(k) != self.n or set(k) - {"0", "1"} for k in counts):
            raise ValueError(f"patterns must be length-{self.n} strings of 0/1")
        if any(v <= 0 for v in counts.values()):
            raise ValueError("counts must be positive")
        object.__setattr__(self, "counts", counts)

    def to_json(self) -> dict:
        return {"shots": self.shots, "seed": self.seed, "convention": self.convention,
                "counts": dict(self.counts)}

    @classmethod
    def from_json(cls, d: dict) -> "ShotSet":
        counts = d["counts"]
        n = len(next(iter(counts))) if counts else int(d.get("n", 0))
        return cls(counts, int(d["shots"]), int(d["seed"]), n,
                   d.get("convention", CONVENTION))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "ShotSet":
        return cls.from_json(json.loads(Path(path).read_text()))


def sample(state: np.ndarray, shots: int = 300, seed: int = 0) -> ShotSet:
    """Multinomial draw of computational-basis outcomes."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    state = np.asarray(state)
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise ValueError("state dimension must be a power of two")
    probs = np.abs(state) ** 2
    total = probs.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalised (norm^2 = {total:.9f})")
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs / total)
    counts = {pattern(int(k), n): int(draws[k]) for k in np.nonzero(draws)[0]}
    return ShotSet(counts, shots, seed, n)


@dataclass(frozen=True)
class QAAPlan:
    layout: Layout
    report: EmbeddingReport
    r_b: float | None
    schedule: PulseSchedule
    scale: float = 1.0


def plan_qaa(g: WeightedGraph, layout: Layout, phys: PhysicsConfig | None = None,
             geo: HardwareGeometry | None = None, rescale: bool = True) -> QAAPlan:
    """Blockade radius and schedule for an embedded graph.

    Missing extremes are clamped: with no edges the drive runs at its maximum,
    and with no non-adjacent pair D is taken as max(d, d_adj). Non-unit-disk
    extremes are swapped so sqrt(d * D) stays defined. If the layout is so
    tight that the required drive exceeds omega_max and ``rescale`` is set,
    the layout is scaled up by the suggested factor.
    """
    phys = phys or PhysicsConfig()
    geo = geo or HardwareGeometry()
    report = validate_embedding(layout, g, geo)
    if report.constraint_violations:
        raise ValueError("layout violates hardware constraints: "
                         + "; ".join(report.constraint_violations[:3]))
    base = layout.coords.min(0)
    scale = 1.0
    current = layout
    # a clamped D does not grow with the layout, so the suggested factor
    # may need a few repeats
    for _ in range(30):
        r_b = _working_radius(g, report, geo)
        try:
            return QAAPlan(current, report, r_b, build_qaa_schedule(g, r_b, phys), scale)
        except ScheduleError as exc:
            if not rescale or exc.suggested_scale is None:
                raise
            scale *= exc.suggested_scale * (1 + 1e-9)
        current = Layout(base + (layout.coords - base) * scale)
        viol = hard_violations(current.coords, geo)
        if viol:
            raise ScheduleError(f"rescaling the layout by {scale:.4f} leaves the register: "
                                f"{viol[0]}", suggested_scale=scale)
        report = validate_embedding(current, g, geo)
    raise ScheduleError("layout rescaling did not converge")


def _working_radius(g: WeightedGraph, report: EmbeddingReport,
                    geo: HardwareGeometry) -> float | None:
    if not g.edges:
        return None
    d = max(report.d, geo.d_min)
    D = report.D if math.isfinite(report.D) else max(d, geo.d_adj)
    lo, hi = sorted((d, D))
    return blockade_radius(lo, hi)


def run_qaa(g: WeightedGraph, layout: Layout, phys: PhysicsConfig | None = None,
            shots: int = 300, seed: int = 0, geo: HardwareGeometry | None = None,
            ideal_blockade: bool = False) -> ShotSet:
    """validate -> blockade radius -> schedule -> evolve -> sample."""
    phys = phys or PhysicsConfig()
    if g.n > phys.max_qubits:
        raise SizeError(f"{g.n} vertices exceed max_qubits = {phys.max_qubits}")
    plan = plan_qaa(g, layout, phys, geo)
    if g.n == 0:
        return ShotSet({"": shots}, shots, seed, 0)
    stats: dict = {}
    state = evolve(plan.layout, plan.schedule, phys,
                   blockade=plan.r_b if ideal_blockade else None, stats=stats)
    shotset = sample(state, shots, seed)
    info = {"r_b": plan.r_b, "omega": max(plan.schedule.omega.values),
            "layout_scale": plan.scale, "is_unit_disk": plan.report.is_unit_disk,
            "norm_drift": stats["norm_drift"]}
    return ShotSet(shotset.counts, shots, seed, g.n, info=info)
