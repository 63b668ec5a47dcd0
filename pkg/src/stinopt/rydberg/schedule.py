"""Physical constants and piecewise-linear QAA pulse schedules.

Angular units throughout: rates in rad/us, C6 in rad/us * um^6, times in us.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..graph import WeightedGraph

DUR_1 = (0.1, 2.0, 0.1, 0.8)   # Rabi drive segments
DUR_2 = (0.6, 1.5, 0.9)        # global detuning segments
DELTA_OVER_OMEGA = 3.0


class ScheduleError(ValueError):
    """Requested control parameters exceed the device limits."""

    def __init__(self, message: str, suggested_scale: float | None = None):
        super().__init__(message)
        self.suggested_scale = suggested_scale


@dataclass(frozen=True)
class PhysicsConfig:
    c6: float = 5.42e6
    omega_max: float = 2 * math.pi * 2.5
    delta_max: float = 2 * math.pi * 20.0
    # None: choose per schedule so final detunings are proportional to weights
    local_span: float | None = None
    integrator_tol: float = 1e-8
    max_qubits: int = 15

    def __post_init__(self):
        if not self.c6 > 0 or not self.omega_max > 0 or not self.delta_max > 0:
            raise ValueError("c6, omega_max and delta_max must be positive")
        if self.local_span is not None and not self.local_span >= 0:
            raise ValueError("local_span must be non-negative")
        if not 0 < self.integrator_tol < 1:
            raise ValueError("integrator_tol must lie in (0, 1)")
        if not 1 <= self.max_qubits <= 22:
            raise ValueError("max_qubits must be between 1 and 22")


@dataclass(frozen=True)
class Waveform:
    """Piecewise-linear signal through (times[k], values[k])."""

    times: tuple
    values: tuple

    def __post_init__(self):
        t = tuple(float(x) for x in self.times)
        v = tuple(float(x) for x in self.values)
        if len(t) < 2 or len(t) != len(v):
            raise ValueError("waveform needs at least two matching breakpoints")
        if t[0] != 0.0 or any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("breakpoints must start at 0 and strictly increase")
        if not all(map(math.isfinite, v)):
            raise ValueError("waveform values must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_durations(cls, durations, values) -> "Waveform":
        times = [0.0]
        for d in durations:
            if not d > 0:
                raise ValueError("segment durations must be positive")
            times.append(times[-1] + d)
        return cls(tuple(times), tuple(values))

    @property
    def durations(self) -> tuple:
        return tuple(b - a for a, b in zip(self.times, self.times[1:]))

    @property
    def total(self) -> float:
        return self.times[-1]

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    def to_json(self) -> dict:
        return {"times": list(self.times), "values": list(self.values)}

    @classmethod
    def from_json(cls, d: dict) -> "Waveform":
        return cls(tuple(d["times"]), tuple(d["values"]))


@dataclass(frozen=True)
class PulseSchedule:
    """Drive, global detuning and a shared non-positive local waveform scaled
    per vertex by ``local_factors`` in [0, 1]."""

    omega: Waveform
    delta_global: Waveform
    local: Waveform
    local_factors: tuple = field(default=())

    def __post_init__(self):
        f = tuple(float(x) for x in self.local_factors)
        object.__setattr__(self, "local_factors", f)
        totals = {self.omega.total, self.delta_global.total, self.local.total}
        if len(totals) != 1:
            raise ValueError(f"channels disagree on total duration: {sorted(totals)}")
        if self.omega.values[0] != 0.0 or self.omega.values[-1] != 0.0:
            raise ValueError("Rabi drive must start and end at zero")
        if any(v > 0 for v in self.local.values):
            raise ValueError("local detuning waveform must be non-positive")
        if any(not 0.0 <= x <= 1.0 for x in f):
            raise ValueError("local factors must lie in [0, 1]")

    @property
    def total(self) -> float:
        return self.omega.total

    @property
    def n(self) -> int:
        return len(self.local_factors)

    def breakpoints(self) -> list[float]:
        return sorted(set(self.omega.times) | set(self.delta_global.times) | set(self.local.times))

    def local_detunings(self, t: float) -> np.ndarray:
        return float(self.local(t)) * np.asarray(self.local_factors)

    def to_json(self) -> dict:
        return {"total_us": self.total, "omega": self.omega.to_json(),
                "delta_global": self.delta_global.to_json(), "delta_local": self.local.to_json(),
                "local_factors": list(self.local_factors)}

    @classmethod
    def from_json(cls, d: dict) -> "PulseSchedule":
        return cls(Waveform.from_json(d["omega"]), Waveform.from_json(d["delta_global"]),
                   Waveform.from_json(d["delta_local"]), tuple(d["local_factors"]))


def blockade_radius(d: float, D: float) -> float:
    """Working blockade radius between the adjacency extremes: sqrt(d * D)."""
    if not (d > 0 and D > 0):
        raise ValueError("distances must be positive")
    if d > D:
        raise ValueError("expected d <= D; clamp or swap non-unit-disk extremes first")
    return math.sqrt(d * D)


def omega_for_radius(r_b: float, c6: float) -> float:
    """Rabi frequency at which r_b = (C6 / sqrt((2 Omega)^2 + Delta^2))^(1/6)
    with Delta = 3 Omega."""
    ratio = math.hypot(2.0, DELTA_OVER_OMEGA)
    return c6 / (ratio * r_b ** 6)


def local_factors(weights) -> tuple:
    """(w_max - w_i) / (w_max - w_min); all zeros for equal weights."""
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        return ()
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    lo, hi = float(w.min()), float(w.max())
    if hi == lo:
        return tuple(0.0 for _ in w)
    return tuple(float(x) for x in (hi - w) / (hi - lo))


def proportional_span(weights, delta: float) -> float:
    """Local span that makes the final detunings Delta_i = Delta * w_i / w_max,
    so the end-of-sweep ground state is the weighted optimum."""
    w = np.asarray(weights, dtype=float)
    if w.size == 0 or w.max() <= 0 or w.max() == w.min():
        return 0.0
    return delta * (1.0 - max(float(w.min()), 0.0) / float(w.max()))


def build_qaa_schedule(g: WeightedGraph, r_b: float | None, phys: PhysicsConfig | None = None,
                       dur_1=DUR_1, dur_2=DUR_2, tail_fraction: float = 0.5) -> PulseSchedule:
    """Adiabatic schedule for ``g`` at blockade radius ``r_b``.

    Omega ramps up over dur_1[0], holds, ramps to ``tail_fraction`` of its peak
    and then to zero. The global detuning holds at -Delta, sweeps to +Delta and
    holds. The local waveform switches on during the sweep. ``r_b=None`` means
    no pair needs blocking and the drive runs at ``omega_max``.
    """
    phys = phys or PhysicsConfig()
    if len(dur_1) != 4 or len(dur_2) != 3:
        raise ValueError("expected four drive and three detuning segments")
    if not 0.0 <= tail_fraction <= 1.0:
        raise ValueError("tail_fraction must lie in [0, 1]")
    if r_b is None:
        omega = phys.omega_max
    else:
        if not r_b > 0:
            raise ValueError("blockade radius must be positive")
        omega = omega_for_radius(r_b, phys.c6)
        if omega > phys.omega_max * (1 + 1e-12):
            scale = (omega / phys.omega_max) ** (1.0 / 6.0)
            raise ScheduleError(
                f"blockade radius {r_b:.3f} um needs Omega = {omega:.3f} rad/us > "
                f"omega_max = {phys.omega_max:.3f}; scale the layout by at least {scale:.4f}",
                suggested_scale=scale)
    delta = DELTA_OVER_OMEGA * omega
    if delta > phys.delta_max * (1 + 1e-12):
        raise ScheduleError(f"Delta = {delta:.3f} rad/us exceeds delta_max = {phys.delta_max:.3f}")
    span = phys.local_span if phys.local_span is not None else proportional_span(g.weights, delta)
    drive = Waveform.from_durations(dur_1, (0.0, omega, omega, tail_fraction * omega, 0.0))
    sweep = Waveform.from_durations(dur_2, (-delta, -delta, delta, delta))
    # local channel ramps in alongside the global sweep, then holds
    local = Waveform.from_durations(dur_2, (0.0, 0.0, -span, -span))
    if not math.isclose(drive.total, sweep.total, rel_tol=0, abs_tol=1e-12):
        raise ValueError("drive and detuning segments must have equal total duration")
    local = Waveform(tuple(local.times[:-1]) + (drive.total,), local.values)
    sweep = Waveform(tuple(sweep.times[:-1]) + (drive.total,), sweep.values)
    return PulseSchedule(drive, sweep, local, local_factors(g.weights))
