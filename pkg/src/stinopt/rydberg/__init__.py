"""Neutral-atom QAA simulation for embedded MWIS instances."""

from .schedule import (DUR_1, DUR_2, PhysicsConfig, PulseSchedule, ScheduleError, Waveform,
                       blockade_radius, build_qaa_schedule, local_factors, omega_for_radius)
from .sim import (Hamiltonian, IntegratorError, QAAPlan, ShotSet, SizeError, evolve, pattern,
                  pattern_members, plan_qaa, run_qaa, sample)

__all__ = [
    "DUR_1", "DUR_2", "Hamiltonian", "IntegratorError", "PhysicsConfig", "PulseSchedule",
    "QAAPlan", "ScheduleError", "ShotSet", "SizeError", "Waveform", "blockade_radius",
    "build_qaa_schedule", "evolve", "local_factors", "omega_for_radius", "pattern",
    "pattern_members", "plan_qaa", "run_qaa", "sample",
]
