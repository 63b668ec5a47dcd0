import math

import numpy as np
import pytest

from stinopt.embedding import Layout, embed, DENConfig
from stinopt.graph import WeightedGraph
from stinopt.postprocess import refine
from stinopt.rydberg import (DUR_1, DUR_2, Hamiltonian, PhysicsConfig, PulseSchedule,
                             ScheduleError, ShotSet, SizeError, Waveform, blockade_radius,
                             build_qaa_schedule, evolve, local_factors, omega_for_radius,
                             pattern, plan_qaa, run_qaa, sample)
from stinopt.rydberg.schedule import proportional_span

from conftest import complete, path

PHYS = PhysicsConfig()


def flat(total, value=0.0):
    return Waveform((0.0, total), (value, value))


def rabi_schedule(omega, t):
    eps = 1e-9
    drive = Waveform((0.0, eps, t - eps, t), (0.0, omega, omega, 0.0))
    return PulseSchedule(drive, flat(t), flat(t), (0.0,))


# -- schedule arithmetic ------------------------------------------------------

def test_durations_sum_to_three_exactly():
    assert sum(DUR_1) == 3.0 and sum(DUR_2) == 3.0
    s = build_qaa_schedule(path(3), 7.0)
    assert s.total == 3.0


def test_blockade_radius_examples():
    assert blockade_radius(4, 9) == 6
    assert blockade_radius(7.5, 7.5) == 7.5
    assert blockade_radius(5, 8) == pytest.approx(6.32455532, rel=1e-9)
    for bad in ((0, 1), (-1, 2), (3, 2)):
        with pytest.raises(ValueError):
            blockade_radius(*bad)


def test_omega_reproduces_radius():
    r_b = 7.3
    om = omega_for_radius(r_b, PHYS.c6)
    delta = 3 * om
    assert (PHYS.c6 / math.sqrt((2 * om) ** 2 + delta ** 2)) ** (1 / 6) == pytest.approx(r_b)


def test_local_factors():
    assert local_factors([2, 2, 2]) == (0.0, 0.0, 0.0)
    assert local_factors([1, 2, 3]) == (1.0, 0.5, 0.0)
    assert local_factors([]) == ()
    phys = PhysicsConfig(local_span=4.0)
    s = build_qaa_schedule(WeightedGraph(3, [1, 2, 3]), 7.0, phys)
    np.testing.assert_allclose(s.local_detunings(s.total), [-4.0, -2.0, 0.0])


def test_weight_order_gives_detuning_order():
    rng = np.random.default_rng(0)
    for _ in range(50):
        w = rng.uniform(0.1, 2.0, 6)
        s = build_qaa_schedule(WeightedGraph(6, w), 8.0)
        det = s.local_detunings(s.total)
        order = np.argsort(w)
        assert np.all(np.diff(det[order]) >= -1e-12)
        assert np.all(det <= 0)


def test_default_span_makes_final_detuning_proportional():
    w = np.array([0.5, 1.0, 2.0])
    s = build_qaa_schedule(WeightedGraph(3, w), 8.0)
    delta = s.delta_global(s.total)
    total = delta + s.local_detunings(s.total)
    np.testing.assert_allclose(total, delta * w / w.max())
    assert proportional_span([1, 1], 5.0) == 0.0


def test_schedule_shape_and_bounds():
    s = build_qaa_schedule(path(3), 8.0)
    assert s.omega(0) == 0 and s.omega(s.total) == 0
    om = omega_for_radius(8.0, PHYS.c6)
    assert max(s.omega.values) == pytest.approx(om)
    assert s.delta_global(0) == pytest.approx(-3 * om)
    assert s.delta_global(s.total) == pytest.approx(3 * om)
    assert s.omega.durations == pytest.approx(DUR_1)
    assert PulseSchedule.from_json(s.to_json()) == s


def test_schedule_error_suggests_scale():
    with pytest.raises(ScheduleError) as exc:
        build_qaa_schedule(path(2), 3.0)
    k = exc.value.suggested_scale
    assert k > 1
    build_qaa_schedule(path(2), 3.0 * k * (1 + 1e-9))


def test_schedule_validation():
    d = Waveform((0, 1, 2), (0, 1, 0))
    with pytest.raises(ValueError):
        PulseSchedule(d, flat(2), Waveform((0, 2), (0, 1)), (1.0,))      # positive local
    with pytest.raises(ValueError):
        PulseSchedule(Waveform((0, 2), (1, 0)), flat(2), flat(2), (0.0,))  # Omega(0) != 0
    with pytest.raises(ValueError):
        PulseSchedule(d, flat(3), flat(2), (0.0,))                       # totals differ
    with pytest.raises(ValueError):
        PulseSchedule(d, flat(2), flat(2), (1.5,))
    with pytest.raises(ValueError):
        PhysicsConfig(max_qubits=30)


# -- dynamics -----------------------------------------------------------------

def test_zero_hamiltonian_is_identity():
    s = PulseSchedule(flat(1.0), flat(1.0), flat(1.0), (0.0, 0.0))
    psi = evolve(Layout([[0, 0], [1e6, 0]]), s, PHYS)
    np.testing.assert_allclose(psi, [1, 0, 0, 0], atol=1e-12)


@pytest.mark.parametrize("t", [0.3, 0.5 * math.pi / 2.0, math.pi / 2.0, 2.7])
def test_rabi_flop(t):
    om = 2.0
    psi = evolve(Layout([[0, 0]]), rabi_schedule(om, t), PHYS)
    assert abs(psi[1]) ** 2 == pytest.approx(math.sin(om * t / 2) ** 2, abs=1e-4)


def test_two_atom_blockade_under_qaa():
    g = complete(2)
    plan = plan_qaa(g, Layout([[0, 0], [4, 0]]), PHYS)
    psi = evolve(plan.layout, plan.schedule, PHYS)
    assert abs(psi[3]) ** 2 < 0.05


def test_tolerance_halving_converges():
    g = WeightedGraph(3, [1, 2, 1.5], [(0, 1), (1, 2)])
    lay = Layout([[0, 0], [6, 0], [12, 0]])
    fid = []
    for tol in (1e-8, 5e-9):
        phys = PhysicsConfig(integrator_tol=tol)
        plan = plan_qaa(g, lay, phys)
        fid.append(evolve(plan.layout, plan.schedule, phys))
    assert 1 - abs(np.vdot(fid[0], fid[1])) ** 2 < 1e-6


def test_hamiltonian_is_hermitian():
    g = WeightedGraph(3, [1, 2, 3], [(0, 1)])
    lay = Layout([[0, 0], [6, 0], [20, 0]])
    s = build_qaa_schedule(g, 8.0)
    ham = Hamiltonian(lay, s, PHYS)
    rng = np.random.default_rng(0)
    for t in (0.0, 1.1, s.total):
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        assert abs(ham.expectation(t, psi).imag) < 1e-9 * max(1.0, abs(ham.expectation(t, psi)))
        cols = np.stack([ham.apply(t, e) for e in np.eye(8, dtype=complex)], axis=1)
        np.testing.assert_allclose(cols, cols.conj().T, atol=1e-9)


def test_relabeling_permutes_probabilities():
    g = WeightedGraph(3, [1.0, 2.0, 1.5], [(0, 1), (1, 2)])
    coords = np.array([[0, 0], [6, 0], [12, 0]], dtype=float)
    perm = [2, 0, 1]
    base = evolve(*_plan(g, coords))
    moved = evolve(*_plan(g.permuted(perm), coords[perm]))
    p0 = np.abs(base) ** 2
    p1 = np.abs(moved) ** 2
    for k in range(8):
        # new qubit j is old qubit perm[j]
        old = sum(1 << perm[j] for j in range(3) if k >> j & 1)
        assert p1[k] == pytest.approx(p0[old], abs=1e-7)


def _plan(g, coords):
    plan = plan_qaa(g, Layout(coords), PHYS)
    return plan.layout, plan.schedule, PHYS


def test_size_limit():
    g = WeightedGraph(4, [1] * 4)
    with pytest.raises(SizeError):
        run_qaa(g, Layout([[0, 0], [10, 0], [20, 0], [30, 0]]), PhysicsConfig(max_qubits=3))


# -- sampling -----------------------------------------------------------------

def test_sample_basis_state_and_determinism():
    psi = np.zeros(8, complex)
    psi[0b010] = 1
    ss = sample(psi, 50, 1)
    assert ss.counts == {pattern(0b010, 3): 50} and pattern(0b010, 3) == "101"
    uniform = np.full(8, 1 / math.sqrt(8), complex)
    assert sample(uniform, 300, 7) == sample(uniform, 300, 7)
    with pytest.raises(ValueError):
        sample(np.ones(4), 10, 0)


def test_sample_uniform_frequencies():
    ss = sample(np.full(4, 0.5, complex), 10_000, 3)
    for p in ("00", "01", "10", "11"):
        assert ss.counts[p] / 10_000 == pytest.approx(0.25, abs=0.02)


def test_shotset_json_round_trip(tmp_path):
    ss = ShotSet({"01": 2, "10": 1}, 3, 9, 2)
    ss.save(tmp_path / "s.json")
    back = ShotSet.load(tmp_path / "s.json")
    assert back == ss and back.convention == "empty_trap_is_selected"
    with pytest.raises(ValueError):
        ShotSet({"01": 2}, 3, 0, 2)


# -- composed run -------------------------------------------------------------

def test_single_atom_is_selected():
    ss = run_qaa(WeightedGraph(1, [1.0]), Layout([[5, 5]]), PHYS, 300, 0)
    assert ss.counts.get("0", 0) >= 285


def test_k2_rarely_double_excited():
    ss = run_qaa(complete(2), Layout([[0, 0], [5, 0]]), PHYS, 300, 0)
    assert ss.counts.get("00", 0) < 30


def test_triangle_heavy_vertex_wins():
    g = WeightedGraph(3, [1, 1, 3], [(0, 1), (1, 2), (0, 2)])
    lay, rep, _ = embed(g, seed=0, cfg=DENConfig(epochs=500))
    ss = run_qaa(g, lay, PHYS, 300, 0)
    out = refine(ss, g)
    assert out.best.members == {2}
    modal = max(out.refined_sets, key=lambda sc: sc[1])[0]
    assert modal.members == {2}
    assert ss.info["r_b"] is not None and ss.info["omega"] <= PHYS.omega_max
