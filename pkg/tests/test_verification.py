import numpy as np
import pytest

from ri_evolve.dissipation import sign_subdifferential
from ri_evolve.energy import cubic_paper, linear
from ri_evolve.ode_evolution import (
    Loading, MMParams, Trajectory, run_minimizing_movements, vanishing_viscosity_limit,
)
from ri_evolve import verification as ver

CUBIC = cubic_paper()
LIN = linear()
DR = sign_subdifferential()


@pytest.fixture(scope="module")
def mm_zigzag():
    return run_minimizing_movements(CUBIC, Loading.paper(), MMParams.uniform(16.0, 1600))


@pytest.fixture(scope="module")
def vv_ramp():
    loading = Loading.paper().restrict(0.0, 4.0)
    return loading, vanishing_viscosity_limit(CUBIC, loading, [1e-1, 1e-2])


def hand_traj(times, values, forcing, scheme="mm", eps=None):
    return Trajectory(np.asarray(times, float), np.asarray(values, float), np.asarray(forcing, float), scheme, eps=eps)


def test_report_record_and_str():
    r = ver.check_monotone(hand_traj([0, 1], [0, 1], [0, 0]))
    rec = r.record()
    assert set(rec) >= {"check", "pass", "worst", "where", "tol"}
    assert str(r).startswith("[PASS] monotone")


def test_checks_are_pure(mm_zigzag):
    a = ver.check_mm_optimality(mm_zigzag, CUBIC)
    b = ver.check_mm_optimality(mm_zigzag, CUBIC)
    assert a == b


def test_optimality_pass_on_solver_output(mm_zigzag):
    assert ver.check_mm_optimality(mm_zigzag, CUBIC, tol=1e-7).passed


def test_optimality_play_operator_jump_equality():
    traj = run_minimizing_movements(LIN, Loading.ramp(3.0), MMParams.uniform(3.0, 300))
    rep = ver.check_mm_optimality(traj, LIN, tol=1e-9)
    assert rep.passed


def test_stick_counterexample():
    # q^1 = 0.1 while f = 0.5: the optimality inclusion still holds, the stick property does not
    traj = hand_traj([0, 1], [0, 0.1], [0, 0.5])
    e01 = CUBIC.e(0.1)
    assert -1 + e01 - 0.5 <= 0 <= 1 + e01 - 0.5
    assert not ver.check_stick(traj).passed


def test_stick_jump_below_threshold_fails():
    traj = hand_traj([0, 1, 2], [0, 0, 2.5], [0, 0.5, 0.9])
    assert not ver.check_stick(traj).passed


def test_stick_pass_and_reflection(mm_zigzag):
    assert ver.check_stick(mm_zigzag.window(0.0, 1.0)).passed
    reports = ver.mm_lemma_suite(mm_zigzag, CUBIC, Loading.paper())
    sticks = [r for r in reports if r.name.startswith("stick")]
    assert len(sticks) == 3 and all(r.passed for r in sticks)
    assert any("(-)" in r.name for r in sticks)


def test_monotone_counterexample():
    assert not ver.check_monotone(hand_traj([0, 1, 2], [0, 1, 0.5], [0, 0, 0])).passed


def test_envelope_counterexample():
    # 1.5 lies inside the lower gap of the cubic
    traj = hand_traj([0, 1], [0.0, 1.5], [0, 2.5])
    assert not ver.check_envelope(traj, CUBIC).passed
    assert ver.check_envelope(hand_traj([0, 1], [0.0, 3.0], [0, 0]), CUBIC).passed


def test_monotone_in_eps(vv_ramp):
    _, lim = vv_ramp
    assert ver.check_monotone_in_eps(lim.members, 1e-11).passed
    eps, tr = lim.members[0]
    assert ver.check_monotone_in_eps([(eps, tr), (eps, tr)], 0.0).passed
    bumped = Trajectory(tr.times, tr.values + 1e-3, tr.forcing, tr.scheme, eps=eps)
    assert not ver.check_monotone_in_eps([(eps, bumped), lim.members[1]], 1e-11).passed


def test_gap_avoidance(vv_ramp):
    _, lim = vv_ramp
    gaps = CUBIC.gap_components().upper_gaps
    assert ver.check_gap_avoidance(lim, gaps, 0.05, 0.05).passed
    t = np.linspace(0, 1, 101)
    slow = hand_traj(t, np.linspace(0.0, 3.0, 101), t)
    assert not ver.check_gap_avoidance(slow, gaps, 0.05, 0.01).passed


def test_mm_avoids_lower_gaps_with_extremal_rule():
    traj = run_minimizing_movements(CUBIC, Loading.paper(), MMParams.uniform(16.0, 1600, selection="extremal"))
    gaps = CUBIC.gap_components()
    # increasing pieces sit on e_m, the decreasing piece on e^m
    for t0, t1, d in Loading.paper().segments():
        part = traj.window(t0 + 1e-9, t1)
        g = gaps.lower_gaps if d > 0 else gaps.upper_gaps
        assert ver.check_gap_avoidance(part, g, 1e-6, 0.0).passed


def test_ordering(vv_ramp):
    loading, lim = vv_ramp
    mm = run_minimizing_movements(CUBIC, loading, MMParams.uniform(4.0, 400))
    assert ver.check_ordering(lim, mm, 0.01).passed
    assert not ver.check_ordering(mm, lim, 0.01).passed


def test_ordering_monotone_energy():
    loading = Loading.ramp(3.0)
    lim = vanishing_viscosity_limit(LIN, loading, [1e-2, 1e-3])
    mm = run_minimizing_movements(LIN, loading, MMParams.uniform(3.0, 3000))
    rep = ver.check_ordering(lim, mm, 0.02)
    assert rep.passed
    grid = mm.times
    assert np.max(np.abs(lim.left_constant(grid) - mm.left_constant(grid))) <= 0.02


def test_discrete_inclusion(mm_zigzag):
    assert ver.check_discrete_inclusion(mm_zigzag, DR, CUBIC, Loading.paper()).passed
    t = np.linspace(0, 1, 11)
    still = hand_traj(t, np.zeros(11), t)
    assert ver.check_discrete_inclusion(still, DR, CUBIC).passed
    wrong = hand_traj(t, -t, t)
    assert not ver.check_discrete_inclusion(wrong, DR, CUBIC).passed


def test_discrete_inclusion_viscous_member(vv_ramp):
    _, lim = vv_ramp
    eps, tr = lim.members[-1]
    assert ver.check_discrete_inclusion(tr, DR, CUBIC, tol=1e-7).passed


def test_barriers():
    v = np.array([0.0, 0.5, -0.5])
    assert ver.check_barriers(v, -1.0, 1.0, 0.0).passed
    assert not ver.check_barriers(v, -1.0, 0.25, 0.0).passed
