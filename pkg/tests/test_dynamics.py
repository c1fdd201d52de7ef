import numpy as np
import pytest

from torusvortex import (
    ReducedState,
    VortexConfig,
    conserved_energy,
    derivatives,
    integrate,
    renormalized_energy,
    rk4_step,
)
from torusvortex.green import TAU

from oracles import energy_gradient_fd


def test_checkerboard_accelerations_vanish(checkerboard, green):
    state = ReducedState.from_config(checkerboard)
    _, acc = derivatives(state, green)
    assert np.max(np.abs(acc)) < 1e-10


def test_checkerboard_step_is_fixed_point(checkerboard, green):
    state = ReducedState.from_config(checkerboard)
    stepped = rk4_step(state, 1e-2, green)
    assert np.max(np.abs(stepped.positions - state.positions)) < 1e-14
    assert np.max(np.abs(stepped.velocities)) < 1e-12


def test_dipole_acceleration_symmetry(fig1_left, green):
    state = ReducedState.from_config(fig1_left)
    _, acc = derivatives(state, green)
    assert np.max(np.abs(acc[:, 1])) < 1e-12


def test_acceleration_matches_finite_difference_gradient(fig1_left, green):
    state = ReducedState.from_config(fig1_left)
    _, acc = derivatives(state, green)
    fd = -energy_gradient_fd(fig1_left, green) / np.pi
    assert np.max(np.abs(acc - fd)) / np.max(np.abs(acc)) < 1e-6


def test_rk4_local_order(fig1_left, green):
    # error against a dt/10 reference at t = 1e-3 scales like dt^4
    t_end = 1e-3

    def endpoint(dt):
        state = ReducedState.from_config(fig1_left)
        # larger initial velocity makes the local error measurable
        state = ReducedState(t=0.0, positions=state.positions,
                             velocities=np.array([[2.0, 1.0], [-1.0, 0.5]]),
                             degrees=state.degrees,
                             branch_offset=state.branch_offset)
        n = round(t_end / dt)
        for _ in range(n):
            state = rk4_step(state, dt, green)
        return state.positions

    errors = []
    for dt in (5e-4, 2.5e-4):
        ref = endpoint(dt / 10.0)
        errors.append(np.max(np.abs(endpoint(dt) - ref)))
    ratio = errors[0] / errors[1]
    assert 8.0 < ratio < 32.0


def test_step_preserves_branch_bookkeeping(fig1_left, green):
    state = ReducedState.from_config(fig1_left)
    stepped = rk4_step(state, 1e-4, green)
    assert np.array_equal(stepped.branch_offset, state.branch_offset)
    weighted = stepped.degrees @ stepped.positions
    residual = stepped.branch_momentum() / TAU - weighted
    assert np.allclose(residual, state.branch_offset, atol=1e-12)


def test_conserved_energy_at_rest_equals_W(fig1_left, green):
    state = ReducedState.from_config(fig1_left)
    assert conserved_energy(state, green) == pytest.approx(
        renormalized_energy(fig1_left, green), abs=1e-14)


def test_integrate_validates_arguments(fig1_left, green):
    with pytest.raises(ValueError):
        integrate(fig1_left, green, dt=-1e-6, t_end=0.1)
    with pytest.raises(ValueError):
        integrate(fig1_left, green, dt=1e-6, t_end=0.0)
    with pytest.raises(ValueError):
        integrate(fig1_left, green, velocities=np.zeros((3, 2)), dt=1e-6,
                  t_end=1e-5)


def test_fine_step_reference_agreement(fig1_left, green):
    # default step against a 10x finer reference over a common horizon
    t_end = 0.01
    coarse = integrate(fig1_left, green, dt=5e-6, t_end=t_end)
    fine = integrate(fig1_left, green, dt=5e-7, t_end=t_end)
    times = np.linspace(0.0, t_end, 50)
    gap = np.abs(coarse.interpolated(times) - fine.interpolated(times))
    assert gap.max() < 1e-8


def test_axis_symmetry_is_preserved(fig1_left, green):
    traj = integrate(fig1_left, green, dt=5e-6, t_end=0.02)
    assert np.max(np.abs(traj.positions[..., 1])) < 1e-10


def test_branch_offset_bends_trajectories(green):
    cfg = VortexConfig([(0.48, 0.0), (0.52, 0.0)], [1, -1], (0, 2))
    traj = integrate(cfg, green, dt=5e-6, t_end=0.02)
    assert np.max(np.abs(traj.positions[..., 1])) > 1e-3


def test_time_reversibility(fig1_left, green):
    t_end = 0.02
    forward = integrate(fig1_left, green, dt=5e-6, t_end=t_end)
    back = integrate(
        VortexConfig(forward.positions[-1], fig1_left.degrees,
                     fig1_left.branch_offset),
        green, velocities=-forward.velocities[-1], dt=5e-6, t_end=t_end)
    assert np.max(np.abs(back.positions[-1]
                         - np.asarray(fig1_left.positions))) < 1e-6


def test_collision_stop_and_report(green):
    cfg = VortexConfig([(0.48, 0.0), (0.52, 0.0)], [1, -1])
    traj = integrate(cfg, green, dt=5e-6, t_end=1.0)
    assert traj.termination == "collision"
    assert traj.collision_time is not None
    assert traj.times[-1] == pytest.approx(traj.collision_time)
    from torusvortex.torus import min_pairwise_distance
    assert min_pairwise_distance(traj.positions[-1]) < 1e-3
    # energy samples stay near the initial value up to the stop
    rel = np.abs(traj.energies - traj.energies[0]) / abs(traj.energies[0])
    assert rel.max() < 1e-6


def test_equilibrium_integrates_to_itself(checkerboard, green):
    traj = integrate(checkerboard, green, dt=1e-3, t_end=0.01)
    assert traj.termination == "completed"
    assert np.max(np.abs(traj.positions - traj.positions[0])) < 1e-12


def test_trajectory_sampling_and_interpolation(fig1_left, green):
    traj = integrate(fig1_left, green, dt=1e-5, t_end=1e-3, output_stride=10)
    assert np.all(np.diff(traj.times) > 0)
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(1e-3)
    mid = traj.interpolated(np.array([traj.times[3]]))
    assert np.allclose(mid[0], traj.positions[3], atol=1e-15)
    assert traj.torus_positions.min() >= 0.0
    assert traj.torus_positions.max() < 1.0
