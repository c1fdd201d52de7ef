"""Second-order vortex dynamics driven by the renormalized energy.

Integrates  a_j'' = -(1/pi) * grad_j W(a; q(a))  with classical fourth-order
Runge-Kutta at fixed step.  Positions are integrated as lifts (never
wrapped), so the branch offset stays constant and q(a) is continuous; the
torus image is a derived view.  Along exact solutions the quantity
W(a; q(a)) + (pi/2) * sum_j |a_j'|^2 is conserved, which serves as the
integration diagnostic.
"""

from dataclasses import dataclass, replace

import numpy as np

from .energy import VortexConfig, _branch_raw, _energy_raw, _gradient_raw
from .green import GreenEvaluator
from .torus import min_pairwise_distance, torus_image

#: Runs stop once the smallest pairwise periodic distance falls below this.
COLLISION_THRESHOLD = 1e-3


@dataclass(frozen=True)
class ReducedState:
    """Lifted positions, velocities, degrees, and branch offset at time t."""

    t: float
    positions: np.ndarray       # (2N, 2) lifted
    velocities: np.ndarray      # (2N, 2)
    degrees: np.ndarray         # (2N,) constant in time
    branch_offset: np.ndarray   # (2,) integer, constant in time

    @classmethod
    def from_config(cls, config: VortexConfig, velocities=None, t: float = 0.0):
        v = np.zeros_like(config.positions) if velocities is None \
            else np.asarray(velocities, dtype=float)
        if v.shape != config.positions.shape:
            raise ValueError("velocities must have shape (2N, 2)")
        return cls(t=t, positions=np.array(config.positions), velocities=v,
                   degrees=np.array(config.degrees),
                   branch_offset=np.array(config.branch_offset))

    def branch_momentum(self) -> np.ndarray:
        return _branch_raw(self.positions, self.degrees, self.branch_offset)


@dataclass(frozen=True)
class Trajectory:
    """Sampled run of the reduced flow, at a fixed output stride."""

    times: np.ndarray            # (S,)
    positions: np.ndarray        # (S, 2N, 2) lifted
    velocities: np.ndarray       # (S, 2N, 2)
    energies: np.ndarray         # (S,) conserved quantity W + (pi/2)|a'|^2
    branch_values: np.ndarray    # (S, 2) q(a) at each sample
    degrees: np.ndarray          # (2N,)
    branch_offset: np.ndarray    # (2,)
    termination: str             # "completed" | "collision"
    collision_time: float | None = None

    @property
    def torus_positions(self) -> np.ndarray:
        return torus_image(self.positions)

    def interpolated(self, times):
        """Lifted positions linearly interpolated at the given times."""
        times = np.asarray(times, dtype=float)
        out = np.empty(times.shape + self.positions.shape[1:])
        for j in range(self.positions.shape[1]):
            for c in range(2):
                out[..., j, c] = np.interp(times, self.times,
                                           self.positions[:, j, c])
        return out


def derivatives(state: ReducedState, green: GreenEvaluator):
    """Right-hand side of the first-order system: (velocities, accelerations).

    accelerations_j = -(1/pi) * grad_j W(a; q(a)).
    """
    grad = _gradient_raw(state.positions, state.degrees,
                         state.branch_offset, green)
    return state.velocities, -grad / np.pi


def conserved_energy(state: ReducedState, green: GreenEvaluator) -> float:
    """W(a; q(a)) + (pi/2) * sum_j |velocity_j|^2."""
    w = _energy_raw(state.positions, state.degrees, state.branch_offset, green)
    return w + 0.5 * np.pi * float(np.sum(state.velocities**2))


def _rk4_arrays(pos, vel, degrees, offset, dt, green):
    def acc(p):
        return _gradient_raw(p, degrees, offset, green) / (-np.pi)

    k1v = acc(pos)
    p2 = pos + (0.5 * dt) * vel
    k2v = acc(p2)
    v2 = vel + (0.5 * dt) * k1v
    p3 = pos + (0.5 * dt) * v2
    k3v = acc(p3)
    v3 = vel + (0.5 * dt) * k2v
    p4 = pos + dt * v3
    k4v = acc(p4)
    v4 = vel + dt * k3v
    new_pos = pos + (dt / 6.0) * (vel + 2.0 * v2 + 2.0 * v3 + v4)
    new_vel = vel + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return new_pos, new_vel


def rk4_step(state: ReducedState, dt: float, green: GreenEvaluator) -> ReducedState:
    """One classical RK4 update of (positions, velocities); lifts unwrapped."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    pos, vel = _rk4_arrays(state.positions, state.velocities,
                           state.degrees, state.branch_offset, dt, green)
    return replace(state, t=state.t + dt, positions=pos, velocities=vel)


def integrate(config: VortexConfig, green: GreenEvaluator,
              velocities=None, dt: float = 5e-6, t_end: float = 1.0,
              output_stride: int | None = None,
              collision_threshold: float = COLLISION_THRESHOLD) -> Trajectory:
    """Run the reduced flow until t_end or the first near-collision.

    Samples every output_stride steps (default: about 2000 samples per run).
    Initial velocities default to zero.  The final state is always included
    as a sample, and the termination reason is reported rather than raised.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    n_steps = max(1, int(round(t_end / dt)))
    if output_stride is None:
        output_stride = max(1, n_steps // 2000)
    if output_stride < 1:
        raise ValueError("output_stride must be a positive integer")

    degrees = np.asarray(config.degrees)
    offset = np.array(config.branch_offset)
    pos = np.array(config.positions, dtype=float)
    vel = np.zeros_like(pos) if velocities is None \
        else np.array(velocities, dtype=float)
    if vel.shape != pos.shape:
        raise ValueError("velocities must have shape (2N, 2)")

    times, samples_p, samples_v = [0.0], [pos.copy()], [vel.copy()]
    termination, collision_time = "completed", None
    for step in range(1, n_steps + 1):
        pos, vel = _rk4_arrays(pos, vel, degrees, offset, dt, green)
        t = step * dt
        collided = min_pairwise_distance(pos) < collision_threshold
        if step % output_stride == 0 or step == n_steps or collided:
            times.append(t)
            samples_p.append(pos.copy())
            samples_v.append(vel.copy())
        if collided:
            termination, collision_time = "collision", t
            break

    times = np.asarray(times)
    samples_p = np.asarray(samples_p)
    samples_v = np.asarray(samples_v)
    energies = np.array([
        _energy_raw(p, degrees, offset, green)
        + 0.5 * np.pi * float(np.sum(v**2))
        for p, v in zip(samples_p, samples_v)
    ])
    branch_values = np.array([
        _branch_raw(p, degrees, offset) for p in samples_p
    ])
    return Trajectory(times=times, positions=samples_p, velocities=samples_v,
                      energies=energies, branch_values=branch_values,
                      degrees=np.array(degrees), branch_offset=offset,
                      termination=termination, collision_time=collision_time)
