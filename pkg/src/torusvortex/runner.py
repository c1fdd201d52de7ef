"""Scenario execution: reduced-flow runs, PDE runs, and convergence studies.

File outputs per scenario (under the output directory):

- ``trajectory.csv``    : t, then per vortex j the lifted coordinates
  ``x{j}_lift, y{j}_lift``, torus image ``x{j}_torus, y{j}_torus`` and
  velocities ``vx{j}, vy{j}``, then ``conserved_energy, qx, qy``.
- ``trajectories.svg``  : torus-image paths, '+' and 'x' markers by degree.
- ``coordinates.svg``   : coordinate-vs-time panel (fig2-* presets).
- ``diagnostics.csv``   : per-frame t, energy, momentum_x, momentum_y,
  hamiltonian (PDE runs; suffixed by eps when several are run).
- ``convergence.csv``   : eps, dev rows (compare runs), plus
  ``convergence.svg``.

Runs are deterministic: identical specs produce byte-identical CSV files.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, plots, wave
from .energy import _branch_raw, _energy_raw
from .green import GreenEvaluator, build_green
from .harmonic import initial_data
from .scenarios import ScenarioSpec
from .torus import periodic_distance, torus_image

EXIT_OK = 0
EXIT_INVALID_SPEC = 2
EXIT_COLLISION = 3
EXIT_BLOWUP = 4


@dataclass
class RunResult:
    exit_code: int
    files: list = field(default_factory=list)
    termination: str = "completed"
    collision_time: float | None = None
    deviations: list = field(default_factory=list)
    messages: list = field(default_factory=list)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _trajectory_header(n_vortices: int):
    cols = ["t"]
    for j in range(1, n_vortices + 1):
        cols += [f"x{j}_lift", f"y{j}_lift", f"x{j}_torus", f"y{j}_torus",
                 f"vx{j}", f"vy{j}"]
    cols += ["conserved_energy", "qx", "qy"]
    return cols


def _trajectory_rows(times, lifted, velocities, energies, branch_values):
    torus = torus_image(lifted)
    for s, t in enumerate(times):
        row = [t]
        for j in range(lifted.shape[1]):
            row += [lifted[s, j, 0], lifted[s, j, 1],
                    torus[s, j, 0], torus[s, j, 1],
                    velocities[s, j, 0], velocities[s, j, 1]]
        row += [energies[s], branch_values[s, 0], branch_values[s, 1]]
        yield row


def _eps_label(eps: float) -> str:
    return format(eps, "g")


def _out_dir(spec: ScenarioSpec) -> str:
    out = spec.output_dir or os.path.join("runs", spec.name)
    os.makedirs(out, exist_ok=True)
    return out


def run_scenario(spec: ScenarioSpec, green: GreenEvaluator | None = None) -> RunResult:
    """Execute one scenario and write its artifacts; never raises for
    collisions (reported via exit code 3)."""
    green = green or build_green()
    if spec.mode == "ode":
        return _run_ode(spec, green)
    if spec.mode == "pde":
        return _run_pde_mode(spec, green)
    return compare(spec, green)


def _run_ode(spec: ScenarioSpec, green: GreenEvaluator) -> RunResult:
    out = _out_dir(spec)
    config = spec.vortex_config()
    traj = dynamics.integrate(config, green, dt=spec.dt, t_end=spec.t_end)
    files = []

    path = os.path.join(out, "trajectory.csv")
    _write_csv(path, _trajectory_header(config.count),
               _trajectory_rows(traj.times, traj.positions, traj.velocities,
                                traj.energies, traj.branch_values))
    files.append(path)

    path = os.path.join(out, "trajectories.svg")
    plots.save_trajectory_plot(
        path, [traj.torus_positions[:, j] for j in range(config.count)],
        traj.degrees, title=spec.name)
    files.append(path)

    if spec.name.startswith("fig2"):
        path = os.path.join(out, "coordinates.svg")
        plots.save_coordinate_plot(
            path, traj.times,
            [traj.positions[:, j] for j in range(config.count)],
            title=f"{spec.name}: coordinates vs time")
        files.append(path)

    messages = [f"reduced-flow run: {traj.termination} at t={traj.times[-1]:g}"]
    if traj.termination == "collision":
        messages.append(f"collision time {traj.collision_time:g}")
    code = EXIT_COLLISION if traj.termination == "collision" else EXIT_OK
    return RunResult(exit_code=code, files=files, termination=traj.termination,
                     collision_time=traj.collision_time, messages=messages)


def _tracked_trajectory_arrays(config, run, green):
    """Tracked PDE paths in the trajectory.csv layout (FD velocities)."""
    full = [i for i, dets in enumerate(run.detections)
            if len(dets) == config.count]
    last = full[-1] if full else 0
    frames = run.detections[:last + 1]
    times = np.asarray(run.frame_times[:last + 1])
    tracks = wave.track(frames, step_bound=0.05)
    order = []
    for j in range(config.count):
        cand = min(
            (tr for tr in tracks if tr.degree == config.degrees[j]),
            key=lambda tr: periodic_distance(tr.positions[0],
                                             config.positions[j]))
        order.append(cand)
    lifted = np.stack([tr.positions for tr in order], axis=1)
    velocities = np.gradient(lifted, times, axis=0) if len(times) > 1 \
        else np.zeros_like(lifted)
    degrees = np.asarray(config.degrees)
    offset = np.asarray(config.branch_offset)
    energies = np.array([
        _energy_raw(lifted[s], degrees, offset, green)
        + 0.5 * np.pi * float(np.sum(velocities[s] ** 2))
        for s in range(len(times))
    ])
    branch_values = np.array([
        _branch_raw(lifted[s], degrees, offset) for s in range(len(times))
    ])
    return times, lifted, velocities, energies, branch_values, tracks


def _run_pde_mode(spec: ScenarioSpec, green: GreenEvaluator) -> RunResult:
    out = _out_dir(spec)
    config = spec.vortex_config()
    files, messages = [], []
    termination, collision_time = "completed", None
    multiple = len(spec.eps_list) > 1
    for eps in spec.eps_list:
        tag = f"_eps{_eps_label(eps)}" if multiple else ""
        state0 = initial_data(config, eps, green, spec.grid)
        run = wave.run_pde(state0, t_end=spec.t_end, drift_tol=1e-3,
                           expected_count=config.count)

        path = os.path.join(out, f"diagnostics{tag}.csv")
        _write_csv(path, ["t", "energy", "momentum_x", "momentum_y",
                          "hamiltonian"],
                   ([t, e, m[0], m[1], h] for t, e, m, h in
                    zip(run.frame_times, run.energies, run.momenta,
                        run.hamiltonians)))
        files.append(path)

        times, lifted, velocities, energies, branch_values, tracks = \
            _tracked_trajectory_arrays(config, run, green)
        path = os.path.join(out, f"trajectory{tag}.csv")
        _write_csv(path, _trajectory_header(config.count),
                   _trajectory_rows(times, lifted, velocities, energies,
                                    branch_values))
        files.append(path)

        path = os.path.join(out, f"trajectories{tag}.svg")
        plots.save_trajectory_plot(
            path, [np.mod(lifted[:, j], 1.0) for j in range(config.count)],
            config.degrees, title=f"{spec.name} (eps={_eps_label(eps)})")
        files.append(path)

        messages.append(
            f"eps={_eps_label(eps)}: dt={run.dt:g} "
            f"relative Hamiltonian drift={run.relative_drift:.3e} "
            f"{run.termination}"
            + (f" at t={run.collision_time:g}"
               if run.collision_time is not None else ""))
        if run.termination == "collision":
            termination = "collision"
            collision_time = run.collision_time
    code = EXIT_COLLISION if termination == "collision" else EXIT_OK
    return RunResult(exit_code=code, files=files, termination=termination,
                     collision_time=collision_time, messages=messages)


def compare(spec: ScenarioSpec, green: GreenEvaluator | None = None) -> RunResult:
    """PDE-vs-reduced-flow convergence: dev(eps) over the common window.

    Each PDE run keeps its vortices only until the finite-eps pair
    annihilates, so deviations are compared over [0, min(t_end, earliest
    vortex lifetime)]; the sup over a window where a run has no vortices
    would be undefined.  Writes convergence.csv with one (eps, dev) row per
    eps and asserts the deviations decrease.
    """
    green = green or build_green()
    out = _out_dir(spec)
    config = spec.vortex_config()
    files, messages = [], []

    reference = dynamics.integrate(config, green, dt=spec.dt,
                                   t_end=spec.t_end)
    ref_horizon = reference.times[-1]

    runs = []
    for eps in spec.eps_list:
        state0 = initial_data(config, eps, green, spec.grid)
        run = wave.run_pde(state0, t_end=spec.t_end, drift_tol=1e-3,
                           expected_count=config.count)
        full = [i for i, dets in enumerate(run.detections)
                if len(dets) == config.count]
        times = np.asarray(run.frame_times)[full]
        frames = [run.detections[i] for i in full]
        runs.append((eps, run, times, frames))
        messages.append(
            f"eps={_eps_label(eps)}: vortices tracked to t={times[-1]:g}"
            f" (dt={run.dt:g}, drift={run.relative_drift:.3e})")

    t_window = min(min(times[-1] for _, _, times, _ in runs),
                   ref_horizon, spec.t_end)
    messages.append(f"comparison window [0, {t_window:g}]")

    deviations = []
    for eps, run, times, frames in runs:
        keep = times <= t_window + 1e-12
        tracks = wave.track([f for f, k in zip(frames, keep) if k],
                            step_bound=0.05)
        window_times = times[keep]
        dev = 0.0
        for tr in tracks:
            j = min((j for j in range(config.count)
                     if config.degrees[j] == tr.degree),
                    key=lambda j: periodic_distance(tr.positions[0],
                                                    config.positions[j]))
            ode_path = reference.interpolated(window_times)[:, j, :]
            dev = max(dev, float(np.max(periodic_distance(
                tr.torus_positions, np.mod(ode_path, 1.0)))))
        deviations.append((eps, dev))
        messages.append(f"eps={_eps_label(eps)}: dev={dev:.6f}")

    path = os.path.join(out, "convergence.csv")
    _write_csv(path, ["eps", "dev"], ([e, d] for e, d in deviations))
    files.append(path)

    path = os.path.join(out, "convergence.svg")
    plots.save_convergence_plot(path, [e for e, _ in deviations],
                                [d for _, d in deviations],
                                title=f"{spec.name}: PDE vs reduced flow")
    files.append(path)

    path = os.path.join(out, "trajectory.csv")
    _write_csv(path, _trajectory_header(config.count),
               _trajectory_rows(reference.times, reference.positions,
                                reference.velocities, reference.energies,
                                reference.branch_values))
    files.append(path)

    path = os.path.join(out, "trajectories.svg")
    plots.save_trajectory_plot(
        path,
        [reference.torus_positions[:, j] for j in range(config.count)],
        reference.degrees, title=f"{spec.name}: reduced flow")
    files.append(path)

    decreasing = all(a[1] > b[1] for a, b in zip(deviations, deviations[1:]))
    messages.append("dev decreasing with eps: " + ("yes" if decreasing else "NO"))
    return RunResult(exit_code=EXIT_OK, files=files,
                     deviations=deviations, messages=messages)
