import os
import subprocess
import sys

import numpy as np
import pytest

from torusvortex.cli import main as cli_main
from torusvortex.runner import (
    EXIT_COLLISION,
    EXIT_INVALID_SPEC,
    EXIT_OK,
    compare,
    run_scenario,
)
from torusvortex.scenarios import (
    PRESETS,
    ScenarioError,
    ScenarioSpec,
    apply_overrides,
    load_scenario,
    parse_scenario_file,
)


def test_presets_encode_captioned_experiments():
    assert PRESETS["fig1-left"].positions == ((0.3, 0.0), (0.7, 0.0))
    assert PRESETS["fig1-left"].branch_offset == (0, 0)
    assert PRESETS["fig1-right"].positions == ((0.3, 0.0), (0.7, 0.0))
    assert PRESETS["fig1-right"].branch_offset == (1, 0)
    assert PRESETS["fig2-left"].positions == ((0.48, 0.0), (0.52, 0.0))
    assert PRESETS["fig2-left"].branch_offset == (0, 0)
    assert PRESETS["fig2-right"].positions == ((0.48, 0.0), (0.52, 0.0))
    assert PRESETS["fig2-right"].branch_offset == (0, 2)
    for spec in PRESETS.values():
        assert spec.degrees == (1, -1)
        assert spec.dt == 5e-6
        assert spec.mode == "ode"


def test_spec_validation_errors():
    with pytest.raises(ScenarioError):
        ScenarioSpec(name="x", positions=((0.1, 0.1),), degrees=(1,))
    with pytest.raises(ScenarioError):
        ScenarioSpec(name="x", positions=((0.1, 0.1), (0.6, 0.6)),
                     degrees=(1, -1), mode="magic")
    with pytest.raises(ScenarioError):
        ScenarioSpec(name="x", positions=((0.1, 0.1), (0.6, 0.6)),
                     degrees=(1, -1), grid=100)
    with pytest.raises(ScenarioError):
        ScenarioSpec(name="x", positions=((0.1, 0.1), (0.6, 0.6)),
                     degrees=(1, -1), dt=-1.0)
    with pytest.raises(ScenarioError):
        ScenarioSpec(name="x", positions=((0.1, 0.1), (0.6, 0.6)),
                     degrees=(1, -1), mode="pde", eps_list=(1 / 16,), grid=64)
    with pytest.raises(ScenarioError):
        ScenarioSpec(name="x", positions=((0.1, 0.1), (0.6, 0.6)),
                     degrees=(1, -1), mode="compare", eps_list=(1 / 8,))


def test_parse_scenario_file(tmp_path):
    cfg = tmp_path / "dipole.cfg"
    cfg.write_text(
        "# a comment\n"
        "name = tight-dipole\n"
        "positions = 0.48,0 ; 0.52,0\n"
        "degrees = 1,-1\n"
        "branch_offset = 0,2\n"
        "dt = 1e-5\n"
        "t_end = 0.5  # trailing comment\n"
        "mode = ode\n"
        "grid = 128\n",
        encoding="utf-8")
    spec = parse_scenario_file(cfg)
    assert spec.name == "tight-dipole"
    assert spec.positions == ((0.48, 0.0), (0.52, 0.0))
    assert spec.branch_offset == (0, 2)
    assert spec.dt == 1e-5 and spec.t_end == 0.5 and spec.grid == 128


def test_parse_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("positions = 0.1,0\nwat = 7\n", encoding="utf-8")
    with pytest.raises(ScenarioError):
        parse_scenario_file(cfg)


def test_parse_rejects_missing_keys(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("name = y\n", encoding="utf-8")
    with pytest.raises(ScenarioError):
        parse_scenario_file(cfg)


def test_load_scenario_unknown_source():
    with pytest.raises(ScenarioError):
        load_scenario("no-such-preset")


def test_apply_overrides():
    spec = apply_overrides(PRESETS["fig1-left"], dt=1e-5, t_end=0.2,
                           eps=[0.125], grid=128, mode="pde",
                           output_dir="somewhere")
    assert (spec.dt, spec.t_end, spec.mode) == (1e-5, 0.2, "pde")
    assert spec.eps_list == (0.125,) and spec.grid == 128
    assert spec.output_dir == "somewhere"
    # overrides re-validate
    with pytest.raises(ScenarioError):
        apply_overrides(PRESETS["fig1-left"], mode="compare",
                        eps=[0.125])


# -- runner artifacts ----------------------------------------------------------

def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_ode_run_artifacts_and_determinism(tmp_path, green):
    spec = apply_overrides(PRESETS["fig2-left"], t_end=0.03,
                           output_dir=str(tmp_path / "a"))
    result = run_scenario(spec, green)
    assert result.exit_code == EXIT_COLLISION
    assert result.termination == "collision"
    assert result.collision_time == pytest.approx(0.02486, abs=5e-4)
    names = {os.path.basename(p) for p in result.files}
    assert names == {"trajectory.csv", "trajectories.svg", "coordinates.svg"}

    with open(tmp_path / "a" / "trajectory.csv", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    assert header == ["t",
                      "x1_lift", "y1_lift", "x1_torus", "y1_torus", "vx1", "vy1",
                      "x2_lift", "y2_lift", "x2_torus", "y2_torus", "vx2", "vy2",
                      "conserved_energy", "qx", "qy"]

    spec_b = apply_overrides(PRESETS["fig2-left"], t_end=0.03,
                             output_dir=str(tmp_path / "b"))
    run_scenario(spec_b, green)
    assert _read(tmp_path / "a" / "trajectory.csv") == \
        _read(tmp_path / "b" / "trajectory.csv")


def test_pde_run_artifacts(tmp_path, green):
    spec = apply_overrides(PRESETS["fig1-left"], mode="pde", t_end=0.02,
                           eps=[0.125], grid=64,
                           output_dir=str(tmp_path))
    result = run_scenario(spec, green)
    assert result.exit_code == EXIT_OK
    names = {os.path.basename(p) for p in result.files}
    assert names == {"diagnostics.csv", "trajectory.csv", "trajectories.svg"}
    diag = np.genfromtxt(tmp_path / "diagnostics.csv", delimiter=",",
                         names=True)
    assert set(diag.dtype.names) == {"t", "energy", "momentum_x",
                                     "momentum_y", "hamiltonian"}
    drift = np.max(np.abs(diag["hamiltonian"] - diag["hamiltonian"][0]))
    assert drift / abs(diag["hamiltonian"][0]) < 1e-3


def test_compare_run_artifacts(tmp_path, green):
    spec = apply_overrides(PRESETS["fig1-left"], mode="compare", t_end=0.02,
                           eps=[0.125, 0.0625], grid=128,
                           output_dir=str(tmp_path))
    result = compare(spec, green)
    assert result.exit_code == EXIT_OK
    assert len(result.deviations) == 2
    rows = np.genfromtxt(tmp_path / "convergence.csv", delimiter=",",
                         names=True)
    assert set(rows.dtype.names) == {"eps", "dev"}
    assert (tmp_path / "convergence.svg").exists()
    assert (tmp_path / "trajectory.csv").exists()


def test_fig2_right_bends_paths_in_outputs(tmp_path, green):
    # the (0, 2) branch offset pushes the dipole off the x axis; the CSV
    # shows nonzero y and the coordinate panel is produced
    spec = apply_overrides(PRESETS["fig2-right"], t_end=0.02,
                           output_dir=str(tmp_path))
    result = run_scenario(spec, green)
    rows = np.genfromtxt(tmp_path / "trajectory.csv", delimiter=",",
                         names=True)
    assert max(np.max(np.abs(rows["y1_lift"])),
               np.max(np.abs(rows["y2_lift"]))) > 1e-3
    assert (tmp_path / "coordinates.svg").exists()
    assert (tmp_path / "trajectories.svg").exists()
    assert result.exit_code in (EXIT_OK, EXIT_COLLISION)


def test_compare_on_checkerboard_equilibrium(tmp_path, green):
    # both sides are stationary, so the deviation is bounded by the
    # detection resolution
    spec = ScenarioSpec(
        name="checkerboard",
        positions=((0.0, 0.0), (0.5, 0.5), (0.5, 0.0), (0.0, 0.5)),
        degrees=(1, 1, -1, -1), mode="compare", t_end=0.02,
        eps_list=(1 / 8, 1 / 16), grid=128,
        output_dir=str(tmp_path))
    result = compare(spec, green)
    for _, dev in result.deviations:
        assert dev < 2.0 / 128


def test_ode_run_robust_to_step_halving(tmp_path, green):
    # the default-step run and a halved-step run agree far below 1e-8
    results = {}
    for label, dt in (("a", 5e-6), ("b", 2.5e-6)):
        spec = apply_overrides(PRESETS["fig1-left"], dt=dt, t_end=0.01,
                               output_dir=str(tmp_path / label))
        run_scenario(spec, green)
        rows = np.genfromtxt(tmp_path / label / "trajectory.csv",
                             delimiter=",", names=True)
        results[label] = rows
    cols = ["x1_lift", "y1_lift", "x2_lift", "y2_lift"]
    shared = np.linspace(0.0, 0.01, 40)
    gap = max(
        np.max(np.abs(np.interp(shared, results["a"]["t"], results["a"][c])
                      - np.interp(shared, results["b"]["t"], results["b"][c])))
        for c in cols)
    assert gap < 1e-8


# -- CLI ------------------------------------------------------------------------

def test_cli_ok_run(tmp_path):
    code = cli_main(["run", "fig1-left", "--t-end", "0.001",
                     "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / "trajectory.csv").exists()
    assert (tmp_path / "trajectories.svg").exists()


def test_cli_collision_exit_code(tmp_path):
    code = cli_main(["run", "fig2-left", "--t-end", "0.05",
                     "--out", str(tmp_path)])
    assert code == EXIT_COLLISION


def test_cli_invalid_scenario(tmp_path):
    assert cli_main(["run", "no-such-thing",
                     "--out", str(tmp_path)]) == EXIT_INVALID_SPEC
    assert cli_main(["run", "fig1-left", "--grid", "100",
                     "--out", str(tmp_path)]) == EXIT_INVALID_SPEC
    assert cli_main(["run", "fig1-left", "--mode", "pde", "--eps", "1.5",
                     "--out", str(tmp_path)]) == EXIT_INVALID_SPEC


def test_cli_subprocess_entry(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "torusvortex.cli", "run", "fig1-left",
         "--t-end", "0.0005", "--out", str(tmp_path)],
        capture_output=True, text=True, timeout=600)
    assert proc.returncode == EXIT_OK, proc.stderr
    assert "wrote" in proc.stdout


def test_cli_config_file_run(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "name = custom\n"
        "positions = 0.25,0.25 ; 0.75,0.75\n"
        "degrees = 1,-1\n"
        "t_end = 0.001\n",
        encoding="utf-8")
    out = tmp_path / "out"
    assert cli_main(["run", str(cfg), "--out", str(out)]) == EXIT_OK
    assert (out / "trajectory.csv").exists()
