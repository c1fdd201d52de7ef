"""Scenario specifications: presets, config files, and validation.

A scenario file is flat ``key = value`` text ('#' starts a comment):

    name = my-dipole
    positions = 0.3,0 ; 0.7,0
    degrees = 1,-1
    branch_offset = 0,0
    dt = 5e-6
    t_end = 1.0
    mode = ode
    eps_list = 0.125,0.0625,0.03125
    grid = 256

The four built-in presets encode the captioned dipole experiments: a
symmetric dipole at (0.3, 0)/(0.7, 0) with branch offsets (0,0) and (1,0),
and a tight dipole at (0.48, 0)/(0.52, 0) with offsets (0,0) and (0,2).
"""

from dataclasses import dataclass, replace

import numpy as np

from .energy import VortexConfig

MODES = ("ode", "pde", "compare")

DEFAULT_DT = 5e-6
DEFAULT_T_END = 1.0
DEFAULT_EPS = (0.125, 0.0625, 0.03125)
DEFAULT_GRID = 256


class ScenarioError(ValueError):
    """The scenario specification is invalid (CLI exit code 2)."""


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    positions: tuple
    degrees: tuple
    branch_offset: tuple = (0, 0)
    dt: float = DEFAULT_DT
    t_end: float = DEFAULT_T_END
    mode: str = "ode"
    eps_list: tuple = DEFAULT_EPS
    grid: int = DEFAULT_GRID
    output_dir: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ScenarioError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.dt <= 0 or self.t_end <= 0:
            raise ScenarioError("dt and t_end must be positive")
        degrees = tuple(int(d) for d in self.degrees)
        if not degrees or any(abs(d) != 1 for d in degrees):
            raise ScenarioError("degrees must be +1 or -1")
        if sum(degrees) != 0:
            raise ScenarioError("degrees must sum to zero")
        positions = tuple((float(x), float(y)) for x, y in self.positions)
        if len(positions) != len(degrees):
            raise ScenarioError("positions and degrees must have equal length")
        if len({(round(x % 1.0, 12), round(y % 1.0, 12))
                for x, y in positions}) != len(positions):
            raise ScenarioError("positions must be pairwise distinct")
        offset = tuple(int(m) for m in self.branch_offset)
        if len(offset) != 2:
            raise ScenarioError("branch_offset must be an integer pair")
        grid = int(self.grid)
        if grid < 64 or grid & (grid - 1):
            raise ScenarioError("grid must be a power of two >= 64")
        eps_list = tuple(float(e) for e in self.eps_list)
        if self.mode in ("pde", "compare"):
            if not eps_list or any(not 0 < e < 1 for e in eps_list):
                raise ScenarioError("eps_list must contain values in (0, 1)")
            if any(e * grid < 8 for e in eps_list):
                raise ScenarioError("eps * grid must be at least 8")
            if self.mode == "compare":
                if len(eps_list) < 2 or any(
                        b >= a for a, b in zip(eps_list, eps_list[1:])):
                    raise ScenarioError(
                        "compare needs >= 2 strictly decreasing eps values")
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "branch_offset", offset)
        object.__setattr__(self, "eps_list", eps_list)
        object.__setattr__(self, "grid", grid)

    def vortex_config(self) -> VortexConfig:
        return VortexConfig(np.array(self.positions),
                            np.array(self.degrees),
                            np.array(self.branch_offset))


PRESETS = {
    "fig1-left": ScenarioSpec(
        name="fig1-left",
        positions=((0.3, 0.0), (0.7, 0.0)), degrees=(1, -1),
        branch_offset=(0, 0)),
    "fig1-right": ScenarioSpec(
        name="fig1-right",
        positions=((0.3, 0.0), (0.7, 0.0)), degrees=(1, -1),
        branch_offset=(1, 0)),
    "fig2-left": ScenarioSpec(
        name="fig2-left",
        positions=((0.48, 0.0), (0.52, 0.0)), degrees=(1, -1),
        branch_offset=(0, 0)),
    "fig2-right": ScenarioSpec(
        name="fig2-right",
        positions=((0.48, 0.0), (0.52, 0.0)), degrees=(1, -1),
        branch_offset=(0, 2)),
}


def _parse_pairs(text, caster, what):
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 2:
            raise ScenarioError(f"{what}: expected 'a,b' pairs, got {chunk!r}")
        pairs.append((caster(parts[0]), caster(parts[1])))
    return tuple(pairs)


def _parse_list(text, caster):
    return tuple(caster(p.strip()) for p in text.split(",") if p.strip())


def parse_scenario_file(path) -> ScenarioSpec:
    """Read a flat key = value scenario file."""
    fields: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ScenarioError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            try:
                if key == "name":
                    fields["name"] = value
                elif key == "positions":
                    fields["positions"] = _parse_pairs(value, float, "positions")
                elif key == "degrees":
                    fields["degrees"] = _parse_list(value, int)
                elif key == "branch_offset":
                    fields["branch_offset"] = _parse_list(value, int)
                elif key == "dt":
                    fields["dt"] = float(value)
                elif key == "t_end":
                    fields["t_end"] = float(value)
                elif key == "mode":
                    fields["mode"] = value
                elif key == "eps_list":
                    fields["eps_list"] = _parse_list(value, float)
                elif key == "grid":
                    fields["grid"] = int(value)
                else:
                    raise ScenarioError(f"{path}:{lineno}: unknown key {key!r}")
            except ScenarioError:
                raise
            except ValueError as exc:
                raise ScenarioError(f"{path}:{lineno}: {exc}") from exc
    missing = {"positions", "degrees"} - set(fields)
    if missing:
        raise ScenarioError(f"{path}: missing required keys {sorted(missing)}")
    fields.setdefault("name", "scenario")
    try:
        return ScenarioSpec(**fields)
    except TypeError as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(source) -> ScenarioSpec:
    """Resolve a preset name or a config-file path to a ScenarioSpec."""
    if source in PRESETS:
        return PRESETS[source]
    import os
    if os.path.exists(source):
        return parse_scenario_file(source)
    raise ScenarioError(
        f"{source!r} is neither a preset ({', '.join(sorted(PRESETS))}) "
        f"nor an existing config file"
    )


def apply_overrides(spec: ScenarioSpec, dt=None, t_end=None, eps=None,
                    grid=None, mode=None, output_dir=None) -> ScenarioSpec:
    updates = {}
    if dt is not None:
        updates["dt"] = float(dt)
    if t_end is not None:
        updates["t_end"] = float(t_end)
    if eps is not None:
        updates["eps_list"] = tuple(float(e) for e in eps)
    if grid is not None:
        updates["grid"] = int(grid)
    if mode is not None:
        updates["mode"] = mode
    if output_dir is not None:
        updates["output_dir"] = output_dir
    return replace(spec, **updates) if updates else spec
