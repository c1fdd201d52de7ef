"""Static SVG figures for scenario runs.

Figures are rendered with matplotlib's Agg backend and saved as SVG with
glyphs converted to paths, so the files are self-contained.  Trajectory
panels show the torus fundamental domain [0, 1)^2 with '+' markers along
paths of degree +1 vortices and 'x' markers along degree -1 paths.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

plt.rcParams["svg.fonttype"] = "path"

_MARKERS = {1: "+", -1: "x"}
_COLORS = {1: "tab:red", -1: "tab:blue"}


def _split_at_wraps(path):
    """Insert NaN rows where the torus image jumps across the boundary."""
    jumps = np.any(np.abs(np.diff(path, axis=0)) > 0.5, axis=1)
    if not jumps.any():
        return path
    pieces = []
    start = 0
    for idx in np.flatnonzero(jumps):
        pieces.append(path[start:idx + 1])
        pieces.append(np.full((1, 2), np.nan))
        start = idx + 1
    pieces.append(path[start:])
    return np.vstack(pieces)


def save_trajectory_plot(path, torus_paths, degrees, title,
                         markers_per_path: int = 40):
    """Torus-image vortex paths with degree markers.

    torus_paths: sequence of (S_i, 2) arrays in [0, 1)^2, one per vortex.
    """
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    for pos, deg in zip(torus_paths, degrees):
        pos = np.asarray(pos)
        ax.plot(*_split_at_wraps(pos).T, color=_COLORS[deg],
                linewidth=0.8, alpha=0.6)
        stride = max(1, len(pos) // markers_per_path)
        ax.plot(pos[::stride, 0], pos[::stride, 1], linestyle="none",
                marker=_MARKERS[deg], color=_COLORS[deg], markersize=5,
                label=f"degree {deg:+d}")
        ax.plot(*pos[0], marker="o", color=_COLORS[deg], markersize=4,
                fillstyle="none")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.0)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    handles, labels = ax.get_legend_handles_labels()
    seen = dict(zip(labels, handles))
    ax.legend(seen.values(), seen.keys(), loc="upper right", fontsize=8)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


def save_coordinate_plot(path, times, lifted_paths, title):
    """Per-vortex coordinate histories x_j(t), y_j(t) (lifted values)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    styles = ["-", "--", "-.", ":"]
    for j, pos in enumerate(lifted_paths, start=1):
        pos = np.asarray(pos)
        ax.plot(times, pos[:, 0], styles[(2 * j - 2) % 4],
                label=f"x{j}", linewidth=1.2)
        ax.plot(times, pos[:, 1], styles[(2 * j - 1) % 4],
                label=f"y{j}", linewidth=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("coordinate (lifted)")
    ax.set_title(title)
    ax.legend(fontsize=8, ncol=2)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


def save_convergence_plot(path, eps_values, deviations, title):
    """Deviation between PDE tracks and reduced-flow paths versus eps."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.loglog(eps_values, deviations, "o-")
    for e, d in zip(eps_values, deviations):
        ax.annotate(f"1/{round(1 / e)}", (e, d), textcoords="offset points",
                    xytext=(5, 5), fontsize=8)
    ax.set_xlabel("core size eps")
    ax.set_ylabel("max path deviation")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
