"""Canonical harmonic map on a grid and well-prepared initial fields.

The canonical map H with prescribed vortices (a_j, d_j) and branch momentum
q is the unit-modulus field whose current j(H) = Im(conj(H) grad H) equals

    j_H(x) = - sum_j d_j J grad F(x - a_j) + J q,       J = [[0, 1], [-1, 0]]

with F the torus Green function.  All terms are rotated gradients, so j_H is
divergence-free; each vortex carries plaquette winding 2*pi*d_j (the overall
sign was fixed against that winding invariant) and the grid mean of j_H is
J q because grad F integrates to zero.

The phase theta with grad theta = j_H exists only as a circle-valued map; it
is reconstructed by integrating j_H along a spanning tree of the grid graph.
Edge integrals split each vortex into the exact angle increment of its
nearest lattice image (a plane vortex, integrated in closed form) plus a
smooth remainder handled by the trapezoid rule, so closure defects on
co-tree edges stay far below the 2*pi winding quanta.

Initial data for the wave equation multiplies e^{i theta} by radial core
amplitudes f(dist/eps), giving |u| = 0 at vortex centres, |u| <= 1, and zero
initial velocity.
"""

from dataclasses import dataclass

import numpy as np

from .energy import VortexConfig, branch_momentum, CoreProfile
from .green import TAU, GreenEvaluator
from .wave import FieldState

#: Vortices closer than this to a grid line are nudged before sampling.
#: The scale keeps the nudge invisible at physical tolerances while holding
#: cancellation noise in near-node edge remainders at ~1e-4 of the singular
#: 1/r values (coordinate roundoff is amplified by 1/r^2).
GRID_NUDGE = 1e-6

#: Co-tree closure defects above this fraction of 2*pi signal a bad branch.
CLOSURE_TOLERANCE = 1e-3


class PhaseClosureError(ValueError):
    """The current cannot be integrated to a circle-valued phase."""


class ResolutionError(ValueError):
    """The grid cannot resolve the vortex cores (eps * M too small)."""


@dataclass(frozen=True)
class PhaseGrid:
    """Branch-consistent phase samples and the current they integrate."""

    resolution: int
    theta: np.ndarray            # (M, M) phase at grid nodes
    current: np.ndarray          # (M, M, 2) sampled j_H
    windings: np.ndarray         # (M, M) integer plaquette windings
    max_plaquette_defect: float  # radians
    max_cycle_defect: float      # radians, over both homology cycles


def rotate90(vec):
    """Apply J = [[0, 1], [-1, 0]] to the trailing axis."""
    out = np.empty_like(vec)
    out[..., 0] = vec[..., 1]
    out[..., 1] = -vec[..., 0]
    return out


def displace_off_grid(positions, resolution: int):
    """Nudge coordinates lying on grid lines by GRID_NUDGE torus lengths."""
    pos = np.array(positions, dtype=float)
    scaled = pos * resolution
    on_line = np.abs(scaled - np.round(scaled)) < GRID_NUDGE * resolution
    pos[on_line] += GRID_NUDGE
    return pos


def _validated_grid(resolution: int) -> int:
    M = int(resolution)
    if M < 64 or (M & (M - 1)) != 0:
        raise ValueError(f"grid resolution must be a power of two >= 64, got {M}")
    return M


def canonical_current(config: VortexConfig, green: GreenEvaluator,
                      resolution: int) -> np.ndarray:
    """Sample j_H on the M x M grid; returns (M, M, 2) with axis 0 = x."""
    M = _validated_grid(resolution)
    q = branch_momentum(config)
    positions = displace_off_grid(config.positions, M)
    current = np.broadcast_to(rotate90(q), (M, M, 2)).copy()
    for a, d in zip(positions, config.degrees):
        current -= d * rotate90(green.gradient_grid(a, M))
    return current


def _edge_integrals(current, positions, degrees):
    """Line integrals of the current along all +x and +y grid edges.

    Each vortex contributes the exact angle increment of its nearest lattice
    image; the remaining smooth field uses the trapezoid rule on the sampled
    current minus the per-edge singular parts.
    """
    M = current.shape[0]
    h = 1.0 / M
    nodes = np.arange(M) / M
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")

    def family(p1x, p1y, p2x, p2y, component):
        samples1 = current[..., component]
        samples2 = np.roll(samples1, -1, axis=component)
        angles = np.zeros((M, M))
        rem1 = samples1.copy()
        rem2 = samples2.copy()
        midx = 0.5 * (p1x + p2x)
        midy = 0.5 * (p1y + p2y)
        for a, d in zip(positions, degrees):
            nx = np.round(midx - a[0])
            ny = np.round(midy - a[1])
            r1x, r1y = p1x - a[0] - nx, p1y - a[1] - ny
            r2x, r2y = p2x - a[0] - nx, p2y - a[1] - ny
            cross = r1x * r2y - r1y * r2x
            dot = r1x * r2x + r1y * r2y
            angles += d * np.arctan2(cross, dot)
            # plane-vortex current d * grad(angle) = d * (-y, x)/r^2
            s1 = (r1y, r1x)[component] / (r1x**2 + r1y**2)
            s2 = (r2y, r2x)[component] / (r2x**2 + r2y**2)
            sign = -1.0 if component == 0 else 1.0
            rem1 -= d * sign * s1
            rem2 -= d * sign * s2
        return angles + 0.5 * h * (rem1 + rem2)

    kx = family(X, Y, X + h, Y, component=0)
    ky = family(X, Y, X, Y + h, component=1)
    return kx, ky


def circulation_report(current, config: VortexConfig):
    """Plaquette windings and closure defects of the sampled current."""
    M = current.shape[0]
    positions = displace_off_grid(config.positions, M)
    kx, ky = _edge_integrals(current, positions, config.degrees)
    circ = kx + np.roll(ky, -1, axis=0) - np.roll(kx, -1, axis=1) - ky
    windings = np.rint(circ / TAU).astype(int)
    plaquette_defect = float(np.max(np.abs(circ - TAU * windings)))
    cycle_x = kx.sum(axis=0)
    cycle_y = ky.sum(axis=1)
    cycle_defect = max(
        float(np.max(np.abs(cycle_x - TAU * np.rint(cycle_x / TAU)))),
        float(np.max(np.abs(cycle_y - TAU * np.rint(cycle_y / TAU)))),
    )
    return kx, ky, windings, plaquette_defect, cycle_defect


def reconstruct_phase(current, config: VortexConfig) -> PhaseGrid:
    """Integrate the current along a spanning tree to a phase grid.

    The tree is the x-axis row plus all vertical columns; every co-tree edge
    must close modulo 2*pi, which is verified and reported.  A defect above
    CLOSURE_TOLERANCE * 2*pi means the branch momentum is off its coset.
    """
    M = current.shape[0]
    kx, ky, windings, plaquette_defect, cycle_defect = \
        circulation_report(current, config)
    worst = max(plaquette_defect, cycle_defect)
    if worst > CLOSURE_TOLERANCE * TAU:
        raise PhaseClosureError(
            f"closure defect {worst:.3e} rad exceeds "
            f"{CLOSURE_TOLERANCE * TAU:.3e}; branch momentum is inconsistent"
        )
    theta = np.empty((M, M))
    theta[:, 0] = np.concatenate([[0.0], np.cumsum(kx[:-1, 0])])
    theta[:, 1:] = theta[:, :1] + np.cumsum(ky[:, :-1], axis=1)
    return PhaseGrid(resolution=M, theta=theta, current=current,
                     windings=windings,
                     max_plaquette_defect=plaquette_defect,
                     max_cycle_defect=cycle_defect)


_PROFILE_CACHE: list = []


def core_amplitude_profile() -> CoreProfile:
    """Shared radial core profile f with f(0) = 0, f -> 1."""
    if not _PROFILE_CACHE:
        _PROFILE_CACHE.append(CoreProfile())
    return _PROFILE_CACHE[0]


def initial_data(config: VortexConfig, eps: float, green: GreenEvaluator,
                 resolution: int) -> FieldState:
    """Well-prepared field u0 = prod_j f(dist_j/eps) * e^{i theta}, u_t = 0.

    The phase is the canonical harmonic map's; the amplitude vanishes at
    each vortex centre and approaches 1 at distance >> eps.  Requires at
    least ~8 grid points across a core (eps * M >= 8).
    """
    M = _validated_grid(resolution)
    if eps * M < 8.0:
        raise ResolutionError(
            f"eps*M = {eps * M:.2f} < 8: cores are unresolved at this grid"
        )
    current = canonical_current(config, green, M)
    phase = reconstruct_phase(current, config)
    profile = core_amplitude_profile()

    nodes = np.arange(M) / M
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    rho = np.ones((M, M))
    for a in displace_off_grid(config.positions, M):
        dx = X - a[0]
        dy = Y - a[1]
        dx -= np.round(dx)
        dy -= np.round(dy)
        rho *= profile(np.sqrt(dx**2 + dy**2) / eps)
    u = rho * np.exp(1j * phase.theta)
    return FieldState(u=u, u_t=np.zeros_like(u), eps=float(eps), t=0.0)
