"""Renormalized interaction energy of vortex configurations on the torus.

For 2N vortices at lifted positions a_j with degrees d_j in {+1, -1}
(degrees summing to zero) and a momentum branch q in the lattice coset
2*pi*sum_j d_j a_j + 2*pi*Z^2, the energy is

    W(a; q) = -pi * sum_{k != l} d_k d_l F(a_k - a_l) + |q|^2 / 2

with F the torus Green function.  The branch is realized structurally:
positions are lifted (never wrapped) and the integer offset m is fixed at
construction, so q(a) = 2*pi*sum_j d_j a_j + 2*pi*m is continuous along any
continuous path of lifts and the coset constraint holds identically.

The module also provides the single-vortex radial core profile and the core
energy constant: the minimal Ginzburg-Landau energy of a unit-degree core in
the unit disc grows like pi*log(1/eps) plus a constant, which is computed
here by solving the radial Euler-Lagrange boundary-value problem and
extrapolating eps -> 0.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_bvp
from scipy.interpolate import CubicSpline

from .green import TAU, GreenEvaluator
from .torus import min_pairwise_distance

#: Configurations with a smaller pairwise periodic distance are "collided".
NEAR_COLLISION = 1e-6


class NearCollisionError(ValueError):
    """Two vortices are closer than the admissibility threshold."""


@dataclass(frozen=True)
class VortexConfig:
    """Lifted vortex positions, degrees, and a fixed integer branch offset."""

    positions: np.ndarray      # (2N, 2) lifted coordinates
    degrees: np.ndarray        # (2N,) each +1 or -1, summing to zero
    branch_offset: np.ndarray = field(
        default_factory=lambda: np.zeros(2, dtype=int)
    )                          # m in Z^2

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.size == 0:
            pos = pos.reshape(0, 2)
        deg = np.asarray(self.degrees, dtype=int).reshape(-1)
        m = np.asarray(self.branch_offset, dtype=int).reshape(-1)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must have shape (2N, 2)")
        if deg.shape[0] != pos.shape[0]:
            raise ValueError("degrees must match positions")
        if deg.size and not np.all(np.abs(deg) == 1):
            raise ValueError("degrees must be +1 or -1")
        if int(deg.sum()) != 0:
            raise ValueError("degrees must sum to zero on the torus")
        if m.shape != (2,):
            raise ValueError("branch_offset must be an integer 2-vector")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if pos.shape[0] >= 2 and min_pairwise_distance(pos) == 0.0:
            raise ValueError("vortex positions must be pairwise distinct")
        for name, arr in (("positions", pos), ("degrees", deg),
                          ("branch_offset", m)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    def separation_scale(self) -> float:
        """Quarter of the minimal pairwise periodic distance."""
        return 0.25 * min_pairwise_distance(self.positions)


_PAIR_INDEX_CACHE: dict = {}


def _pair_indices(n: int):
    try:
        return _PAIR_INDEX_CACHE[n]
    except KeyError:
        _PAIR_INDEX_CACHE[n] = np.triu_indices(n, k=1)
        return _PAIR_INDEX_CACHE[n]


def _branch_raw(positions, degrees, offset):
    weighted = degrees @ positions if len(degrees) else np.zeros(2)
    return TAU * (weighted + offset)


def branch_momentum(config: VortexConfig) -> np.ndarray:
    """The continuous momentum-branch vector q = 2*pi*(sum d_j a_j + m)."""
    return _branch_raw(config.positions, config.degrees, config.branch_offset)


def _pair_displacements(positions):
    iu, il = _pair_indices(positions.shape[0])
    disp = positions[iu] - positions[il]
    if disp.size:
        wrapped = disp - np.round(disp)
        if np.min(np.einsum("ij,ij->i", wrapped, wrapped)) <= NEAR_COLLISION**2:
            raise NearCollisionError(
                f"pairwise periodic distance at or below {NEAR_COLLISION}"
            )
    return iu, il, disp


def _pair_energy_raw(positions, degrees, green):
    iu, il, disp = _pair_displacements(positions)
    if disp.size == 0:
        return 0.0
    signs = degrees[iu] * degrees[il]
    # both (k,l) and (l,k) contribute equally since F is even
    return -TAU * float(signs @ green.value(disp))


def pair_energy(config: VortexConfig, green: GreenEvaluator) -> float:
    """The interaction part -pi * sum_{k != l} d_k d_l F(a_k - a_l)."""
    return _pair_energy_raw(config.positions, config.degrees, green)


def _energy_raw(positions, degrees, offset, green):
    q = _branch_raw(positions, degrees, offset)
    return _pair_energy_raw(positions, degrees, green) + 0.5 * float(q @ q)


def renormalized_energy(config: VortexConfig, green: GreenEvaluator) -> float:
    """W(a; q) for the configuration's own branch momentum."""
    return _energy_raw(config.positions, config.degrees,
                       config.branch_offset, green)


def _gradient_raw(positions, degrees, offset, green):
    q = _branch_raw(positions, degrees, offset)
    grad = (TAU * degrees)[:, None] * q[None, :]
    iu, il, disp = _pair_displacements(positions)
    if disp.size:
        g = green.gradient(disp)
        w = (TAU * degrees[iu] * degrees[il])[:, None] * g
        for p in range(len(iu)):            # few pairs; grad F is odd
            grad[iu[p]] -= w[p]
            grad[il[p]] += w[p]
    return grad


def energy_gradient(config: VortexConfig, green: GreenEvaluator) -> np.ndarray:
    """Gradient of W with respect to each lifted position; shape (2N, 2).

    grad_j W = -2*pi * d_j * sum_{l != j} d_l grad F(a_j - a_l)
               + 2*pi * d_j * q(a),
    the momentum term coming from differentiating |q(a)|^2 / 2.
    """
    return _gradient_raw(config.positions, config.degrees,
                         config.branch_offset, green)


def augmented_energy(config: VortexConfig, green: GreenEvaluator,
                     eps: float, gamma: float) -> float:
    """Total energy budget at core size eps:
    2N*(pi*log(1/eps) + gamma) + W(a; q)."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    n_cores = config.count
    return (n_cores * (np.pi * np.log(1.0 / eps) + gamma)
            + renormalized_energy(config, green))


# -- radial core profile and its energy constant ----------------------------

class CoreProfile:
    """Radial amplitude f(s) of a unit-degree vortex core, f(0)=0, f->1.

    Solves f'' + f'/s - f/s^2 + (1 - f^2) f = 0 via the substitution
    f = s*g (which turns the 1/s^2 term into a solver-supported singular
    3*g'/s term), with the far-field asymptote f ~ 1 - 1/(2 s^2) - 9/(8 s^4)
    used beyond the solve domain.
    """

    def __init__(self, domain_radius: float = 25.0, tol: float = 1e-10):
        self.domain_radius = float(domain_radius)
        sol = _solve_core_bvp(self.domain_radius, bc_value=_far_field(
            self.domain_radius), tol=tol)
        self._solution = sol
        s = np.linspace(0.0, self.domain_radius, 4001)
        g = sol.sol(s)[0]
        self._spline = CubicSpline(s, s * g)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        inside = s < self.domain_radius
        out = np.where(inside, self._spline(np.minimum(s, self.domain_radius)),
                       _far_field(np.maximum(s, 1.0)))
        return out if out.ndim else float(out)


def _far_field(s):
    return 1.0 - 0.5 / s**2 - 1.125 / s**4


def _solve_core_bvp(radius, bc_value, tol=1e-10):
    """Solve g'' + 3 g'/s + (1 - s^2 g^2) g = 0, g'(0)=0, (s*g)(R)=bc."""

    def rhs(s, y):
        g, dg = y
        return np.vstack([dg, -(1.0 - (s * g) ** 2) * g])

    def bc(ya, yb):
        return np.array([ya[1], radius * yb[0] - bc_value])

    # mesh graded toward the core where f bends
    s = np.concatenate([np.linspace(0.0, 4.0, 81),
                        np.geomspace(4.0, radius, 80)[1:]])
    guess = np.vstack([1.0 / np.sqrt(s**2 + 2.0),
                       -s / (s**2 + 2.0) ** 1.5])
    sol = solve_bvp(rhs, bc, s, guess,
                    S=np.array([[0.0, 0.0], [0.0, -3.0]]),
                    tol=tol, max_nodes=200000)
    if not sol.success:
        raise RuntimeError(f"core profile solve failed: {sol.message}")
    return sol


def _core_energy(radius, tol=1e-10):
    """min of integral_{B_1} e^eps over degree-one maps, for eps = 1/radius.

    Computed in core units s = r/eps on [0, radius] with f(radius) = 1:
    2*pi * int [ (f'^2 + f^2/s^2)/2 + (1 - f^2)^2/4 ] s ds.
    """
    sol = _solve_core_bvp(radius, bc_value=1.0, tol=tol)
    nodes = sol.x
    # 12-point Gauss-Legendre on each solver interval
    xg, wg = np.polynomial.legendre.leggauss(12)
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    half = 0.5 * (nodes[1:] - nodes[:-1])
    s = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    g, dg = sol.sol(s)
    f = s * g
    df = g + s * dg
    density = 0.5 * (df**2 + g**2) + 0.25 * (1.0 - f**2) ** 2
    return TAU * float(np.sum(w * density * s))


def core_energy_constant(eps_sequence=(0.1, 0.05, 0.025, 0.0125),
                         return_sequence: bool = False):
    """Limit of (core energy - pi*log(1/eps)) as eps -> 0.

    eps_sequence must be decreasing; the residuals converge at second order
    in eps, so the limit is Richardson-extrapolated from the two finest
    values using the observed ratio.
    """
    eps = np.asarray(eps_sequence, dtype=float)
    if eps.ndim != 1 or eps.size < 2 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ValueError("eps_sequence must be a decreasing positive sequence")
    residuals = np.array([
        _core_energy(1.0 / e) - np.pi * np.log(1.0 / e) for e in eps
    ])
    # gamma_eps = gamma + C*eps^2  =>  eliminate C with the two finest values
    r = eps[-1] / eps[-2]
    gamma = residuals[-1] + (residuals[-1] - residuals[-2]) * r**2 / (1.0 - r**2)
    if return_sequence:
        return float(gamma), residuals
    return float(gamma)
