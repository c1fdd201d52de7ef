"""Independent reference computations used by the tests.

These deliberately avoid the library's Ewald-split evaluation path:

- ``brute_fourier_F``: direct truncated Fourier sum of the Green function
  (slowly convergent; Richardson-extrapolated over doubling cutoffs).
- ``theta_green_F``: the classical Jacobi theta-function representation of
  the torus Green function,
      F(x, y) = log|theta1(pi(x + iy), q=e^-pi)| - pi y^2 + C0,
  anchored by the exact lattice value F(1/2, 1/2) = ln(2)/2 (from the
  alternating sum over Z^2 of (-1)^{m+n}/(m^2+n^2) = -pi ln 2).
- central finite differences for gradients.
"""

import numpy as np

TAU = 2.0 * np.pi


def brute_fourier_F(point, cutoff):
    """-sum_{0<|k|<=K} cos(2 pi k.x) / (2 pi |k|^2), square-chunked rows."""
    x, y = float(point[0]), float(point[1])
    ks = np.arange(-cutoff, cutoff + 1)
    total = 0.0
    for kx in ks:
        k2 = kx * kx + ks * ks
        mask = (k2 > 0) & (k2 <= cutoff * cutoff)
        total += np.sum(np.cos(TAU * (kx * x + ks[mask] * y)) / k2[mask])
    return -total / TAU


def richardson_brute_F(point, cutoffs=(256, 512, 1024)):
    """Richardson extrapolation of the truncated sum, assuming O(1/K^2)."""
    vals = [brute_fourier_F(point, K) for K in cutoffs]
    return vals[-1] + (vals[-1] - vals[-2]) / 3.0


def _theta1(v):
    q = np.exp(-np.pi)
    total = np.zeros_like(np.asarray(v, dtype=complex))
    for n in range(9):
        total += (-1.0) ** n * q ** ((n + 0.5) ** 2) * np.sin((2 * n + 1) * v)
    return 2.0 * total


def _theta_raw(x, y):
    x = x - np.round(x)
    y = y - np.round(y)
    return np.log(np.abs(_theta1(np.pi * (x + 1j * y)))) - np.pi * y**2


_ANCHOR = np.log(2.0) / 2.0 - _theta_raw(0.5, 0.5)


def theta_green_F(points):
    pts = np.asarray(points, dtype=float)
    return _theta_raw(pts[..., 0], pts[..., 1]) + _ANCHOR


def central_difference(f, point, step=1e-5):
    """Central-difference gradient of a scalar function on R^2."""
    p = np.asarray(point, dtype=float)
    out = np.empty(2)
    for c in range(2):
        e = np.zeros(2)
        e[c] = step
        out[c] = (f(p + e) - f(p - e)) / (2.0 * step)
    return out


def energy_gradient_fd(config, green, step=1e-6):
    """Finite-difference gradient of the renormalized energy, all components."""
    from torusvortex import VortexConfig, renormalized_energy

    base = np.asarray(config.positions, dtype=float)
    out = np.zeros_like(base)
    for j in range(base.shape[0]):
        for c in range(2):
            plus = base.copy()
            minus = base.copy()
            plus[j, c] += step
            minus[j, c] -= step
            out[j, c] = (
                renormalized_energy(
                    VortexConfig(plus, config.degrees, config.branch_offset),
                    green)
                - renormalized_energy(
                    VortexConfig(minus, config.degrees, config.branch_offset),
                    green)
            ) / (2.0 * step)
    return out


def max_relative_gradient_error(config, green, step=1e-6):
    from torusvortex import energy_gradient

    grad = energy_gradient(config, green)
    fd = energy_gradient_fd(config, green, step)
    scale = np.max(np.abs(grad)) + 1.0
    return float(np.max(np.abs(grad - fd)) / scale)
