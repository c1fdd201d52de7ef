"""Geometry helpers for the unit torus (R/Z)^2 with lifted coordinates.

Points are stored as plain planar coordinates ("lifts"); the torus image
is the lift mod 1.  All trajectory code keeps lifts and never wraps, so
paths stay continuous across the periodic boundary.
"""

import numpy as np


def torus_image(points):
    """Map lifted coordinates to the fundamental domain [0, 1)^2.

    Values a hair below an integer would round to 1.0 under np.mod; they
    are folded back to 0.0 to keep the half-open convention.
    """
    out = np.mod(points, 1.0)
    return np.where(out >= 1.0, 0.0, out)


def periodic_delta(p, q):
    """Shortest displacement vector(s) from q to p on the torus.

    Componentwise in (-1/2, 1/2]; broadcasts over leading axes.
    """
    d = np.asarray(p, float) - np.asarray(q, float)
    return d - np.round(d)


def periodic_distance(p, q):
    """Distance between torus images of p and q (at most sqrt(2)/2)."""
    d = periodic_delta(p, q)
    return np.sqrt(np.sum(d * d, axis=-1))


def min_pairwise_distance(points):
    """Smallest periodic distance among all pairs of rows of points.

    Returns +inf for fewer than two points.
    """
    pts = np.asarray(points, float)
    n = pts.shape[0]
    if n < 2:
        return np.inf
    iu, il = np.triu_indices(n, k=1)
    return float(np.min(periodic_distance(pts[iu], pts[il])))
