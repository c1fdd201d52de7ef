import numpy as np
import pytest

from torusvortex import VortexConfig, build_green
from torusvortex.energy import core_energy_constant


@pytest.fixture(scope="session")
def green():
    return build_green()


@pytest.fixture(scope="session")
def gamma_and_residuals():
    return core_energy_constant(return_sequence=True)


@pytest.fixture(scope="session")
def gamma(gamma_and_residuals):
    return gamma_and_residuals[0]


@pytest.fixture()
def fig1_left():
    return VortexConfig([(0.3, 0.0), (0.7, 0.0)], [1, -1])


@pytest.fixture()
def checkerboard():
    return VortexConfig([(0.0, 0.0), (0.5, 0.5), (0.5, 0.0), (0.0, 0.5)],
                        [1, 1, -1, -1])


@pytest.fixture()
def rng():
    return np.random.default_rng(20240611)


def random_admissible_config(rng, n_pairs, min_distance=0.06):
    """Rejection-sample vortex positions with a safe pairwise separation."""
    count = 2 * n_pairs
    degrees = np.array([1] * n_pairs + [-1] * n_pairs)
    while True:
        pos = rng.uniform(0.0, 1.0, (count, 2))
        from torusvortex.torus import min_pairwise_distance
        if min_pairwise_distance(pos) > min_distance:
            break
    offset = rng.integers(-2, 3, 2)
    return VortexConfig(pos, degrees, offset)
