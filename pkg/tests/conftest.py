import numpy as np
import pytest

from chemosim import RadialField, RadialGrid


@pytest.fixture
def grid3():
    return RadialGrid.uniform(3, 2.0, 512)


@pytest.fixture
def grid3_fine():
    return RadialGrid.uniform(3, 4.0, 2048)


def random_field(grid, rng, kind=None):
    """Seeded nonnegative test profile: gaussian, compact power, or mixture."""
    r = grid.centers
    kind = rng.integers(0, 3) if kind is None else kind
    if kind == 0:
        spread = rng.uniform(0.01, 0.05) * grid.r_max**2
        vals = rng.uniform(0.2, 5.0) * np.exp(-(r**2) / (4.0 * spread))
    elif kind == 1:
        a = rng.uniform(0.3, 0.95) * grid.r_max
        vals = rng.uniform(0.2, 5.0) * np.maximum(1.0 - (r / a) ** grid.d, 0.0) \
            ** rng.uniform(0.4, 3.0)
    else:
        a = rng.uniform(0.3, 0.9) * grid.r_max
        vals = rng.uniform(0.2, 2.0) * np.exp(-(r**2) / (0.08 * a**2)) \
            + rng.uniform(0.1, 1.0) * np.maximum(1.0 - (r / a) ** 2, 0.0)
    return RadialField(grid, vals)


def uniform_ball(grid, total_mass=1.0, radius=1.0):
    density = total_mass * grid.d / (grid.sigma * radius**grid.d)
    vals = np.where(grid.centers < radius, density, 0.0)
    return RadialField(grid, vals)
