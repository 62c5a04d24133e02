import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import rupture_lab as rl
from rupture_lab.profiles import radial_exact

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def disk256():
    return rl.disk_grid((0.0, 0.0), 1.0, 1.0 / 256)


@pytest.fixture(scope="session")
def radial256(disk256):
    """Exact radial solution (n=2, p=3) sampled on the unit disk, h=1/256."""
    return radial_exact(2, 3).sample(disk256)


@pytest.fixture(scope="session")
def annulus128():
    return rl.annulus_grid((0.0, 0.0), 0.2, 1.0, 1.0 / 128)


def bump_vector_field(grid, center, radius, direction):
    """C^2 compactly supported test field (1-|x|^2)^3 * direction."""
    mesh = grid.meshgrid()
    r2 = sum((mesh[a] - center[a]) ** 2 for a in range(grid.dim)) / radius ** 2
    b = np.where(r2 < 1.0, (1.0 - np.minimum(r2, 1.0)) ** 3, 0.0)
    return rl.VectorField(grid, tuple(b * d for d in direction))
