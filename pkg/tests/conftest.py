import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import anisotube as at


@pytest.fixture(scope="session")
def disk64():
    return at.preset_body("disk64")


@pytest.fixture(scope="session")
def square():
    return at.preset_body("square")


@pytest.fixture(scope="session")
def kernel_warm(disk64):
    """Compile the field kernel before anything is timed."""
    E = at.PointCloud(np.zeros((1, 2)))
    grid = at.grid_for(E, disk64, r_max=0.5, h=0.05)
    at.distance_field(E, disk64, grid)
    return True


@pytest.fixture(scope="session")
def gasket12():
    return at.sierpinski_gasket(12)


@pytest.fixture(scope="session")
def gasket12_profile_disk64(gasket12, disk64, kernel_warm):
    """Shared depth-12 profile spanning the four outermost dyadic windows."""
    gp = at.GasketProfile(disk64)
    L = gp.scale
    return at.profile_by_octaves(gasket12, disk64, L / 8, L * 1.9,
                                 per_octave=8, cells_per_radius=32)
