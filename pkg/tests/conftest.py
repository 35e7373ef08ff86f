import numpy as np
import pytest

from fmcrit.geometry import Correspondence, FundamentalMatrix, fm_from_cameras
from fmcrit.recg import RecgConfig, generate
from fmcrit.scenegen import SceneGenConfig, random_camera_pair

RECTIFIED = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])


@pytest.fixture
def rectified():
    return FundamentalMatrix.from_matrix(RECTIFIED, normalize=False)


def random_setup(rng):
    cams = random_camera_pair(SceneGenConfig(), rng)
    return cams, fm_from_cameras(*cams)


def random_case(rng, level, mode="parametric"):
    """(F, B) with B generated at reprojection error ``level``."""
    cams, F = random_setup(rng)
    out = generate(F, RecgConfig(level, seed_mode=mode), rng, cams)
    return F, out.correspondence


def random_image_pair(rng, F=None):
    """(F, B) with B uniform over a 800x600 image in each view (generic, far from the surface)."""
    if F is None:
        _, F = random_setup(rng)
    pts = rng.uniform([0, 0, 0, 0], [800, 600, 800, 600])
    return F, Correspondence.from_vector(pts)
