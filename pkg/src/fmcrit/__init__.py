"""Fundamental-matrix error criteria, a generator of correspondences with a
prescribed reprojection error, and the experiments comparing them."""

from .criteria import (
    CorrectionResult,
    KanataniConfig,
    algebraic_distance,
    hartley_sturm_correct,
    kanatani_correct,
    re_sq,
    rek_sq,
    sampson_correct,
    sampson_sq,
    sed_sq,
)
from .geometry import Camera, Correspondence, FundamentalMatrix, epipolar_lines, fm_from_cameras, project
from .recg import RecgConfig, generate
from .scenegen import SceneGenConfig, random_camera_pair

__version__ = "0.1.0"
