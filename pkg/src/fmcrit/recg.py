"""Random correspondences with a prescribed reprojection error.

A perfect correspondence A (on the epipolar hypersurface R = 0) is pushed a
distance d along the unit normal of the hypersurface, in both directions.
Whichever of B1 = A + d n, B2 = A - d n still has A as its optimal
correction has RE = d; otherwise a new A is drawn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .criteria import _at, hartley_sturm_correct
from .errors import (
    DegenerateEpipolarLineError,
    DegenerateLineError,
    GeometryError,
    MaxTrialsExceeded,
    NumericalFailure,
    SamplingExhausted,
)
from .geometry import (
    Camera,
    Correspondence,
    FundamentalMatrix,
    dehomogenize,
    epipole_is_finite,
    epipole_point,
    pencil_first_line,
    pencil_point,
    project,
    unit_tangent,
)
from .scenegen import SceneGenConfig, random_cube_point

SeedMode = Literal["generate_project", "parametric"]

MAX_REJECTIONS = 100_000
EPS = float(np.finfo(float).eps)


def accept_slack(cfg: RecgConfig, B: Correspondence) -> float:
    """Allowed |RE - d|: the relative tolerance, floored at two ulps of B's
    coordinates (a stored B cannot place RE any closer)."""
    return cfg.accept_tol * cfg.target_re + 2.0 * EPS * max(1.0, float(np.abs(B.as_vector()).max()))


@dataclass(frozen=True)
class RecgConfig:
    target_re: float
    max_trials: int = 200
    accept_tol: float = 1e-6
    seed_mode: SeedMode = "parametric"

    def __post_init__(self):
        if not self.target_re >= 0:
            raise ValueError(f"target_re must be >= 0, got {self.target_re}")
        if self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")
        if not 0 < self.accept_tol < 1:
            raise ValueError("accept_tol must lie in (0, 1)")
        if self.seed_mode not in ("generate_project", "parametric"):
            raise ValueError(f"unknown seed_mode {self.seed_mode!r}")


@dataclass(frozen=True)
class PencilParam:
    t: float
    d: float
    d_prime: float

    def __post_init__(self):
        if not -math.pi <= self.t <= math.pi:
            raise ValueError("t must lie in [-pi, pi]")


@dataclass(frozen=True)
class RecgOutcome:
    correspondence: Correspondence
    achieved_re: float
    trials_used: int
    seed_correspondence: Correspondence
    sign: int  # +1 for B1 = A + d n, -1 for B2


def unit_gradient(F: FundamentalMatrix, A: Correspondence) -> np.ndarray:
    """Unit normal (n(l), n(l')) / |.| of the hypersurface at A."""
    _, l1, l2, k1, k2, at_e, at_ep = _at(F, A)
    g = np.array([l1, l2, k1, k2])
    norm = np.linalg.norm(g)
    if (at_e and at_ep) or norm == 0.0:
        raise DegenerateEpipolarLineError("zero constraint gradient: both points at their epipoles")
    return g / norm


def perfect_from_projection(
    cam: Camera, cam_prime: Camera, rng: np.random.Generator, scene: SceneGenConfig = SceneGenConfig()
) -> Correspondence:
    """Project a random cube point lying in front of both cameras."""
    for _ in range(MAX_REJECTIONS):
        X = random_cube_point(scene, rng)
        if cam.depth(X) > 1e-12 and cam_prime.depth(X) > 1e-12:
            return Correspondence(project(cam, X), project(cam_prime, X))
    raise SamplingExhausted(f"no cube point in front of both cameras after {MAX_REJECTIONS} draws")


def perfect_from_pencil(F: FundamentalMatrix, params: PencilParam) -> Correspondence:
    """Explicit point of the epipolar hypersurface.

    ``t`` picks a pair of corresponding epipolar lines, ``d`` and ``d_prime``
    the signed distances of the two points from their epipoles along them
    (from a base point on the line when that epipole is at infinity).
    """
    p = pencil_point(F, params.t, params.d)
    lp = F.line_of(pencil_point(F, params.t, 1.0))
    if lp[0] == 0.0 and lp[1] == 0.0:
        raise DegenerateLineError("second epipolar line of the pencil vanishes")
    ep = F.e_prime
    if epipole_is_finite(ep):
        p_prime = epipole_point(ep) + params.d_prime * unit_tangent(lp)
    else:
        direction = np.array([ep[0], ep[1]])
        base = dehomogenize(np.cross(np.array([ep[0], ep[1], 0.0]), lp))
        p_prime = base + params.d_prime * direction / np.linalg.norm(direction)
    return Correspondence(p, p_prime)


def _draw_seed(F, cfg: RecgConfig, rng, cameras):
    if cfg.seed_mode == "generate_project":
        A = perfect_from_projection(cameras[0], cameras[1], rng)
        # projected points miss the hypersurface by rounding (~1e-10 px);
        # snap onto it so tiny targets are not swamped by that offset
        return hartley_sturm_correct(F, A).corrected
    sigma = 1000.0 * cfg.target_re
    t = rng.uniform(-math.pi, math.pi)
    d = rng.normal(0.0, sigma)
    d_prime = rng.normal(0.0, sigma)
    return perfect_from_pencil(F, PencilParam(t, d, d_prime))


def generate(
    F: FundamentalMatrix,
    cfg: RecgConfig,
    rng: np.random.Generator,
    cameras: tuple[Camera, Camera] | None = None,
) -> RecgOutcome:
    """Draw a correspondence whose RE matches ``cfg.target_re``.

    Acceptance is ``|RE - d| <= accept_slack(cfg, B)``.  Per trial the rng is
    consumed as: seed (cube points until visible, or
    t ~ U(-pi, pi), d ~ N(0, 1000 RE), d' ~ N(0, 1000 RE)).
    """
    if cfg.seed_mode == "generate_project" and cameras is None:
        raise ValueError("generate_project mode needs the camera pair")
    target = cfg.target_re
    for trial in range(1, cfg.max_trials + 1):
        A = _draw_seed(F, cfg, rng, cameras)
        if target == 0.0:
            return RecgOutcome(A, 0.0, trial, A, +1)
        step = target * unit_gradient(F, A)
        a = A.as_vector()
        for sign in (+1, -1):
            B = Correspondence.from_vector(a + sign * step)
            try:
                re = math.sqrt(hartley_sturm_correct(F, B).e_sq)
            except (GeometryError, NumericalFailure):
                continue
            if abs(re - target) <= accept_slack(cfg, B):
                return RecgOutcome(B, re, trial, A, sign)
    raise MaxTrialsExceeded(cfg.max_trials)
