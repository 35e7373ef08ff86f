"""Random camera pairs and scene points with the benchmark's distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Camera


@dataclass(frozen=True)
class SceneGenConfig:
    f_avg: float = 1300.0
    f_sigma: float = 250.0
    u_avg: float = 399.5
    u_sigma: float = 133.33
    v_avg: float = 299.5
    v_sigma: float = 100.0
    cube_half_extent: float = 3e5

    def __post_init__(self):
        if not self.f_avg > 0:
            raise ValueError("f_avg must be positive")
        if not self.cube_half_extent > 0:
            raise ValueError("cube_half_extent must be positive")


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def sphere_position(s_deg: float, t_deg: float) -> np.ndarray:
    s, t = math.radians(s_deg), math.radians(t_deg)
    return np.array([math.cos(s) * math.cos(t), math.sin(s), math.cos(s) * math.sin(t)])


def orientation(theta_deg: float, phi_deg: float, psi_deg: float) -> np.ndarray:
    """R_y(theta) R_x(phi) R_z(psi), angles in degrees."""
    return rot_y(math.radians(theta_deg)) @ rot_x(math.radians(phi_deg)) @ rot_z(math.radians(psi_deg))


def _intrinsics(cfg: SceneGenConfig, rng: np.random.Generator):
    f = rng.normal(cfg.f_avg, cfg.f_sigma)
    while f <= 0:
        f = rng.normal(cfg.f_avg, cfg.f_sigma)
    u = rng.normal(cfg.u_avg, cfg.u_sigma)
    v = rng.normal(cfg.v_avg, cfg.v_sigma)
    return f, np.array([u, v])


def random_camera_pair(cfg: SceneGenConfig, rng: np.random.Generator) -> tuple[Camera, Camera]:
    """First camera at the world frame; second on the unit sphere, randomly rotated.

    Draw order: s, t, theta, phi, psi, then (f, u, v) of the first and the
    second camera.
    """
    s = rng.uniform(-90.0, 90.0)
    t = rng.uniform(0.0, 360.0)
    theta = rng.uniform(-135.0, 135.0)
    phi = rng.uniform(-90.0, 90.0)
    psi = rng.uniform(0.0, 360.0)
    f1, pp1 = _intrinsics(cfg, rng)
    f2, pp2 = _intrinsics(cfg, rng)
    cam = Camera(np.zeros(3), np.eye(3), f1, pp1)
    cam_prime = Camera(sphere_position(s, t), orientation(theta, phi, psi), f2, pp2)
    return cam, cam_prime


def random_cube_point(cfg: SceneGenConfig, rng: np.random.Generator) -> np.ndarray:
    h = cfg.cube_half_extent
    return rng.uniform(-h, h, size=3)
