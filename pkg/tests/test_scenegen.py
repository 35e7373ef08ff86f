import math

import numpy as np
import pytest

from fmcrit.scenegen import (
    SceneGenConfig,
    orientation,
    random_camera_pair,
    random_cube_point,
    rot_x,
    rot_y,
    rot_z,
    sphere_position,
)


def test_defaults():
    cfg = SceneGenConfig()
    assert (cfg.f_avg, cfg.f_sigma) == (1300.0, 250.0)
    assert (cfg.u_avg, cfg.u_sigma, cfg.v_avg, cfg.v_sigma) == (399.5, 133.33, 299.5, 100.0)
    assert cfg.cube_half_extent == 3e5
    with pytest.raises(ValueError):
        SceneGenConfig(f_avg=0.0)
    with pytest.raises(ValueError):
        SceneGenConfig(cube_half_extent=-1.0)


def test_camera_pairs():
    rng = np.random.default_rng(50)
    for _ in range(500):
        cam, cam_p = random_camera_pair(SceneGenConfig(), rng)
        assert np.array_equal(cam.position, np.zeros(3)) and np.array_equal(cam.orientation, np.eye(3))
        assert np.linalg.norm(cam_p.position) == pytest.approx(1.0, abs=1e-12)
        R = cam_p.orientation
        np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
        assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)


def test_focal_is_redrawn_positive():
    rng = np.random.default_rng(51)
    cfg = SceneGenConfig(f_avg=1.0, f_sigma=10.0)
    for _ in range(300):
        cam, cam_p = random_camera_pair(cfg, rng)
        assert cam.focal > 0 and cam_p.focal > 0


def test_elementary_rotations_by_hand():
    np.testing.assert_allclose(rot_x(math.pi / 2) @ [0, 1, 0], [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(rot_y(math.pi / 2) @ [0, 0, 1], [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(rot_z(math.pi / 2) @ [1, 0, 0], [0, 1, 0], atol=1e-15)


@pytest.mark.parametrize("angles", [(90, 0, 0), (0, 90, 0), (0, 0, 90), (90, 90, 0), (0, 90, 90), (90, 90, 90), (-45, 30, 270)])
def test_rotation_order(angles):
    theta, phi, psi = (math.radians(a) for a in angles)
    expected = rot_y(theta) @ rot_x(phi) @ rot_z(psi)
    np.testing.assert_allclose(orientation(*angles), expected, atol=1e-15)


def test_order_matters():
    # R_y R_x R_z differs from other products for generic angles
    assert not np.allclose(orientation(90, 90, 0), rot_x(math.pi / 2) @ rot_y(math.pi / 2))
    # maps e_z through R_z (fixed), then R_x: to -e_y, then R_y: unchanged
    np.testing.assert_allclose(orientation(90, 90, 0) @ [0, 0, 1], [0, -1, 0], atol=1e-15)


def test_sphere_position():
    np.testing.assert_allclose(sphere_position(90, 123), [0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(sphere_position(0, 0), [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(sphere_position(0, 90), [0, 0, 1], atol=1e-15)


def test_cube_points():
    cfg = SceneGenConfig()
    rng = np.random.default_rng(52)
    pts = np.array([random_cube_point(cfg, rng) for _ in range(100_000)])
    assert np.all(np.abs(pts) <= cfg.cube_half_extent)
    sigma = cfg.cube_half_extent / math.sqrt(3)
    assert np.all(np.abs(pts.mean(axis=0)) <= 3 * sigma / math.sqrt(len(pts)))


def test_streams():
    a = random_cube_point(SceneGenConfig(), np.random.default_rng(1))
    b = random_cube_point(SceneGenConfig(), np.random.default_rng(2))
    c = random_cube_point(SceneGenConfig(), np.random.default_rng(1))
    assert not np.array_equal(a, b) and np.array_equal(a, c)
