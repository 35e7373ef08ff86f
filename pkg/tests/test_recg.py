import math

import numpy as np
import pytest

from conftest import random_setup
from fmcrit.criteria import algebraic_distance, hartley_sturm_correct
from fmcrit.errors import DegenerateEpipolarLineError, MaxTrialsExceeded
from fmcrit.geometry import Correspondence, dehomogenize, epipole_is_finite
from fmcrit.oracle import brute_force_re_sq, numeric_gradient_R
from fmcrit.recg import (
    PencilParam,
    RecgConfig,
    accept_slack,
    generate,
    perfect_from_pencil,
    perfect_from_projection,
    unit_gradient,
)


def _within_target(re, level, B):
    # 1e-9 relative slack, floored at two ulps of the stored coordinates
    return re <= level * (1 + 1e-9) + 2 * np.finfo(float).eps * max(1.0, np.abs(B.as_vector()).max())


def _normalized_residual(F, B):
    hp = np.append(B.p, 1.0)
    hq = np.append(B.p_prime, 1.0)
    return abs(algebraic_distance(F, B)) / (np.linalg.norm(hp) * np.linalg.norm(hq))


def test_rectified_gradient(rectified):
    g = unit_gradient(rectified, Correspondence((0, 0), (0, 0)))
    np.testing.assert_allclose(g, np.array([0, 1, 0, -1]) / math.sqrt(2), atol=1e-15)


def test_gradient_zero_at_both_epipoles():
    _, F = random_setup(np.random.default_rng(30))
    with pytest.raises(DegenerateEpipolarLineError):
        unit_gradient(F, Correspondence(dehomogenize(F.e), dehomogenize(F.e_prime)))


def test_gradient_direction_matches_finite_differences():
    rng = np.random.default_rng(31)
    for _ in range(200):
        (cam, cam_p), F = random_setup(rng)
        A = perfect_from_projection(cam, cam_p, rng)
        g = unit_gradient(F, A)
        assert np.linalg.norm(g) == pytest.approx(1.0, rel=1e-14)
        num = numeric_gradient_R(F, A, h=1e-4)
        num /= np.linalg.norm(num)
        assert np.linalg.norm(num - g) <= 1e-5


def test_gradient_orthogonal_to_pencil_tangent():
    rng = np.random.default_rng(32)
    for _ in range(100):
        _, F = random_setup(rng)
        t, d, dp, h = rng.uniform(-3, 3), rng.normal(0, 100), rng.normal(0, 100), 1e-6
        A = perfect_from_pencil(F, PencilParam(t, d, dp))
        tangent = (perfect_from_pencil(F, PencilParam(t + h, d, dp)).as_vector()
                   - perfect_from_pencil(F, PencilParam(t - h, d, dp)).as_vector()) / (2 * h)
        tangent /= np.linalg.norm(tangent)
        assert abs(np.dot(unit_gradient(F, A), tangent)) <= 1e-5


def test_projection_seeds_are_perfect():
    rng = np.random.default_rng(33)
    for _ in range(1000):
        (cam, cam_p), F = random_setup(rng)
        A = perfect_from_projection(cam, cam_p, rng)
        assert _normalized_residual(F, A) <= 1e-6


def test_pencil_seeds():
    rng = np.random.default_rng(34)
    for _ in range(1000):
        _, F = random_setup(rng)
        params = PencilParam(rng.uniform(-math.pi, math.pi), rng.normal(0, 1e3), rng.normal(0, 1e3))
        A = perfect_from_pencil(F, params)
        assert _normalized_residual(F, A) <= 1e-6
        if epipole_is_finite(F.e):
            assert np.linalg.norm(A.p - dehomogenize(F.e)) == pytest.approx(abs(params.d), rel=1e-9, abs=1e-9)
    A = perfect_from_pencil(F, PencilParam(0.3, 0.0, 0.0))
    np.testing.assert_allclose(A.p, dehomogenize(F.e))
    np.testing.assert_allclose(A.p_prime, dehomogenize(F.e_prime))


def test_pencil_seeds_infinite_epipoles(rectified):
    A = perfect_from_pencil(rectified, PencilParam(1.5, 2.0, -7.0))
    assert algebraic_distance(rectified, A) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(A.p, [2.0, 1.5])


def test_pencil_param_validation():
    with pytest.raises(ValueError):
        PencilParam(4.0, 0.0, 0.0)


def test_config_validation():
    for bad in (dict(target_re=-1.0), dict(target_re=1.0, max_trials=0), dict(target_re=1.0, accept_tol=0.0),
                dict(target_re=1.0, seed_mode="bogus")):
        with pytest.raises(ValueError):
            RecgConfig(**bad)


def test_zero_target_returns_seed():
    rng = np.random.default_rng(35)
    cams, F = random_setup(rng)
    out = generate(F, RecgConfig(0.0, seed_mode="generate_project"), rng, cams)
    assert out.achieved_re == 0.0 and out.trials_used == 1
    assert out.correspondence == out.seed_correspondence


def test_gp_needs_cameras():
    _, F = random_setup(np.random.default_rng(36))
    with pytest.raises(ValueError):
        generate(F, RecgConfig(1.0, seed_mode="generate_project"), np.random.default_rng(0))


@pytest.mark.parametrize("mode", ["parametric", "generate_project"])
@pytest.mark.parametrize("level", [1e-6, 1e-2, 10.0, 1e3])
def test_generated_correspondence_has_target_error(mode, level):
    rng = np.random.default_rng(37)
    for _ in range(30):
        cams, F = random_setup(rng)
        cfg = RecgConfig(level, seed_mode=mode)
        out = generate(F, cfg, rng, cams)
        B, A = out.correspondence, out.seed_correspondence
        assert abs(out.achieved_re - level) <= accept_slack(cfg, B)
        assert out.trials_used <= cfg.max_trials
        assert np.linalg.norm(B.as_vector() - A.as_vector()) == pytest.approx(level, rel=1e-9)
        assert _within_target(math.sqrt(hartley_sturm_correct(F, B).e_sq), level, B)
        assert out.sign in (+1, -1)


def test_achieved_error_confirmed_by_oracle():
    rng = np.random.default_rng(38)
    for level in (1.0, 100.0):
        for _ in range(5):
            cams, F = random_setup(rng)
            out = generate(F, RecgConfig(level), rng, cams)
            assert math.sqrt(brute_force_re_sq(F, out.correspondence)) == pytest.approx(level, rel=1e-6)


def test_both_candidates_within_target():
    rng = np.random.default_rng(39)
    for level in (1.0, 1e4):
        for _ in range(30):
            cams, F = random_setup(rng)
            # A must lie exactly on the hypersurface: snap the projection onto it
            A = hartley_sturm_correct(F, perfect_from_projection(*cams, rng)).corrected
            step = level * unit_gradient(F, A)
            for sign in (1, -1):
                B = Correspondence.from_vector(A.as_vector() + sign * step)
                assert _within_target(math.sqrt(hartley_sturm_correct(F, B).e_sq), level, B)


def test_determinism():
    outs = []
    for _ in range(2):
        rng = np.random.default_rng(40)
        cams, F = random_setup(rng)
        outs.append(generate(F, RecgConfig(3.0), rng, cams))
    assert outs[0] == outs[1]


def test_max_trials_exceeded():
    # far beyond the projected cube's reach, projected seeds rarely work
    rng = np.random.default_rng(41)
    cams, F = random_setup(rng)
    with pytest.raises(MaxTrialsExceeded) as info:
        for _ in range(50):
            generate(F, RecgConfig(1e7, max_trials=1, seed_mode="generate_project"), rng, cams)
    assert info.value.trials == 1
