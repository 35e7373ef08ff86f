"""Homogeneous 2D primitives, pinhole cameras and fundamental matrices.

Convention throughout the package: a correspondence (p, p') is perfect when

    p~^T F p~' = 0,

with p~ = (x, y, 1).  The epipolar line of p' in the first image is
l = F p~', the epipolar line of p in the second image is l' = F^T p~.
Points are plain ``(2,)`` float arrays, lines are ``(3,)`` float arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BehindCameraError,
    CoincidentCentersError,
    DegenerateLineError,
    GeometryError,
)

# Third homogeneous component (of a unit vector) below which a point is at infinity.
INFINITY_TOL = 1e-12


def as_point(q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(2)
    if not np.all(np.isfinite(q)):
        raise GeometryError(f"non-finite point {q}")
    return q


def homogenize(q) -> np.ndarray:
    return np.array([q[0], q[1], 1.0])


def dehomogenize(v) -> np.ndarray:
    if abs(v[2]) < INFINITY_TOL * max(1.0, abs(v[0]), abs(v[1])):
        raise GeometryError(f"point {v} is at infinity")
    return np.array([v[0] / v[2], v[1] / v[2]])


@dataclass(frozen=True)
class Correspondence:
    """A pair of image points (p in image I, p_prime in image I')."""

    p: np.ndarray
    p_prime: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", as_point(self.p))
        object.__setattr__(self, "p_prime", as_point(self.p_prime))

    def as_vector(self) -> np.ndarray:
        """The 4-vector (x, y, x', y')."""
        return np.concatenate([self.p, self.p_prime])

    @classmethod
    def from_vector(cls, v) -> "Correspondence":
        v = np.asarray(v, dtype=float)
        return cls(v[:2], v[2:4])

    def __eq__(self, other):
        if not isinstance(other, Correspondence):
            return NotImplemented
        return bool(np.array_equal(self.p, other.p) and np.array_equal(self.p_prime, other.p_prime))

    def __hash__(self):
        return hash(tuple(self.as_vector()))


# -- lines ---------------------------------------------------------------

def normal(l) -> np.ndarray:
    return np.array([l[0], l[1]], dtype=float)


def tangent(l) -> np.ndarray:
    return np.array([l[1], -l[0]], dtype=float)


def _line_scale(l) -> float:
    lam = math.hypot(l[0], l[1])
    if lam == 0.0:
        raise DegenerateLineError(f"line {tuple(l)} has no normal direction")
    return lam


def unit_normal(l) -> np.ndarray:
    return normal(l) / _line_scale(l)


def unit_tangent(l) -> np.ndarray:
    return tangent(l) / _line_scale(l)


def signed_distance(q, l) -> float:
    """Signed distance of point ``q`` from line ``l`` (positive on the normal side)."""
    lam = _line_scale(l)
    return (l[0] * q[0] + l[1] * q[1] + l[2]) / lam


def foot_of_perpendicular(q, l) -> np.ndarray:
    """Orthogonal projection of ``q`` onto ``l``."""
    n = unit_normal(l)
    return np.asarray(q, dtype=float) - signed_distance(q, l) * n


# -- cameras -------------------------------------------------------------

@dataclass(frozen=True)
class Camera:
    """Pinhole camera with square pixels and zero skew.

    ``orientation`` rotates world axes onto camera axes, so a world point X
    has camera coordinates ``orientation @ (X - position)``.
    """

    position: np.ndarray
    orientation: np.ndarray
    focal: float
    principal: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.position, dtype=float).reshape(3)
        R = np.asarray(self.orientation, dtype=float).reshape(3, 3)
        if not self.focal > 0:
            raise GeometryError(f"focal length must be positive, got {self.focal}")
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-9) or np.linalg.det(R) < 0:
            raise GeometryError("orientation is not a proper rotation")
        object.__setattr__(self, "position", P)
        object.__setattr__(self, "orientation", R)
        object.__setattr__(self, "focal", float(self.focal))
        object.__setattr__(self, "principal", as_point(self.principal))

    @property
    def K(self) -> np.ndarray:
        u, v = self.principal
        return np.array([[self.focal, 0.0, u], [0.0, self.focal, v], [0.0, 0.0, 1.0]])

    def projection_matrix(self) -> np.ndarray:
        """The 3x4 matrix K R [I | -P]."""
        return self.K @ self.orientation @ np.hstack([np.eye(3), -self.position[:, None]])

    def depth(self, X) -> float:
        return float((self.orientation @ (np.asarray(X, dtype=float) - self.position))[2])


def project(cam: Camera, X) -> np.ndarray:
    a, b, c = cam.orientation @ (np.asarray(X, dtype=float) - cam.position)
    if abs(c) < 1e-12:
        raise BehindCameraError("point projects to infinity (zero depth)")
    if c < 0:
        raise BehindCameraError(f"point is behind the camera (depth {c:g})")
    u, v = cam.principal
    return np.array([cam.focal * a / c + u, cam.focal * b / c + v])


# -- fundamental matrices -------------------------------------------------

def skew(v) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def complement_basis(e) -> np.ndarray:
    """2x3 matrix whose exact (real-arithmetic) null vector is ``e``.

    Rows are e_k * unit_i - e_i * unit_k for the two indices i other than the
    index k of the largest |e_k|, so ``basis @ e`` vanishes term by term.
    """
    e = np.asarray(e, dtype=float)
    k = int(np.argmax(np.abs(e)))
    basis = np.zeros((2, 3))
    for row, i in enumerate(j for j in range(3) if j != k):
        basis[row, i] = e[k]
        basis[row, k] = -e[i]
    return basis


@dataclass(frozen=True)
class FundamentalMatrix:
    """Rank-2 fundamental matrix held in factored form m = A^T C A'.

    ``e`` (epipole in image I, m^T e = 0) and ``e_prime`` (epipole in image
    I', m e' = 0) are unit homogeneous 3-vectors; ``basis``/``basis_prime``
    are their complement bases (see :func:`complement_basis`) and ``core`` the
    2x2 matrix C.  The product is exactly singular with exactly these
    epipoles, and evaluating it through the factors avoids the cancellation
    that a plain 3x3 product suffers near the epipoles.  ``m`` is the
    materialized matrix.
    """

    m: np.ndarray
    e: np.ndarray
    e_prime: np.ndarray
    core: np.ndarray
    basis: np.ndarray
    basis_prime: np.ndarray

    @classmethod
    def from_matrix(cls, m, normalize: bool = True) -> "FundamentalMatrix":
        """Project ``m`` to rank 2 and factor it.

        With ``normalize`` the result has unit Frobenius norm and its
        largest-magnitude entry positive.
        """
        m = np.asarray(m, dtype=float).reshape(3, 3)
        U, S, Vt = np.linalg.svd(m)
        if S[1] <= 1e-12 * S[0]:
            raise GeometryError(f"matrix has rank < 2 (singular values {S})")
        e, e_prime = U[:, 2].copy(), Vt[2].copy()
        A, Ap = complement_basis(e), complement_basis(e_prime)
        # m = A^T C A' for the rank-2 part; A, A' have full row rank
        left = np.linalg.solve(A @ A.T, A)
        right = np.linalg.solve(Ap @ Ap.T, Ap)
        core = left @ m @ right.T
        return cls.from_factors(core, e, e_prime, normalize=normalize)

    @classmethod
    def from_factors(cls, core, e, e_prime, normalize: bool = True) -> "FundamentalMatrix":
        core = np.asarray(core, dtype=float).reshape(2, 2)
        e = np.asarray(e, dtype=float) / np.linalg.norm(e)
        e_prime = np.asarray(e_prime, dtype=float) / np.linalg.norm(e_prime)
        A, Ap = complement_basis(e), complement_basis(e_prime)
        m = A.T @ core @ Ap
        if normalize:
            scale = np.linalg.norm(m)
            if m.flat[np.argmax(np.abs(m))] < 0:
                scale = -scale
            core = core / scale
            m = A.T @ core @ Ap
        return cls(m, e, e_prime, core, A, Ap)

    def __eq__(self, other):
        if not isinstance(other, FundamentalMatrix):
            return NotImplemented
        return bool(np.array_equal(self.m, other.m))

    def __hash__(self):
        return hash(self.m.tobytes())

    def scaled(self, s: float) -> "FundamentalMatrix":
        return FundamentalMatrix(s * self.m, self.e, self.e_prime, s * self.core, self.basis, self.basis_prime)

    @property
    def T(self) -> np.ndarray:
        return self.m.T

    def reduced(self, q) -> np.ndarray:
        """A q~ for a point q of image I (zero exactly at the epipole)."""
        A = self.basis
        return A[:, 0] * q[0] + A[:, 1] * q[1] + A[:, 2]

    def reduced_prime(self, q) -> np.ndarray:
        A = self.basis_prime
        return A[:, 0] * q[0] + A[:, 1] * q[1] + A[:, 2]

    def line_of_prime(self, q_prime) -> np.ndarray:
        """Epipolar line F q~' in image I."""
        return self.basis.T @ (self.core @ self.reduced_prime(q_prime))

    def line_of(self, q) -> np.ndarray:
        """Epipolar line F^T q~ in image I'."""
        return self.basis_prime.T @ (self.core.T @ self.reduced(q))


def epipole_is_finite(e) -> bool:
    return abs(e[2]) > INFINITY_TOL


def epipole_point(e) -> np.ndarray | None:
    """Inhomogeneous epipole, or ``None`` when it lies at infinity."""
    if not epipole_is_finite(e):
        return None
    return np.array([e[0] / e[2], e[1] / e[2]])


def fm_from_cameras(cam: Camera, cam_prime: Camera) -> FundamentalMatrix:
    """Fundamental matrix with p~^T F p~' = 0 for projections of a common point."""
    baseline = cam.position - cam_prime.position
    if np.linalg.norm(baseline) <= 1e-12 * max(1.0, np.linalg.norm(cam.position)):
        raise CoincidentCentersError("camera centers coincide")
    # relative pose: X_c' = R_rel X_c + t
    R_rel = cam_prime.orientation @ cam.orientation.T
    t = cam_prime.orientation @ baseline
    essential = skew(t) @ R_rel  # X_c'^T E X_c = 0
    f_std = np.linalg.inv(cam_prime.K).T @ essential @ np.linalg.inv(cam.K)  # x'^T F x = 0
    return FundamentalMatrix.from_matrix(f_std.T)


@dataclass(frozen=True)
class EpipolarLines:
    l: np.ndarray
    l_prime: np.ndarray
    lam: float
    lam_prime: float


def epipolar_lines(F: FundamentalMatrix, B: Correspondence) -> EpipolarLines:
    l = F.line_of_prime(B.p_prime)
    l_prime = F.line_of(B.p)
    return EpipolarLines(l, l_prime, math.hypot(l[0], l[1]), math.hypot(l_prime[0], l_prime[1]))


# -- pencil of corresponding epipolar lines ---------------------------------

def pencil_first_line(F: FundamentalMatrix, t: float) -> np.ndarray:
    """Epipolar line of image I indexed by ``t``.

    For a finite epipole the line passes through e with direction
    (cos t, sin t).  For an epipole at infinity the lines are parallel to its
    direction and ``t`` is the offset along i = (1, 0) (or j = (0, 1) when the
    direction is parallel to i).
    """
    e = F.e
    if epipole_is_finite(e):
        a1 = e / e[2]
        a2 = a1 + np.array([math.cos(t), math.sin(t), 0.0])
        return np.cross(a1, a2)
    return np.cross(homogenize(_infinite_base(e, t)), np.array([e[0], e[1], 0.0]))


def _infinite_base(e, t: float) -> np.ndarray:
    direction = np.array([e[0], e[1]])
    if abs(direction[1]) > 1e-12 * np.linalg.norm(direction):
        return np.array([t, 0.0])  # e and i independent
    return np.array([0.0, t])


def pencil_point(F: FundamentalMatrix, t: float, d: float) -> np.ndarray:
    """Point of image I on line ``t`` at signed offset ``d`` along it."""
    e = F.e
    if epipole_is_finite(e):
        return epipole_point(e) + d * unit_tangent(pencil_first_line(F, t))
    direction = np.array([e[0], e[1]])
    return _infinite_base(e, t) + d * direction / np.linalg.norm(direction)


def pencil_second_line(F: FundamentalMatrix, t: float) -> np.ndarray:
    """Epipolar line of image I' corresponding to ``pencil_first_line(F, t)``."""
    return F.line_of(pencil_point(F, t, 1.0))
