"""Brute-force reprojection error, for validation only.

The optimal correction of (p, p') puts p on some epipolar line l of the
pencil through e and p' on its partner l'.  For a fixed pair the best points
are the orthogonal projections, so RE^2 = min over the pencil of
d^2(p, l) + d^2(p', l'): a one-dimensional search.  Both one-sided
corrections bound RE from above, hence only lines passing within
U = min(|d(p, l_B)|, |d(p', l'_B)|) of p need scanning.  Lines are indexed
by their signed distance from p, which keeps the grid fine on the pixel
scale no matter how far away the epipole is.  The scan runs once from each
image and the best few grid minima are refined by golden-section search.

Nothing here touches the polynomial machinery of the exact solver.
"""

from __future__ import annotations

import math

import numpy as np

from .criteria import algebraic_distance
from .geometry import Correspondence, FundamentalMatrix, epipolar_lines, epipole_is_finite

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f, a: float, b: float, iters: int = 200) -> tuple[float, float]:
    """Minimize ``f`` on [a, b]; returns (x, f(x))."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        if b - a <= 4 * np.finfo(float).eps * max(abs(a), abs(b), 1e-300):
            break
    return (c, fc) if fc < fd else (d, fd)


def _origin_sq_dist(lines) -> np.ndarray:
    return lines[..., 2] ** 2 / (lines[..., 0] ** 2 + lines[..., 1] ** 2)


def _sq_dist(q, lines) -> np.ndarray:
    """Squared distances of point q from each row of ``lines``."""
    num = lines[..., 0] * q[0] + lines[..., 1] * q[1] + lines[..., 2]
    return num * num / (lines[..., 0] ** 2 + lines[..., 1] ** 2)


def _shift(q) -> np.ndarray:
    """Matrix taking coordinates centered at ``q`` back to image coordinates."""
    return np.array([[1.0, 0.0, q[0]], [0.0, 1.0, q[1]], [0.0, 0.0, 1.0]])


class _Pencil:
    """Lines of one image through the epipole ``e`` (homogeneous), indexed
    relative to the measured point ``p`` of that image.

    ``m`` maps a point of this image to the partner line of the other image
    as ``q~ @ m``.  Both images are re-centered on their measured points, so
    every distance is read off the third line coefficient.
    """

    def __init__(self, m, e, p, p_other):
        self.m = _shift(p).T @ m @ _shift(p_other)
        e = np.asarray(e, dtype=float)
        e = np.array([e[0] - p[0] * e[2], e[1] - p[1] * e[2], e[2]])
        self.finite = epipole_is_finite(e / np.linalg.norm(e))
        if self.finite:
            self.e = np.array([e[0] / e[2], e[1] / e[2]])
            self.dist = math.hypot(self.e[0], self.e[1])
            self.w = -self.e / self.dist if self.dist > 0 else np.array([1.0, 0.0])
        else:
            v = np.array([e[0], e[1]])
            v = v / np.linalg.norm(v)
            self.normal = np.array([-v[1], v[0]])

    def lines_from_rotation(self, cos_a, sin_a):
        """Lines through the finite epipole, direction (p - e) rotated by angle a."""
        cos_a = np.asarray(cos_a, dtype=float)
        sin_a = np.asarray(sin_a, dtype=float)
        w = self.w
        u = np.stack([w[0] * cos_a - w[1] * sin_a, w[1] * cos_a + w[0] * sin_a], axis=-1)
        l = np.stack([-u[..., 1], u[..., 0], u[..., 1] * self.e[0] - u[..., 0] * self.e[1]], axis=-1)
        reach = max(self.dist, 1.0)
        q = np.concatenate([self.e + reach * u, np.ones(u.shape[:-1] + (1,))], axis=-1)
        return l, q @ self.m

    def lines_from_offset(self, delta):
        """Lines parallel to the infinite epipole direction, offset ``delta`` from p."""
        delta = np.asarray(delta, dtype=float)
        n = self.normal
        l = np.stack([np.full_like(delta, n[0]), np.full_like(delta, n[1]), delta], axis=-1)
        foot = -delta[..., None] * n
        q = np.concatenate([foot, np.ones(delta.shape + (1,))], axis=-1)
        return l, q @ self.m

    @staticmethod
    def cost(lines):
        l, lp = lines
        return _origin_sq_dist(l) + _origin_sq_dist(lp)

    def branches(self, bound: float):
        """Parameter maps (x -> lines) with their scan intervals."""
        if not self.finite:
            return [(self.lines_from_offset, -bound, bound)]
        if bound >= self.dist:
            def rotated(a):
                return self.lines_from_rotation(np.cos(a), np.sin(a))

            return [(rotated, -math.pi / 2, math.pi / 2)]
        ratio = 1.0 / self.dist

        def near(delta):
            r = np.asarray(delta) * ratio
            return self.lines_from_rotation(np.sqrt(1.0 - r * r), r)

        def far(delta):
            r = np.asarray(delta) * ratio
            return self.lines_from_rotation(-np.sqrt(1.0 - r * r), r)

        return [(near, -bound, bound), (far, -bound, bound)]


def _search(pencil: _Pencil, bound: float, grid_size: int, refine_iters: int, n_refine: int = 3) -> float:
    best = math.inf
    for lines_of, lo, hi in pencil.branches(bound):
        xs = np.linspace(lo, hi, grid_size)
        cost = pencil.cost(lines_of(xs))
        cost = np.where(np.isfinite(cost), cost, np.inf)
        interior = np.flatnonzero((cost[1:-1] <= cost[:-2]) & (cost[1:-1] <= cost[2:])) + 1
        cands = np.concatenate([interior, [0, grid_size - 1]])
        cands = cands[np.argsort(cost[cands])][:n_refine]
        for i in cands:
            best = min(best, float(cost[i]))
            a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid_size - 1)]
            _, fx = golden_section_min(lambda x: float(pencil.cost(lines_of(np.array([x])))[0]), a, b, refine_iters)
            best = min(best, fx)
    return best


def brute_force_re_sq(F: FundamentalMatrix, B: Correspondence, grid_size: int = 200_000, refine_iters: int = 200) -> float:
    lines = epipolar_lines(F, B)
    d1 = abs(lines.l @ np.append(B.p, 1.0)) / lines.lam
    d2 = abs(lines.l_prime @ np.append(B.p_prime, 1.0)) / lines.lam_prime
    bound = min(d1, d2)
    if bound == 0.0:
        return 0.0
    bound *= 1.0 + 1e-9
    first = _Pencil(F.m, F.e, B.p, B.p_prime)
    second = _Pencil(F.m.T, F.e_prime, B.p_prime, B.p)
    return min(_search(first, bound, grid_size, refine_iters), _search(second, bound, grid_size, refine_iters))


def pencil_cost_through(F: FundamentalMatrix, B: Correspondence, q) -> float:
    """d^2(p, l) + d^2(p', l') for the epipolar pair whose first line passes through q."""
    q_h = np.append(np.asarray(q, dtype=float), 1.0)
    e = F.e
    if epipole_is_finite(e):
        l = np.cross(e / e[2], q_h)
    else:
        l = np.cross(q_h, np.array([e[0], e[1], 0.0]))
    lp = F.m.T @ q_h
    return float(_sq_dist(B.p, l) + _sq_dist(B.p_prime, lp))


def numeric_gradient_R(F: FundamentalMatrix, B: Correspondence, h: float = 1e-4) -> np.ndarray:
    """Central-difference gradient of R over (x, y, x', y')."""
    if not h > 0:
        raise ValueError("h must be positive")
    v = B.as_vector()
    grad = np.empty(4)
    for i in range(4):
        step = np.zeros(4)
        step[i] = h
        grad[i] = (algebraic_distance(F, Correspondence.from_vector(v + step))
                   - algebraic_distance(F, Correspondence.from_vector(v - step))) / (2 * h)
    return grad
