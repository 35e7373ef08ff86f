"""Error criteria for a correspondence with respect to a fundamental matrix.

All distances are returned squared, in pixels^2.

* ``algebraic_distance``   R = p~^T F p~'
* ``sed_sq``               symmetric epipolar distance
* ``sampson_sq``           first-order (Sampson) approximation of RE
* ``kanatani_correct``     iterated re-linearized correction (REK)
* ``hartley_sturm_correct`` exact optimal correction (RE), via a degree-6 polynomial
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEpipolarLineError, NumericalFailure, PointAtEpipoleError
from .geometry import Correspondence, FundamentalMatrix


@dataclass(frozen=True)
class CorrectionResult:
    p_hat: np.ndarray
    p_hat_prime: np.ndarray
    e_sq: float
    iterations: int
    converged: bool = True

    @property
    def corrected(self) -> Correspondence:
        return Correspondence(self.p_hat, self.p_hat_prime)


@dataclass(frozen=True)
class KanataniConfig:
    delta: float = 1e-6
    max_iterations: int = 1000

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


def _factors(F: FundamentalMatrix):
    """Scalar copies of the basis columns and core: (A2, a3, A2', a3', C)."""
    A, Ap = F.basis.tolist(), F.basis_prime.tolist()
    return (
        (A[0][0], A[0][1], A[1][0], A[1][1]), (A[0][2], A[1][2]),
        (Ap[0][0], Ap[0][1], Ap[1][0], Ap[1][1]), (Ap[0][2], Ap[1][2]),
        tuple(F.core.ravel().tolist()),
    )


def _terms(A2, Ap2, C, u1, u2, v1, v2):
    """(R, n(l), n(l')) from the reduced coordinates u = A p~, v = A' p~'."""
    w1 = C[0] * v1 + C[1] * v2  # C v
    w2 = C[2] * v1 + C[3] * v2
    z1 = C[0] * u1 + C[2] * u2  # C^T u
    z2 = C[1] * u1 + C[3] * u2
    r = u1 * w1 + u2 * w2
    l1 = A2[0] * w1 + A2[2] * w2
    l2 = A2[1] * w1 + A2[3] * w2
    k1 = Ap2[0] * z1 + Ap2[2] * z2
    k2 = Ap2[1] * z1 + Ap2[3] * z2
    return r, l1, l2, k1, k2


def _reduced(A2, a3, x, y):
    return A2[0] * x + A2[1] * y + a3[0], A2[2] * x + A2[3] * y + a3[1]


EPS = 2.220446049250313e-16


def _at_epipole(A2, a3, x, y, u1, u2) -> bool:
    """True when the reduced coordinates vanish to working precision."""
    bound = 8.0 * EPS * (
        abs(A2[0] * x) + abs(A2[1] * y) + abs(a3[0]) + abs(A2[2] * x) + abs(A2[3] * y) + abs(a3[1])
    )
    return abs(u1) + abs(u2) <= bound


def _at(F: FundamentalMatrix, B: Correspondence):
    """(R, l1, l2, l1', l2', p at e, p' at e')."""
    A2, a3, Ap2, ap3, C = _factors(F)
    x, y = float(B.p[0]), float(B.p[1])
    xp, yp = float(B.p_prime[0]), float(B.p_prime[1])
    u1, u2 = _reduced(A2, a3, x, y)
    v1, v2 = _reduced(Ap2, ap3, xp, yp)
    return _terms(A2, Ap2, C, u1, u2, v1, v2) + (
        _at_epipole(A2, a3, x, y, u1, u2),
        _at_epipole(Ap2, ap3, xp, yp, v1, v2),
    )


def algebraic_distance(F: FundamentalMatrix, B: Correspondence) -> float:
    return _at(F, B)[0]


def sed_sq(F: FundamentalMatrix, B: Correspondence) -> float:
    r, l1, l2, k1, k2, at_e, at_ep = _at(F, B)
    lam_sq = l1 * l1 + l2 * l2
    lam_p_sq = k1 * k1 + k2 * k2
    if at_e or at_ep or lam_sq == 0.0 or lam_p_sq == 0.0:
        raise DegenerateEpipolarLineError("a point lies at an epipole; its epipolar line is undefined")
    return r * r / lam_sq + r * r / lam_p_sq


def sampson_sq(F: FundamentalMatrix, B: Correspondence) -> float:
    r, l1, l2, k1, k2, at_e, at_ep = _at(F, B)
    grad_sq = l1 * l1 + l2 * l2 + k1 * k1 + k2 * k2
    if (at_e and at_ep) or grad_sq == 0.0:
        raise DegenerateEpipolarLineError("constraint gradient vanishes (both points at epipoles)")
    return r * r / grad_sq


def sampson_correct(F: FundamentalMatrix, B: Correspondence) -> CorrectionResult:
    """First-order correction; the result need not satisfy the constraint exactly."""
    r, l1, l2, k1, k2, at_e, at_ep = _at(F, B)
    grad_sq = l1 * l1 + l2 * l2 + k1 * k1 + k2 * k2
    if (at_e and at_ep) or grad_sq == 0.0:
        raise DegenerateEpipolarLineError("constraint gradient vanishes (both points at epipoles)")
    k = r / grad_sq
    dx, dy, dxp, dyp = k * l1, k * l2, k * k1, k * k2
    p_hat = np.array([B.p[0] - dx, B.p[1] - dy])
    p_prime_hat = np.array([B.p_prime[0] - dxp, B.p_prime[1] - dyp])
    return CorrectionResult(p_hat, p_prime_hat, dx * dx + dy * dy + dxp * dxp + dyp * dyp, 1, True)


def kanatani_correct(F: FundamentalMatrix, B: Correspondence, cfg: KanataniConfig = KanataniConfig()) -> CorrectionResult:
    """Iterated first-order correction, re-linearized at the current estimate.

    Convergence is absolute (|E_i - E_{i-1}| <= delta) while E_i <= 1 and
    relative (<= delta * E_i) above.  Hitting ``max_iterations`` first returns
    the last estimate with ``converged=False``.
    """
    x, y = float(B.p[0]), float(B.p[1])
    xp, yp = float(B.p_prime[0]), float(B.p_prime[1])
    A2, a3, Ap2, ap3, C = _factors(F)
    u1, u2 = _reduced(A2, a3, x, y)
    v1, v2 = _reduced(Ap2, ap3, xp, yp)
    if _at_epipole(A2, a3, x, y, u1, u2) and _at_epipole(Ap2, ap3, xp, yp, v1, v2):
        raise DegenerateEpipolarLineError("both points sit at their epipoles")
    delta = cfg.delta
    dx = dy = dxp = dyp = 0.0
    e_prev = math.inf
    e = 0.0
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        # reduced coordinates are affine in the points, so shift them exactly
        uh1 = u1 - (A2[0] * dx + A2[1] * dy)
        uh2 = u2 - (A2[2] * dx + A2[3] * dy)
        vh1 = v1 - (Ap2[0] * dxp + Ap2[1] * dyp)
        vh2 = v2 - (Ap2[2] * dxp + Ap2[3] * dyp)
        r, l1, l2, k1, k2 = _terms(A2, Ap2, C, uh1, uh2, vh1, vh2)
        grad_sq = l1 * l1 + l2 * l2 + k1 * k1 + k2 * k2
        if not grad_sq > 1e-300:
            raise DegenerateEpipolarLineError("constraint gradient vanishes at the current estimate")
        g = r + l1 * dx + l2 * dy + k1 * dxp + k2 * dyp
        k = g / grad_sq
        dx, dy, dxp, dyp = k * l1, k * l2, k * k1, k * k2
        e = dx * dx + dy * dy + dxp * dxp + dyp * dyp
        change = abs(e - e_prev)
        if change <= (delta if e <= 1.0 else delta * e):
            converged = True
            break
        e_prev = e
    xh, yh, xph, yph = x - dx, y - dy, xp - dxp, yp - dyp
    return CorrectionResult(np.array([xh, yh]), np.array([xph, yph]), e, it, converged)


# -- Hartley-Sturm ---------------------------------------------------------

@dataclass(frozen=True)
class HSNormalForm:
    """Reduced parameters of F after moving both points to the origin and
    rotating both epipoles onto the x axis: e = (1, 0, f), e' = (1, 0, f').

    In the reduced frame the constraint reads r~^T G r~' = 0 where
    ``G = rot @ F_s @ rot_prime.T`` and G^T has the layout
    [[f f' d, -f' c, -f' d], [-f b, a, b], [-f d, c, d]].
    """

    a: float
    b: float
    c: float
    d: float
    f: float
    f_prime: float
    origin: np.ndarray
    origin_prime: np.ndarray
    rot: np.ndarray  # 2x2, image I
    rot_prime: np.ndarray  # 2x2, image I'

    def reduced_matrix(self) -> np.ndarray:
        """G^T rebuilt from the reduced parameters."""
        a, b, c, d, f, fp = self.a, self.b, self.c, self.d, self.f, self.f_prime
        return np.array([[f * fp * d, -fp * c, -fp * d], [-f * b, a, b], [-f * d, c, d]])

    def cost(self, t: float) -> float:
        a, b, c, d, f, fp = self.a, self.b, self.c, self.d, self.f, self.f_prime
        if math.isinf(t):
            if f == 0.0:
                return math.inf
            den = a * a + fp * fp * c * c
            return 1.0 / (f * f) + (c * c / den if den > 0 else math.inf)
        ctd = c * t + d
        atb = a * t + b
        den = atb * atb + fp * fp * ctd * ctd
        if den == 0.0:
            return math.inf
        return t * t / (1.0 + f * f * t * t) + ctd * ctd / den

    def polynomial(self) -> np.ndarray:
        """Coefficients (highest degree first) of the numerator of d cost / dt:

        t ((at+b)^2 + f'^2 (ct+d)^2)^2 - (ad - bc)(1 + f^2 t^2)^2 (at+b)(ct+d).
        """
        a, b, c, d, f, fp = self.a, self.b, self.c, self.d, self.f, self.f_prime
        f2, fp2 = f * f, fp * fp
        q = (a * a + fp2 * c * c, 2.0 * (a * b + fp2 * c * d), b * b + fp2 * d * d)
        first = [0.0] + _convolve(_convolve(q, q), (1.0, 0.0))
        quartic = (f2 * f2, 0.0, 2.0 * f2, 0.0, 1.0)
        second = _convolve(quartic, (a * c, a * d + b * c, b * d))
        k = a * d - b * c
        return np.array([u - k * v for u, v in zip(first, second)])

    def lines_at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Corresponding epipolar lines (reduced frame) selected by ``t``."""
        a, b, c, d, f, fp = self.a, self.b, self.c, self.d, self.f, self.f_prime
        if math.isinf(t):
            return np.array([f, 0.0, -1.0]), np.array([-fp * c, a, c])
        ctd = c * t + d
        return np.array([t * f, 1.0, -t]), np.array([-fp * ctd, a * t + b, ctd])

    def points_at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Corrected points in original image coordinates for parameter ``t``."""
        l, lp = self.lines_at(t)
        r = _foot_from_origin(l)
        rp = _foot_from_origin(lp)
        return self.origin + self.rot.T @ r, self.origin_prime + self.rot_prime.T @ rp


def _convolve(p, q):
    out = [0.0] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        for j, qj in enumerate(q):
            out[i + j] += pi * qj
    return out


def _horner(coeffs, t: float) -> tuple[float, float]:
    """Value and derivative of the polynomial at t."""
    v = dv = 0.0
    for c in coeffs:
        dv = dv * t + v
        v = v * t + c
    return v, dv


def _foot_from_origin(l) -> np.ndarray:
    n2 = l[0] * l[0] + l[1] * l[1]
    if n2 == 0.0:
        raise NumericalFailure("degenerate epipolar line in reduced frame")
    return np.array([-l[2] * l[0] / n2, -l[2] * l[1] / n2])


def _epipole_frame(e_shifted, where: str):
    """Unit scaling and rotation taking a translated epipole to (1, 0, f)."""
    e1, e2, e3 = e_shifted
    h = math.hypot(e1, e2)
    if h <= 1e-9 * abs(e3):
        raise PointAtEpipoleError(f"{where} point coincides with its epipole")
    c, s = e1 / h, e2 / h
    return np.array([[c, s], [-s, c]]), e3 / h


def hs_normal_form(F: FundamentalMatrix, B: Correspondence) -> HSNormalForm:
    x, y = B.p
    xp, yp = B.p_prime
    # F translated to both points, assembled from the factors: the last
    # column of A T^-1 is A p~, computed without cancellation
    left = np.column_stack([F.basis[:, :2], F.reduced(B.p)])
    right = np.column_stack([F.basis_prime[:, :2], F.reduced_prime(B.p_prime)])
    fs = left.T @ F.core @ right
    e, ep = F.e, F.e_prime
    rot, f = _epipole_frame((e[0] - x * e[2], e[1] - y * e[2], e[2]), "first")
    rot_p, fp = _epipole_frame((ep[0] - xp * ep[2], ep[1] - yp * ep[2], ep[2]), "second")
    r3 = np.eye(3)
    r3[:2, :2] = rot
    rp3 = np.eye(3)
    rp3[:2, :2] = rot_p
    g = r3 @ fs @ rp3.T
    return HSNormalForm(
        a=g[1, 1], b=g[2, 1], c=g[1, 2], d=g[2, 2], f=f, f_prime=fp,
        origin=B.p.copy(), origin_prime=B.p_prime.copy(), rot=rot, rot_prime=rot_p,
    )


def companion_roots(coeffs) -> np.ndarray:
    """All complex roots of a polynomial (highest degree first) as companion eigenvalues."""
    c = np.asarray(coeffs, dtype=float)
    nz = np.flatnonzero(c)
    if nz.size == 0 or nz[0] >= c.size - 1:
        return np.empty(0, dtype=complex)
    c = c[nz[0]:] / c[nz[0]]
    n = c.size - 1
    comp = np.zeros((n, n))
    comp[0, :] = -c[1:]
    if n > 1:
        comp[np.arange(1, n), np.arange(n - 1)] = 1.0
    return np.linalg.eigvals(comp)


def real_roots(coeffs, imag_tol: float = 1e-8) -> np.ndarray:
    roots = companion_roots(coeffs)
    keep = np.abs(roots.imag) <= imag_tol * (1.0 + np.abs(roots.real))
    return np.sort(roots.real[keep])


def _root_estimates(coeffs) -> list[float]:
    """Real parts of all roots, each taken from the better conditioned solve.

    Companion eigenvalues carry an absolute error relative to the largest
    root, so a badly scaled polynomial loses its small roots.  Large roots
    come from the polynomial itself and small ones from its reversal.
    """
    direct = sorted(companion_roots(coeffs), key=abs, reverse=True)
    inverse = sorted((1.0 / r for r in companion_roots(coeffs[::-1]) if r != 0), key=abs)
    n_large = sum(abs(r) >= 1.0 for r in direct)
    small = inverse[: len(direct) - n_large]
    small += direct[n_large + len(small):]  # zero roots have no reciprocal
    return [float(r.real) for r in direct[:n_large] + small]


def _newton_polish(coeffs, t: float, steps: int = 2) -> float:
    for _ in range(steps):
        v, dv = _horner(coeffs, t)
        if dv == 0.0:
            break
        step = v / dv
        if not math.isfinite(step):
            break
        t_new = t - step
        if abs(t_new - t) > 1e-3 * (1.0 + abs(t)):
            break  # not in the quadratic basin; keep the eigenvalue estimate
        t = t_new
    return t


def hartley_sturm_correct(F: FundamentalMatrix, B: Correspondence) -> CorrectionResult:
    """Optimal (gold-standard) correction; ``e_sq`` is RE^2.

    ``iterations`` counts the candidate parameters compared: the real parts
    of the six polynomial roots plus the asymptotic candidate when defined.
    """
    nf = hs_normal_form(F, B)
    coeffs = nf.polynomial()
    plain = coeffs.tolist()
    candidates = [_newton_polish(plain, r) for r in _root_estimates(coeffs)]
    if nf.f != 0.0:
        candidates.append(math.inf)
    best_t, best_cost = None, math.inf
    for t in candidates:
        s = nf.cost(t)
        if s < best_cost:
            best_t, best_cost = t, s
    if best_t is None or not math.isfinite(best_cost):
        raise NumericalFailure("no candidate produced a finite cost")
    p_hat, p_hat_prime = nf.points_at(best_t)
    return CorrectionResult(p_hat, p_hat_prime, best_cost, len(candidates))


def re_sq(F: FundamentalMatrix, B: Correspondence) -> float:
    return hartley_sturm_correct(F, B).e_sq


def rek_sq(F: FundamentalMatrix, B: Correspondence, cfg: KanataniConfig = KanataniConfig()) -> float:
    return kanatani_correct(F, B, cfg).e_sq
