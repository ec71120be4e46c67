"""Mixed volumes, quermassintegrals and the integral identities used as oracles.

Conventions: V_{n-l} = int_M H_l dV, W_0 = |Omega|, (n+1) W_1 = |M|,
W_{n+1} = omega_n / (n+1), and for l = 1..n

    V_{n-l} / (n+1) = W_{l+1} - K l / (n+2-l) W_{l-1}.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
import math

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidRadius, NoBall, NotConvex
from .spaceform import _s, sphere_area
from .surface import Profile, curvature, simpson_weights

GL_NODES = 64
HEMISPHERE_GAP = 1e-9
BALL_GRID = 1024


@dataclass(frozen=True, eq=False)
class QuermassReport:
    """V[l] = int H_l dV = V_{n-l} (l = 0..n); W[l] = W_l (l = 0..n+1)."""
    V: np.ndarray
    W: np.ndarray
    vol: float
    area: float
    recursion_residual: float = 0.0
    gauss_bonnet_defect: float = 0.0
    n: int = field(default=2)

    def mixed(self, m):
        """Mixed volume V_m."""
        return float(self.V[self.n - m])


@lru_cache(maxsize=None)
def _gauss_legendre(m):
    return np.polynomial.legendre.leggauss(m)


def radial_volume(K, n, rho, nodes=GL_NODES):
    """int_0^rho s_K(r)^n dr for every entry of rho, by Gauss-Legendre."""
    x, w = _gauss_legendre(nodes)
    rho = np.asarray(rho, dtype=float)
    r = 0.5 * rho[..., None] * (x + 1.0)
    return 0.5 * rho * (_s(K, r) ** n @ w)


def enclosed_volume(p, nodes=GL_NODES):
    n = p.sf.n
    w = simpson_weights(p.N, p.h) * np.sin(p.phi) ** (n - 1)
    return sphere_area(n - 1) * float(np.dot(w, radial_volume(p.sf.K, n, p.rho, nodes)))


def mixed_volume(p, m, quadrature="simpson", cf=None):
    """V_{n-m} = int_M H_m dV."""
    n = p.sf.n
    if not 0 <= m <= n:
        raise ValueError(f"m must lie in 0..{n}")
    cf = cf or curvature(p, quadrature=quadrature)
    return cf.integrate(cf.H_norm[m])


def quermassintegrals(p, cf=None, nodes=GL_NODES):
    n, K = p.sf.n, p.sf.K
    cf = cf or curvature(p)
    V = np.array([cf.integrate(cf.H_norm[ell]) for ell in range(n + 1)])
    W = np.zeros(n + 2)
    W[0] = enclosed_volume(p, nodes)
    W[1] = V[0] / (n + 1)
    for ell in range(1, n):
        W[ell + 1] = V[ell] / (n + 1) + K * ell / (n + 2 - ell) * W[ell - 1]
    W[n + 1] = sphere_area(n) / (n + 1)
    res = max((abs(V[ell] / (n + 1) - (W[ell + 1] - K * ell / (n + 2 - ell) * W[ell - 1]))
               for ell in range(1, n)), default=0.0)
    gb = V[n] / (n + 1) - (W[n + 1] - K * n / 2.0 * W[n - 1])
    return QuermassReport(V=V, W=W, vol=W[0], area=V[0], recursion_residual=float(res),
                          gauss_bonnet_defect=float(gb), n=n)


def quermass(p, ell, cf=None):
    """Single W_ell; avoids the volume quadrature when it is not needed."""
    n, K = p.sf.n, p.sf.K
    if ell == 0:
        return enclosed_volume(p)
    if ell == n + 1:
        return sphere_area(n) / (n + 1)
    cf = cf or curvature(p)
    W_prev2 = quermass(p, ell - 2, cf) if ell >= 2 else 0.0
    V = cf.integrate(cf.H_norm[ell - 1])
    return V / (n + 1) + (K * (ell - 1) / (n + 3 - ell) * W_prev2 if ell >= 2 else 0.0)


@lru_cache(maxsize=4096)
def _ball_quermass(K, n, ell, R, N):
    from .spaceform import SpaceForm
    return quermassintegrals(Profile.sphere(SpaceForm(K, n), R, N)).W[ell]


def ball_quermass(sf, ell, R, N=BALL_GRID):
    """f_ell(R) = W_ell(B_R), from the quadrature applied to rho = R."""
    R = float(R)
    if not 0 <= ell <= sf.n + 1:
        raise ValueError("ell out of range")
    if not (R > 0 and R <= sf.hemisphere_radius):
        raise InvalidRadius(f"ball radius {R} outside (0, {sf.hemisphere_radius}]")
    return float(_ball_quermass(sf.K, sf.n, ell, R, N))


def hemisphere_quermass(sf, ell, N=BALL_GRID):
    if sf.K <= 0:
        raise ValueError("hemispheres exist only for K > 0")
    return ball_quermass(sf, ell, sf.hemisphere_radius - HEMISPHERE_GAP, N)


def ball_radius_from_quermass(sf, ell, W, N=BALL_GRID, xtol=1e-13):
    """Inverse of f_ell by bracketed root finding."""
    if ell > sf.n:
        raise ValueError("W_{n+1} is constant; no inverse")
    W = float(W)
    if W <= 0:
        raise NoBall(f"W={W} is not positive")
    if sf.K > 0:
        hi = sf.hemisphere_radius - HEMISPHERE_GAP
        if W >= ball_quermass(sf, ell, hi, N):
            raise NoBall(f"W={W} exceeds the hemisphere value")
    else:
        hi = 1.0
        while ball_quermass(sf, ell, hi, N) < W:
            hi *= 2.0
            if hi > 1e6:
                raise NoBall(f"W={W} too large")
    lo = hi * 1e-12
    if ball_quermass(sf, ell, lo, N) >= W:
        raise NoBall(f"W={W} below the range of f_{ell}")
    return brentq(lambda R: ball_quermass(sf, ell, R, N) - W, lo, hi, xtol=xtol, rtol=1e-15,
                  maxiter=200)


def hsiung_minkowski_residual(p, ell, cf=None):
    """Relative defect of (l+1) int u sigma_{l+1} = (n-l) int c_K sigma_l."""
    n = p.sf.n
    if not 0 <= ell <= n - 1:
        raise ValueError(f"ell must lie in 0..{n - 1}")
    cf = cf or curvature(p)
    lhs = (ell + 1) * cf.integrate(cf.u * cf.sigma[ell + 1])
    rhs = (n - ell) * cf.integrate(cf.cK * cf.sigma[ell])
    return abs(lhs - rhs) / abs(rhs)


def normalized_means(kappas):
    """H_0..H_n along the last axis of an (..., n) array."""
    kappas = np.asarray(kappas, dtype=float)
    n = kappas.shape[-1]
    e = [np.ones(kappas.shape[:-1])] + [np.zeros(kappas.shape[:-1]) for _ in range(n)]
    for i in range(n):
        k = kappas[..., i]
        for ell in range(i + 1, 0, -1):
            e[ell] = e[ell] + k * e[ell - 1]
    return np.stack([e[ell] / comb(n, ell) for ell in range(n + 1)], axis=-1)


def newton_maclaurin_margins(kappas):
    """Smallest relative slack of H_{l-1} H_k >= H_l H_{k-1} (1 <= k < l <= n) per tuple."""
    Hn = normalized_means(kappas)
    n = Hn.shape[-1] - 1
    worst = np.full(Hn.shape[:-1], np.inf)
    for ell in range(2, n + 1):
        for k in range(1, ell):
            big = Hn[..., ell - 1] * Hn[..., k]
            slack = (big - Hn[..., ell] * Hn[..., k - 1]) / big
            worst = np.minimum(worst, slack)
    return worst


def newton_maclaurin_check(kappas, tol=1e-12):
    kappas = np.asarray(kappas, dtype=float)
    if np.any(kappas <= 0):
        raise NotConvex("Newton-MacLaurin check needs positive curvatures")
    margin = float(np.min(newton_maclaurin_margins(kappas)))
    return margin >= -tol, margin
