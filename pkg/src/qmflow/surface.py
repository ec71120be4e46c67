"""Rotationally symmetric hypersurfaces as radial graphs r = rho(phi).

The hypersurface is {(rho(phi), phi, theta)} in polar coordinates
dr^2 + s_K(r)^2 (dphi^2 + sin^2(phi) g_{S^{n-1}}) around the origin, with phi the
polar angle from the symmetry axis sampled at phi_j = j pi / N.  One principal
curvature belongs to the meridian, the other (multiplicity n-1) to the orbits
of the rotation group.
"""

from dataclasses import dataclass
from math import comb
import math

import numpy as np
from scipy.fft import dct
from scipy.optimize import minimize_scalar

from .errors import (CorruptProfile, InvalidProfile, LostStarshapedness,
                     OriginEscape, RecenterFailure)
from .spaceform import SpaceForm, _c, _s, sphere_area

MIN_GRID = 32


@dataclass(frozen=True, eq=False)
class Profile:
    sf: SpaceForm
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        if rho.ndim != 1:
            raise InvalidProfile("rho must be one-dimensional")
        N = rho.size - 1
        if N < MIN_GRID or N % 2:
            raise InvalidProfile(f"grid size N must be even and >= {MIN_GRID}, got {N}")
        if not np.all(np.isfinite(rho)):
            raise CorruptProfile("non-finite radius in profile")
        if np.any(rho <= 0):
            raise InvalidProfile("rho must be positive")
        if self.sf.K > 0 and rho.max() >= self.sf.radius_limit:
            raise InvalidProfile("profile reaches the antipode of the origin")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def N(self):
        return self.rho.size - 1

    @property
    def h(self):
        return math.pi / self.N

    @property
    def phi(self):
        return np.linspace(0.0, math.pi, self.N + 1)

    @classmethod
    def from_function(cls, sf, func, N):
        phi = np.linspace(0.0, math.pi, N + 1)
        return cls(sf, np.broadcast_to(np.asarray(func(phi), dtype=float), phi.shape))

    @classmethod
    def sphere(cls, sf, R, N):
        return cls(sf, np.full(N + 1, float(R)))

    def with_rho(self, rho):
        return Profile(self.sf, rho)

    # text format: header "K n N", then one "phi rho" row per grid point
    def dumps(self):
        lines = [f"{self.sf.K:.17g} {self.sf.n:d} {self.N:d}"]
        lines += [f"{f:.17g} {r:.17g}" for f, r in zip(self.phi, self.rho)]
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text):
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not rows or len(rows[0]) != 3:
            raise InvalidProfile("profile header must read 'K n N'")
        K, n, N = float(rows[0][0]), int(rows[0][1]), int(rows[0][2])
        body = rows[1:]
        if len(body) != N + 1 or any(len(r) != 2 for r in body):
            raise InvalidProfile(f"expected {N + 1} 'phi rho' rows")
        rho = np.array([float(r[1]) for r in body])
        return cls(SpaceForm(K, n), rho)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.loads(fh.read())


# -- finite differences and quadrature ---------------------------------------

def even_pad(f):
    """Pad by two points at each end, reflecting evenly across both poles."""
    return np.concatenate((f[2:0:-1], f, f[-2:-4:-1]))


def derivatives(f, h):
    """4th-order central first and second derivatives of a pole-even grid function."""
    g = even_pad(f)
    g0 = g[2:-2]
    # difference form: exact on constants, roundoff ~ eps |df| / h^2
    d1 = (8.0 * (g[3:-1] - g[1:-3]) - (g[4:] - g[:-4])) / (12.0 * h)
    d2 = (16.0 * ((g[1:-3] - g0) + (g[3:-1] - g0)) - ((g[:-4] - g0) + (g[4:] - g0))) / (12.0 * h * h)
    return d1, d2


def simpson_weights(N, h):
    w = np.full(N + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0


def trapezoid_weights(N, h):
    w = np.full(N + 1, h)
    w[0] = w[-1] = 0.5 * h
    return w


def elementary_symmetric(k_mer, k_rot, n):
    """sigma_0..sigma_n for curvatures (k_mer, k_rot x (n-1)); shape (n+1, ...)."""
    out = []
    for ell in range(n + 1):
        term = comb(n - 1, ell) * k_rot ** ell
        if ell >= 1:
            term = term + comb(n - 1, ell - 1) * k_mer * k_rot ** (ell - 1)
        out.append(term * np.ones_like(k_mer))
    return np.array(out)


def principal_curvatures(K, rho, d1, d2, phi):
    """Meridian and rotational curvatures of a radial graph, plus s_K, c_K and v.

    At the poles rho' cot(phi) is replaced by its limit rho''.
    """
    s = _s(K, rho)
    c = _c(K, rho)
    v = np.sqrt(1.0 + (d1 / s) ** 2)
    sin = np.sin(phi)
    pole = np.abs(sin) < 1e-14
    cot_term = np.where(pole, d2, d1 * np.cos(phi) / np.where(pole, 1.0, sin))
    k_rot = (c / s - cot_term / s ** 2) / v
    k_mer = (s * c + 2.0 * c * d1 ** 2 / s - d2) / (s ** 2 * v ** 3)
    return k_mer, k_rot, s, c, v


@dataclass(frozen=True, eq=False)
class CurvatureField:
    phi: np.ndarray
    rho: np.ndarray
    kappa_profile: np.ndarray
    kappa_rot: np.ndarray
    H: np.ndarray
    sigma: np.ndarray
    H_norm: np.ndarray
    u: np.ndarray
    cK: np.ndarray
    sK: np.ndarray
    v: np.ndarray
    drho: np.ndarray
    dV: np.ndarray
    sec_min: np.ndarray
    n: int
    K: float

    @property
    def kappa_min(self):
        return np.minimum(self.kappa_profile, self.kappa_rot)

    @property
    def kappa_max(self):
        return np.maximum(self.kappa_profile, self.kappa_rot)

    @property
    def strictly_convex(self):
        return bool(self.kappa_min.min() > 0)

    @property
    def A2(self):
        return self.kappa_profile ** 2 + (self.n - 1) * self.kappa_rot ** 2

    @property
    def traceless2(self):
        return (self.n - 1) / self.n * (self.kappa_profile - self.kappa_rot) ** 2

    def integrate(self, f):
        return float(np.dot(f, self.dV))

    def kappas(self):
        """Array (N+1, n) of the principal curvatures at every grid point."""
        rot = np.repeat(self.kappa_rot[:, None], self.n - 1, axis=1)
        return np.concatenate((self.kappa_profile[:, None], rot), axis=1)


def curvature(p, quadrature="simpson"):
    """Full curvature field of a profile, 4th-order differences with even pole reflection."""
    sf, n, N, h = p.sf, p.sf.n, p.N, p.h
    phi = p.phi
    d1, d2 = derivatives(p.rho, h)
    if not (np.all(np.isfinite(d1)) and np.all(np.isfinite(d2))):
        raise CorruptProfile("NaN in profile derivatives")
    k_mer, k_rot, s, c, v = principal_curvatures(sf.K, p.rho, d1, d2, phi)
    u = s / v
    if np.any(u <= 0):
        raise LostStarshapedness("support function is not positive", min_u=float(u.min()))
    H = k_mer + (n - 1) * k_rot
    sigma = elementary_symmetric(k_mer, k_rot, n)
    H_norm = sigma / np.array([comb(n, ell) for ell in range(n + 1)])[:, None]
    w = simpson_weights(N, h) if quadrature == "simpson" else trapezoid_weights(N, h)
    dV = sphere_area(n - 1) * w * s ** n * v * np.sin(phi) ** (n - 1)
    sec = k_mer * k_rot + sf.K
    if n >= 3:
        sec = np.minimum(sec, k_rot ** 2 + sf.K)
    return CurvatureField(phi=phi, rho=p.rho, kappa_profile=k_mer, kappa_rot=k_rot, H=H,
                          sigma=sigma, H_norm=H_norm, u=u, cK=c, sK=s, v=v, drho=d1, dV=dV,
                          sec_min=sec, n=n, K=sf.K)


def laplacian(cf, f):
    """Laplace-Beltrami operator of the hypersurface applied to a pole-even grid function."""
    h = cf.phi[1] - cf.phi[0]
    n = cf.n
    df, d2f = derivatives(f, h)
    s, v = cf.sK, cf.v
    gpp = 1.0 / (s * v) ** 2
    # log-derivative of sqrt(det g) / g_phiphi = s^{n-2} sin^{n-1} / v along phi
    _, d2rho = derivatives(cf.rho, h)
    dv = cf.drho * (d2rho * s - cf.drho ** 2 * cf.cK) / (s ** 3 * v)
    dlog = (n - 2) * cf.cK * cf.drho / s - dv / v
    sin = np.sin(cf.phi)
    pole = np.abs(sin) < 1e-14
    # (n-1) cot(phi) f' -> (n-1) f'' at the poles
    rot = np.where(pole, (n - 1) * d2f, (n - 1) * np.cos(cf.phi) * df / np.where(pole, 1.0, sin))
    return gpp * (d2f + rot + dlog * df)


# -- spectral interpolation ---------------------------------------------------

class CosineSeries:
    """Trigonometric interpolant of pole-even grid data, f(phi) = sum a_k cos(k phi)."""

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        N = values.size - 1
        y = dct(values, type=1)
        a = y / N
        a[0] *= 0.5
        a[-1] *= 0.5
        self.a = a
        self.k = np.arange(N + 1, dtype=float)

    def __call__(self, phi, deriv=0):
        phi = np.asarray(phi, dtype=float)
        arg = np.multiply.outer(phi, self.k)
        if deriv == 0:
            basis = np.cos(arg)
        elif deriv == 1:
            basis = -self.k * np.sin(arg)
        elif deriv == 2:
            basis = -self.k ** 2 * np.cos(arg)
        else:
            raise ValueError("deriv must be 0, 1 or 2")
        return basis @ self.a


def interpolant(p):
    return CosineSeries(p.rho)


def curvature_at(p, phi, series=None):
    """Principal curvatures and support function at arbitrary angles, from the interpolant."""
    series = series or interpolant(p)
    phi = np.asarray(phi, dtype=float)
    r, d1, d2 = series(phi), series(phi, 1), series(phi, 2)
    k_mer, k_rot, s, c, v = principal_curvatures(p.sf.K, r, d1, d2, phi)
    return {"rho": r, "kappa_profile": k_mer, "kappa_rot": k_rot, "u": s / v, "cK": c}


# -- embedding and axial isometries ------------------------------------------

def meridian_coords(K, rho, phi):
    """Unit-scaled ambient coordinates (X0, X1, X2) of meridian points.

    X0 is along the origin (K != 0) and X1 along the symmetry axis; for K = 0 the
    first coordinate is unused and set to 1.
    """
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if K > 0:
        q = math.sqrt(K)
        sr = np.sin(q * rho)
        return np.cos(q * rho), sr * np.cos(phi), sr * np.sin(phi)
    if K < 0:
        q = math.sqrt(-K)
        sr = np.sinh(q * rho)
        return np.cosh(q * rho), sr * np.cos(phi), sr * np.sin(phi)
    return np.ones_like(rho), rho * np.cos(phi), rho * np.sin(phi)


def ambient_normal(K, rho, drho, phi):
    """Outward unit normal in the meridian coordinates of `meridian_coords`.

    For K = 0 the first component is zero and the other two are the axial and
    radial-in-plane parts.
    """
    s = _s(K, rho)
    v = np.sqrt(1.0 + (drho / s) ** 2)
    slope = drho / s
    cos, sin = np.cos(phi), np.sin(phi)
    if K > 0:
        q = math.sqrt(K)
        a, b, c = -np.sin(q * rho), np.cos(q * rho), np.cos(q * rho)
    elif K < 0:
        q = math.sqrt(-K)
        a, b, c = np.sinh(q * rho), np.cosh(q * rho), np.cosh(q * rho)
    else:
        a, b, c = np.zeros_like(rho), np.ones_like(rho), np.ones_like(rho)
    return a / v, (b * cos + slope * sin) / v, (c * sin - slope * cos) / v


def embed(p):
    """Ambient Cartesian coordinates of the grid points of the generating meridian.

    K > 0: points of the radius-1/sqrt(K) sphere in R^{n+2}, the origin at
    (1/sqrt K, 0, ...); K < 0: the hyperboloid in Minkowski space R^{n+1,1};
    K = 0: points of R^{n+1} with the origin at 0.  The symmetry axis is the
    first spatial coordinate and the meridian lies in the plane of the second.
    """
    K, n = p.sf.K, p.sf.n
    X0, X1, X2 = meridian_coords(K, p.rho, p.phi)
    if K == 0:
        out = np.zeros((p.N + 1, n + 1))
        out[:, 0], out[:, 1] = X1, X2
        return out
    scale = 1.0 / math.sqrt(abs(K))
    out = np.zeros((p.N + 1, n + 2))
    out[:, 0], out[:, 1], out[:, 2] = X0 * scale, X1 * scale, X2 * scale
    return out


def to_axial_frame(K, rho, phi, shift):
    """Polar coordinates (rho', phi') of meridian points about the axial point at `shift`."""
    X0, X1, X2 = meridian_coords(K, rho, phi)
    if K > 0:
        q = math.sqrt(K)
        th = q * shift
        Y0 = math.cos(th) * X0 + math.sin(th) * X1
        Y1 = -math.sin(th) * X0 + math.cos(th) * X1
        r = np.arctan2(np.hypot(Y1, X2), Y0) / q
    elif K < 0:
        q = math.sqrt(-K)
        th = q * shift
        Y1 = -math.sinh(th) * X0 + math.cosh(th) * X1
        r = np.arcsinh(np.hypot(Y1, X2)) / q
    else:
        Y1 = X1 - shift
        r = np.hypot(Y1, X2)
    return r, np.arctan2(X2, Y1)


def axial_distance(p, a, phi, series=None):
    """Geodesic distance from the axial point at signed position `a` to M at angles phi."""
    series = series or interpolant(p)
    return to_axial_frame(p.sf.K, series(phi), phi, a)[0]


def axis_extent(p):
    """Signed axial positions where M meets the axis: (-rho(pi), rho(0))."""
    return -float(p.rho[-1]), float(p.rho[0])


def _refined_extremum(fun, phi, vals, which):
    j = int(np.argmin(vals) if which == "min" else np.argmax(vals))
    lo, hi = phi[max(j - 1, 0)], phi[min(j + 1, phi.size - 1)]
    sign = 1.0 if which == "min" else -1.0
    res = minimize_scalar(lambda x: sign * float(fun(np.array([x]))[0]), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-13})
    best = sign * res.fun
    endpoints = vals[j]
    return min(best, endpoints) if which == "min" else max(best, endpoints)


def distance_extrema(p, a=0.0, series=None, oversample=4):
    """(min, max) over the continuous hypersurface of the distance to the axial point a."""
    series = series or interpolant(p)
    phi = np.linspace(0.0, math.pi, oversample * p.N + 1)

    def fun(x):
        return to_axial_frame(p.sf.K, series(x), x, a)[0]

    vals = fun(phi)
    return _refined_extremum(fun, phi, vals, "min"), _refined_extremum(fun, phi, vals, "max")


def recenter(p, shift):
    """Re-express the hypersurface as a radial graph about the axial point at `shift`.

    The ambient isometry is exact; resampling onto the uniform angle grid inverts the
    new polar angle along the trigonometric interpolant of rho.
    """
    shift = float(shift)
    if shift == 0.0:
        return p
    lo, hi = axis_extent(p)
    if not (lo < shift < hi):
        raise OriginEscape(f"new origin at {shift} is outside the enclosed domain ({lo}, {hi})")
    series = interpolant(p)
    K, N = p.sf.K, p.N

    def new_angle(x):
        return to_axial_frame(K, series(x), x, shift)

    dense = np.linspace(0.0, math.pi, 8 * N + 1)
    _, ang = new_angle(dense)
    if np.any(np.diff(ang) <= 0):
        raise RecenterFailure("hypersurface is not starshaped about the new origin", shift=shift)
    target = np.linspace(0.0, math.pi, N + 1)
    # bracket each target on the dense monotone sample, then bisect
    idx = np.clip(np.searchsorted(ang, target[1:-1]), 1, dense.size - 1)
    lo_x, hi_x = dense[idx - 1], dense[idx]
    for _ in range(48):
        mid = 0.5 * (lo_x + hi_x)
        below = new_angle(mid)[1] < target[1:-1]
        lo_x = np.where(below, mid, lo_x)
        hi_x = np.where(below, hi_x, mid)
    x = np.concatenate(([0.0], 0.5 * (lo_x + hi_x), [math.pi]))
    r, _ = new_angle(x)
    try:
        return Profile(p.sf, r)
    except InvalidProfile as exc:
        raise RecenterFailure(str(exc), shift=shift) from exc
