"""In- and outradius, the explicit origin constants, and the origin-shifting rules.

Every centre search runs along the symmetry axis, parametrised by the signed
geodesic position ``a`` of a point relative to the current origin.  Lemma-level
constants (d1, d2, d3, eps0, eps1, ...) are defined for K > 0 only.
"""

from dataclasses import asdict, dataclass
import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import BoundViolation, ConfigInfeasible, NotStrictlyInterior
from .integrals import ball_radius_from_quermass, hemisphere_quermass, quermass
from .spaceform import _c, _s
from .surface import (ambient_normal, axis_extent, curvature, distance_extrema,
                      interpolant, recenter, to_axial_frame)

DENSE = 8
OUTRADIUS_SLACK = 1e-6
# shifts smaller than this are treated as no shift
MIN_SHIFT = 1e-9


@dataclass(frozen=True)
class Radii:
    inradius: float
    in_center: float
    outradius: float
    out_center: float


@dataclass(frozen=True)
class OriginReport:
    inradius: float
    in_center: float
    outradius: float
    out_center: float
    d1: float
    d2: float
    d3: float
    eps0: float
    eps1: float
    maxH: float
    pinch_C0: float
    C1: float
    ybar: float
    psi0: float
    mu_bound: float
    tau_tilde: float

    def as_dict(self):
        return asdict(self)


class _Meridian:
    """Densely resampled meridian for fast distance queries from axial points."""

    def __init__(self, p, oversample=DENSE):
        self.K = p.sf.K
        self.phi = np.linspace(0.0, math.pi, oversample * p.N + 1)
        self.series = interpolant(p)
        self.rho = self.series(self.phi)

    def dist(self, a):
        return to_axial_frame(self.K, self.rho, self.phi, a)[0]


def _axis_search(fun, lo, hi):
    """Bounded minimiser along the axis; the current origin is kept when it is no worse,
    since the objectives are only piecewise smooth and can be flat near the optimum."""
    res = minimize_scalar(fun, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    if lo < 0.0 < hi and fun(0.0) <= res.fun:
        return 0.0
    return float(res.x)


def radii(p):
    """Inradius and outradius with axial centres."""
    series = interpolant(p)
    lo, hi = axis_extent(p)
    # refined extrema, so that off-grid optima are not favoured by sampling
    a_in = _axis_search(lambda a: -distance_extrema(p, a, series)[0], lo, hi)
    a_out = _axis_search(lambda a: distance_extrema(p, a, series)[1], lo, hi)
    r_in = distance_extrema(p, a_in, series)[0]
    r_out = distance_extrema(p, a_out, series)[1]
    return Radii(inradius=float(r_in), in_center=a_in, outradius=float(r_out), out_center=a_out)


def support_about(p, a, cf=None):
    """Generalised support function of M about the axial point at signed position a."""
    K = p.sf.K
    cf = cf or curvature(p)
    nu0, nu1, nu2 = ambient_normal(K, p.rho, cf.drho, p.phi)
    if K > 0:
        q = math.sqrt(K)
        return -(math.cos(q * a) * nu0 + math.sin(q * a) * nu1) / q
    if K < 0:
        q = math.sqrt(-K)
        # Minkowski product with the axial point (cosh, sinh, 0)
        return (math.cosh(q * a) * nu0 - math.sinh(q * a) * nu1) / q
    return (p.rho * np.cos(p.phi) - a) * nu1 + p.rho * np.sin(p.phi) * nu2


def _need_positive_K(sf):
    if sf.K <= 0:
        raise ValueError("origin constants are defined for K > 0")


def d2_constant(p, ell, W=None):
    sf = p.sf
    _need_positive_K(sf)
    W = quermass(p, ell) if W is None else W
    W_hemi = hemisphere_quermass(sf, ell)
    if W >= W_hemi:
        raise NotStrictlyInterior(f"W_{ell}={W} is not below the hemisphere value {W_hemi}")
    return (math.log(W_hemi) - math.log(W)) / (sf.n + 1 - ell)


def outradius_bound(p, ell, check=True):
    """pi/(2 sqrt K) - d2 / max H; raises BoundViolation if the outradius exceeds it."""
    d2 = d2_constant(p, ell)
    maxH = float(curvature(p).H.max())
    bound = p.sf.hemisphere_radius - d2 / maxH
    if check:
        r_out = radii(p).outradius
        if r_out > bound + OUTRADIUS_SLACK:
            raise BoundViolation(f"outradius {r_out} exceeds bound {bound}", outradius=r_out,
                                 bound=bound)
    return bound


def config_epsilon(sf, d2, maxH):
    """Largest admissible epsilon of the origin configuration."""
    q = math.sqrt(sf.K)
    return 0.25 * min(d2 / (2.0 * maxH), (0.5 * math.pi - math.atan(maxH / q)) / (2.0 * q))


def choose_origin(p, ell):
    """Axial shift placing the origin so that B_{4 eps} lies inside and max r <= pi/2 - 4 eps.

    Returns (shift, eps); both conditions are re-verified on the recentered profile.
    """
    sf = p.sf
    m = _Meridian(p)
    lo, hi = axis_extent(p)
    if sf.K <= 0:
        a = _axis_search(lambda a: -m.dist(a).min(), lo, hi)
        return (0.0 if abs(a) < MIN_SHIFT else a), 0.25 * m.dist(a).min()
    eps = config_epsilon(sf, d2_constant(p, ell), float(curvature(p).H.max()))
    cap = sf.hemisphere_radius

    def slack(a):
        d = m.dist(a)
        return -min(d.min(), cap - d.max())

    a = _axis_search(slack, lo, hi)
    if abs(a) < MIN_SHIFT:
        a = 0.0
    q = recenter(p, a)
    dmin, dmax = distance_extrema(q)
    if dmin < 4 * eps - 1e-12 or dmax > cap - 4 * eps + 1e-12:
        raise ConfigInfeasible(f"no admissible origin: dist range ({dmin}, {dmax}), eps={eps}",
                               shift=a, eps=eps)
    return a, eps


def eps0_function(sf, d2, d3):
    q = math.sqrt(sf.K)

    def eps0(y):
        return 0.25 * min(d2 * d3 * q / (2.0 * y),
                          (0.5 * math.pi - math.atan(y / (d3 * sf.K))) / (2.0 * q))
    return eps0


def largest_zero(f, y_lo=1e-8):
    """Largest zero of a function that is positive near 0 and tends to -inf."""
    y_hi = 1.0
    while f(y_hi) >= 0:
        y_hi *= 2.0
        if y_hi > 1e30:
            raise ValueError("no sign change found")
    ys = np.geomspace(y_lo, y_hi, 2000)
    vals = np.array([f(y) for y in ys])
    pos = np.nonzero(vals > 0)[0]
    if pos.size == 0:
        raise ValueError("function is never positive")
    j = pos[-1]
    return brentq(f, ys[j], ys[j + 1], xtol=1e-14 * ys[j + 1])


def tau_tilde(sf, rho):
    """Time for which B_{rho/4}(p) stays enclosed when B_rho(p) is enclosed at t = 0."""
    return math.log(_c(sf.K, rho / 4) / _c(sf.K, rho / 2)) / (sf.K * sf.n)


def psi_axial(p, d3, cf=None, samples=101):
    """Axial restriction of max_p (dist(p, M) - 2 d3)^+ max_M H / (u_p - d3)."""
    cf = cf or curvature(p)
    m = _Meridian(p)
    lo, hi = axis_extent(p)

    def value(a):
        dist = m.dist(a).min() - 2 * d3
        if dist <= 0:
            return 0.0
        return dist * float(np.max(cf.H / (support_about(p, a, cf) - d3)))

    grid = np.linspace(lo, hi, samples + 2)[1:-1]
    vals = np.array([value(a) for a in grid])
    j = int(np.argmax(vals))
    if vals[j] <= 0:
        return 0.0
    a_lo, a_hi = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
    res = minimize_scalar(lambda a: -value(a), bounds=(a_lo, a_hi), method="bounded",
                          options={"xatol": 1e-10})
    return max(float(vals[j]), -float(res.fun))


def origin_report(p, ell, W_target=None, C0=None):
    """All measured constants; C0 defaults to 1 / min(kappa_1 / H) on p itself."""
    sf = p.sf
    _need_positive_K(sf)
    n, K = sf.n, sf.K
    cf = curvature(p)
    W = quermass(p, ell, cf) if W_target is None else W_target
    rad = radii(p)
    maxH = float(cf.H.max())
    C0 = 1.0 / float(np.min(cf.kappa_min / cf.H)) if C0 is None else C0
    C1 = rad.outradius / rad.inradius
    d1 = ball_radius_from_quermass(sf, ell, W) / C1
    d2 = d2_constant(p, ell, W)
    d3 = float(_s(K, d1 / 4)) / 4
    eps0 = eps0_function(sf, d2, d3)
    sq = math.sqrt(K)

    def q_poly(y):
        return (n * math.pi * C0 ** (ell + 1) / sq * (1 + 5 * math.pi / (sq * d3)) * y / eps0(y)
                + n * math.pi ** 2 / 4 * y + math.pi / sq * y ** 2 - d3 ** 2 / n * y ** 3)

    ybar = largest_zero(q_poly)
    psi0 = psi_axial(p, d3, cf)
    eps1 = eps0(max(ybar, psi0))
    return OriginReport(
        inradius=rad.inradius, in_center=rad.in_center, outradius=rad.outradius,
        out_center=rad.out_center, d1=d1, d2=d2, d3=d3, eps0=eps0(d3 * sq * maxH), eps1=eps1,
        maxH=maxH, pinch_C0=C0, C1=C1, ybar=ybar, psi0=psi0,
        mu_bound=2 * n * C0 ** (ell + 1) / eps1, tau_tilde=tau_tilde(sf, rad.inradius))


def shift_decision(state, cfg, cf=None, omega=None):
    """Axial shift requested by the configured policy, or None."""
    if cfg.shift_policy == "off":
        return None
    p = state.profile
    if cfg.shift_policy == "interval":
        last = state.origin_log[-1][0] if state.origin_log else 0.0
        if state.t - last < cfg.tau0 or state.t == 0.0 and state.origin_log:
            return None
        shift, _ = choose_origin(p, state.ell)
        return shift or None
    # event-driven
    if state.final_reached or (omega is not None and omega < cfg.final_omega):
        return None
    cf = cf or curvature(p)
    rad_in = radii(p).inradius
    trigger = cf.u.min() < cfg.u_floor_ratio * float(_s(p.sf.K, rad_in))
    if p.sf.K > 0 and not trigger:
        eps = config_epsilon(p.sf, d2_constant(p, state.ell, state.W_target), float(cf.H.max()))
        trigger = p.rho.max() > p.sf.hemisphere_radius - 4 * eps
    if not trigger:
        return None
    shift, _ = choose_origin(p, state.ell)
    return shift or None
