"""Curvature functions, the equation F = gamma c_K^alpha, solitons F^beta = u and Gauss-map duality."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq

from .diagnostics import sphere_fit
from .errors import DualityFailed, GeometryError, OutOfCone, SolveFailed
from .spaceform import _c, _s
from .surface import (CosineSeries, Profile, ambient_normal, curvature, curvature_at,
                      interpolant)


def _cone(kappas):
    k = np.asarray(kappas, dtype=float)
    if np.any(~(k > 0)):
        raise OutOfCone("curvature function evaluated outside the positive cone")
    return k


@dataclass(frozen=True)
class CurvatureFunction:
    """Symmetric f(kappa), evaluated along the last axis of an (..., n) array."""
    name: str
    f: object
    df: object = None

    def __call__(self, kappas):
        return self.f(_cone(kappas))

    def grad(self, kappas, h=1e-6):
        k = _cone(kappas)
        if self.df is not None:
            return self.df(k)
        out = np.empty_like(k)
        for i in range(k.shape[-1]):
            step = h * np.maximum(np.abs(k[..., i]), 1.0)
            e = np.zeros_like(k)
            e[..., i] = step
            out[..., i] = (self.f(k + e) - self.f(k - e)) / (2 * step)
        return out

    def dual(self):
        """f(1/kappa), the dual used for inverse concavity."""
        return CurvatureFunction(f"dual({self.name})", lambda k: self.f(1.0 / k))

    def inverse(self):
        """1/F(1/kappa), the inverse curvature function."""
        return CurvatureFunction(f"inverse({self.name})", lambda k: 1.0 / self.f(1.0 / k))


def _mean(k):
    return k.sum(axis=-1)


def _norm(k):
    return math.sqrt(k.shape[-1]) * np.sqrt((k * k).sum(axis=-1))


def _harmonic(k):
    return k.shape[-1] ** 2 / (1.0 / k).sum(axis=-1)


MEAN = CurvatureFunction("mean", _mean, lambda k: np.ones_like(k))
NORM = CurvatureFunction("norm", _norm,
                         lambda k: math.sqrt(k.shape[-1]) * k / np.sqrt((k * k).sum(axis=-1))[..., None])
HARMONIC = CurvatureFunction("harmonic", _harmonic,
                             lambda k: k.shape[-1] ** 2 / k ** 2 / ((1.0 / k).sum(axis=-1) ** 2)[..., None])
BUILTIN = {"mean": MEAN, "norm": NORM, "harmonic": HARMONIC}


def dual_function(F):
    return F.dual()


def inverse_curvature_function(F):
    return F.inverse()


@dataclass
class EllipticReport:
    equation: str
    params: dict
    residual: float
    profile: Profile
    flags: dict = field(default_factory=dict)
    iterations: int = 0
    converged: bool = False
    sphere: object = None
    history: list = field(default_factory=list)

    def as_dict(self):
        out = {"type": "elliptic", "equation": self.equation, "params": self.params,
               "residual": self.residual, "flags": self.flags, "iterations": self.iterations,
               "converged": self.converged}
        if self.sphere is not None:
            out.update(sphereFitRadius=self.sphere.R, sphereFitCenter=self.sphere.center,
                       sphereFitResidual=self.sphere.residual)
        return out


# -- Weingarten equation -----------------------------------------------------

def gamma_for_radius(sf, R, alpha):
    """gamma for which the centred sphere of radius R solves F = gamma c_K^alpha."""
    return sf.n * float(sf.co(R)) / float(sf.c(R)) ** alpha


def radius_from_gamma(sf, gamma, alpha, near=None, samples=4000):
    """Root of n co_K(R) = gamma c_K(R)^alpha; the one closest to `near` if several."""
    hi = sf.hemisphere_radius if sf.K > 0 else 50.0 / math.sqrt(abs(sf.K)) if sf.K else 1e6

    def g(R):
        return sf.n * _c(sf.K, R) / _s(sf.K, R) - gamma * _c(sf.K, R) ** alpha

    R = np.linspace(0.0, hi, samples + 1)[1:-1] if sf.K > 0 else np.geomspace(1e-6, hi, samples)
    vals = g(R)
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if idx.size == 0:
        raise SolveFailed(f"no sphere solves the relation for gamma={gamma}, alpha={alpha}")
    roots = [brentq(g, R[i], R[i + 1], xtol=1e-15, rtol=1e-15) for i in idx]
    if near is None:
        if len(roots) > 1:
            raise SolveFailed(f"{len(roots)} sphere radii; pass `near` to choose")
        return roots[0]
    return min(roots, key=lambda r: abs(r - near))


def sectional_range(cf):
    """(min, max) sectional curvature of M from the Gauss equation."""
    k = np.sort(cf.kappas(), axis=1)
    return float(np.min(k[:, 0] * k[:, 1]) + cf.K), float(np.max(k[:, -1] * k[:, -2]) + cf.K)


def _weingarten_vector(p, F, gamma, alpha, cf=None):
    cf = cf or curvature(p)
    target = gamma * cf.cK ** alpha
    return F(cf.kappas()) / target - 1.0


def weingarten_residual(p, F, gamma, alpha, flags=None):
    """max |F(kappa) - gamma c_K^alpha| / (gamma c_K^alpha); fills `flags` if given."""
    cf = curvature(p)
    res = float(np.max(np.abs(_weingarten_vector(p, F, gamma, alpha, cf))))
    if flags is not None:
        sec_min, _ = sectional_range(cf)
        flags["sec_lower"] = sec_min >= -alpha * p.sf.K
        flags["sec_margin"] = sec_min + alpha * p.sf.K
        flags["in_hemisphere"] = bool(p.sf.K <= 0 or p.rho.max() < p.sf.hemisphere_radius)
        flags["convex"] = cf.strictly_convex
    return res


def weingarten_solve(F, gamma, alpha, sf, initial, tol=1e-12, accept=1e-10, max_iter=60,
                     fd_step=1e-7, max_halvings=20):
    """Damped Newton on the grid values of rho with a forward-difference Jacobian."""
    if initial.sf != sf:
        raise ValueError("initial profile lives in a different space form")
    rho = np.array(initial.rho)
    res_vec = _weingarten_vector(initial, F, gamma, alpha)
    res = float(np.max(np.abs(res_vec)))
    history = [res]
    it = 0
    while res > tol and it < max_iter:
        it += 1
        J = np.empty((rho.size, rho.size))
        for j in range(rho.size):
            pert = rho.copy()
            d = fd_step * max(1.0, abs(rho[j]))
            pert[j] += d
            J[:, j] = (_weingarten_vector(Profile(sf, pert), F, gamma, alpha) - res_vec) / d
        delta = np.linalg.lstsq(J, -res_vec, rcond=None)[0]
        lam = 1.0
        for _ in range(max_halvings):
            trial = rho + lam * delta
            try:
                tv = _weingarten_vector(Profile(sf, trial), F, gamma, alpha)
                tres = float(np.max(np.abs(tv)))
            except GeometryError:
                tres = math.inf
            if tres < res:
                break
            lam *= 0.5
        else:
            if res <= accept:
                break
            raise SolveFailed(f"Newton stagnated at residual {res:.3e}", residual=res)
        rho, res_vec, res = trial, tv, tres
        history.append(res)
    p = Profile(sf, rho)
    flags = {}
    residual = weingarten_residual(p, F, gamma, alpha, flags)
    return EllipticReport(equation="weingarten", params={"F": F.name, "gamma": gamma,
                                                         "alpha": alpha},
                          residual=residual, profile=p, flags=flags, iterations=it,
                          converged=residual < accept, sphere=sphere_fit(p), history=history)


# -- solitons and duality ----------------------------------------------------

def soliton_residual(p, F, beta):
    """max |F(kappa)^beta - u| / u."""
    cf = curvature(p)
    return float(np.max(np.abs(F(cf.kappas()) ** beta - cf.u) / cf.u))


def soliton_beta_for_sphere(sf, R, F=MEAN):
    """beta with F(co R, ..., co R)^beta = s_K(R), so the centred R-sphere is a soliton."""
    val = float(F(np.full(sf.n, float(sf.co(R)))))
    return math.log(float(sf.s(R))) / math.log(val)


def _dual_map(p, series):
    """phi -> (dual polar radius, dual polar angle) for K = 1 graphs."""
    def fun(x):
        r, d1 = series(x), series(x, 1)
        n0, n1, n2 = ambient_normal(1.0, r, d1, x)
        Y0, Y1, Y2 = -n0, -n1, -n2
        return np.arccos(np.clip(Y0, -1.0, 1.0)), np.arctan2(-Y2, Y1)
    return fun


def _invert_angles(fun, N, decreasing):
    """Parameters x on [0, pi] whose image angle hits the uniform grid."""
    dense = np.linspace(0.0, math.pi, 8 * N + 1)
    _, ang = fun(dense)
    if decreasing:
        ang = math.pi - ang
    if np.any(np.diff(ang) <= 0):
        raise DualityFailed("Gauss image is not a radial graph")
    target = np.linspace(0.0, math.pi, N + 1)[1:-1]
    idx = np.clip(np.searchsorted(ang, target), 1, dense.size - 1)
    lo, hi = dense[idx - 1], dense[idx]
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        a = fun(mid)[1]
        below = (math.pi - a if decreasing else a) < target
        lo, hi = np.where(below, mid, lo), np.where(below, hi, mid)
    x = np.concatenate(([0.0], 0.5 * (lo + hi), [math.pi]))
    return x[::-1] if decreasing else x


def dual_profile(p):
    """Gauss-map dual of a convex hypersurface of the unit sphere, as a radial graph."""
    if p.sf.K != 1:
        raise DualityFailed("duality is implemented for K = 1 only")
    if not curvature(p).strictly_convex:
        raise DualityFailed("duality needs a strictly convex hypersurface")
    series = interpolant(p)
    fun = _dual_map(p, series)
    x = _invert_angles(fun, p.N, decreasing=True)
    # uniform grid in the dual angle, increasing; x was reversed accordingly
    r, _ = fun(x)
    try:
        q = Profile(p.sf, r)
    except GeometryError as exc:
        raise DualityFailed(str(exc)) from exc
    if not curvature(q).strictly_convex:
        raise DualityFailed("dual hypersurface is not strictly convex")
    return q


@dataclass(frozen=True)
class DualityCheck:
    product_error: float
    support_error: float


def duality_check(p, q=None):
    """max |kappa~ kappa - 1| and max |c~_K - u| at corresponding points."""
    q = q or dual_profile(p)
    cf = curvature(p)
    _, ang = _dual_map(p, interpolant(p))(p.phi)
    d = curvature_at(q, ang, interpolant(q))
    prod = max(float(np.max(np.abs(d["kappa_profile"] * cf.kappa_profile - 1))),
               float(np.max(np.abs(d["kappa_rot"] * cf.kappa_rot - 1))))
    supp = float(np.max(np.abs(d["cK"] - cf.u)))
    return DualityCheck(product_error=prod, support_error=supp)


def soliton_via_duality(p, F, beta, tol=1e-6):
    """Soliton check on the dual hypersurface: 1/F(1/kappa~) = c~_K^{-1/beta}."""
    q = dual_profile(p)
    chk = duality_check(p, q)
    if chk.product_error > tol or chk.support_error > tol:
        raise DualityFailed(f"duality identities fail: {chk}")
    alpha = -1.0 / beta
    flags = {"product_error": chk.product_error, "support_error": chk.support_error}
    res = weingarten_residual(q, F.inverse(), 1.0, alpha, flags)
    flags["direct_residual"] = soliton_residual(p, F, beta)
    return EllipticReport(equation="soliton", params={"F": F.name, "beta": beta, "alpha": alpha},
                          residual=res, profile=q, flags=flags, converged=True)


# -- hypothesis flags --------------------------------------------------------

def fd_hessian(f, k, h=1e-4):
    """Central-difference Hessians of f at each row of k, shape (m, n, n)."""
    k = np.atleast_2d(k)
    m, n = k.shape
    step = h * k
    H = np.empty((m, n, n))
    f0 = f(k)
    for i in range(n):
        ei = np.zeros_like(k)
        ei[:, i] = step[:, i]
        H[:, i, i] = (f(k + ei) - 2 * f0 + f(k - ei)) / step[:, i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros_like(k)
            ej[:, j] = step[:, j]
            v = (f(k + ei + ej) - f(k + ei - ej) - f(k - ei + ej) + f(k - ei - ej))
            H[:, i, j] = H[:, j, i] = v / (4 * step[:, i] * step[:, j])
    return H


def cone_samples(n, count=1000, seed=0, lo=0.1, hi=10.0):
    rng = np.random.default_rng(seed)
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size=(count, n)))


def _scaled_hessian(F, k):
    """diag(k) Hess f diag(k) / f: same inertia as the Hessian, dimensionless."""
    H = fd_hessian(F, k)
    return H * (k[:, :, None] * k[:, None, :]) / F(k)[:, None, None]


def convexity_margin(F, n, count=1000, seed=0):
    """Smallest eigenvalue of the scaled Hessian of f over random cone points."""
    k = cone_samples(n, count, seed)
    return float(np.min(np.linalg.eigvalsh(_scaled_hessian(F, k))[:, 0]))


def inverse_concavity_margin(F, n, count=1000, seed=0):
    """Minus the largest scaled Hessian eigenvalue of 1/F(1/kappa)."""
    k = cone_samples(n, count, seed)
    return float(np.min(-np.linalg.eigvalsh(_scaled_hessian(F.inverse(), k))[:, -1]))


def hypothesis_check(p, F, params, count=1000, seed=0, tol=1e-6):
    """Sectional-curvature bound and convexity / inverse concavity of F, with margins."""
    cf = curvature(p)
    sec_min, sec_max = sectional_range(cf)
    flags = {}
    if "alpha" in params:
        alpha = params["alpha"]
        flags["sec_margin"] = sec_min + alpha * p.sf.K
        flags["sec_ok"] = flags["sec_margin"] >= 0
    if "beta" in params:
        beta = params["beta"]
        bound = math.copysign(1.0, p.sf.K) / (1.0 - beta) if beta != 1 else math.inf
        flags["sec_margin"] = bound - sec_max
        flags["sec_ok"] = flags["sec_margin"] >= 0
    cm = convexity_margin(F, p.sf.n, count, seed)
    im = inverse_concavity_margin(F, p.sf.n, count, seed)
    flags.update(convex_margin=cm, convex=cm >= -tol, inverse_concave_margin=im,
                 inverse_concave=im >= -tol)
    routes = [name for name, ok in (("convex", flags["convex"]),
                                    ("inverse-concave", flags["inverse_concave"])) if ok]
    flags["route"] = routes[0] if routes else None
    flags["routes"] = routes
    return flags


def condition_suite(F, n, count=1000, seed=0):
    """Worst violations of monotonicity, homogeneity, normalisation and the Euler relation."""
    k = cone_samples(n, count, seed)
    grad = F.grad(k)
    f = F(k)
    homog = max(float(np.max(np.abs(F(lam * k) - lam * f) / (lam * f))) for lam in (0.5, 2, 10))
    euler = float(np.max(np.abs(np.sum(grad * k, axis=1) - f) / f))
    return {"min_grad": float(grad.min()), "homogeneity": homog,
            "normalization": abs(float(F(np.ones(n))) - n), "euler": euler}
