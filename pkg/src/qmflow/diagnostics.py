"""Monitored quantities along a flow: pinching, traceless norm, sphere fit, decay rates."""

from dataclasses import asdict, dataclass
import csv
import math

import numpy as np
from scipy.optimize import least_squares

from .errors import AlreadyConverged, FitFailed, NotMeanConvex
from .surface import curvature, distance_extrema, simpson_weights

CSV_FIELDS = ("t", "omega", "tracelessSup", "mu", "W_ell", "sphereFitRadius",
              "sphereFitResidual", "maxRho", "minU", "minSec")
NDJSON_FIELDS = ("t", "mu", "W_ell", "omega", "minKappa", "maxKappa", "maxRho", "minU",
                 "tracelessSup", "sphereFitRadius", "sphereFitResidual", "event")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    omega: float
    tracelessSup: float
    minKappa: float
    maxKappa: float
    minU: float
    maxRho: float
    sphereFitRadius: float
    sphereFitCenter: float
    sphereFitResidual: float
    mu: float
    W_ell: float
    minSec: float
    originDist: float
    event: str = None

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SphereFit:
    R: float
    center: float
    residual: float


@dataclass(frozen=True)
class DecayFit:
    rate: float
    envelope: float
    samples: int


def pinching_deficit(cf):
    """1/n - min(kappa_1 / H)."""
    if np.any(cf.H <= 0):
        raise NotMeanConvex("pinching deficit needs H > 0", min_H=float(cf.H.min()))
    return max(1.0 / cf.n - float(np.min(cf.kappa_min / cf.H)), 0.0)


def traceless_sup(cf):
    return float(np.max(cf.traceless2))


def min_sectional(cf):
    """Gauss equation from the sorted curvature tuples: smallest pair product plus K."""
    k = np.sort(cf.kappas(), axis=1)
    return float(np.min(k[:, 0] * k[:, 1]) + cf.K)


def sphere_graph(K, R, c, phi):
    """Radial function about the origin of the geodesic sphere of radius R centred at axial offset c."""
    cos = np.cos(phi)
    if K == 0:
        return c * cos + np.sqrt(R * R - (c * np.sin(phi)) ** 2)
    if K > 0:
        q = math.sqrt(K)
        A, B = math.cos(q * c), math.sin(q * c) * cos
        return (np.arctan2(B, A) + np.arccos(np.clip(math.cos(q * R) / np.hypot(A, B), -1, 1))) / q
    q = math.sqrt(-K)
    A, B = math.cosh(q * c), math.sinh(q * c) * cos
    m = np.sqrt(A * A - B * B)
    return (np.arctanh(B / A) + np.arccosh(np.maximum(math.cosh(q * R) / m, 1.0))) / q


def sphere_fit(p, max_iter=100):
    """Least-squares geodesic sphere (radius, axial centre) in L2(sin^{n-1} dphi)."""
    phi, K = p.phi, p.sf.K
    w = simpson_weights(p.N, p.h) * np.sin(phi) ** (p.sf.n - 1)
    w = np.sqrt(w / w.sum())

    def resid(x):
        return w * (p.rho - sphere_graph(K, x[0], x[1], phi))

    x0 = np.array([float(np.sum(w * w * p.rho)), 0.0])
    sol = least_squares(resid, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=max_iter * 3)
    if sol.status <= 0 or not np.all(np.isfinite(sol.x)):
        raise FitFailed(f"sphere fit did not converge: {sol.message}")
    return SphereFit(R=float(sol.x[0]), center=float(sol.x[1]),
                     residual=float(np.sqrt(np.sum(sol.fun ** 2))))


def fit_rate(t, y, bound_rate):
    """Log-linear slope over the last half and the envelope max y(t) e^{bound (t-t0)} / y(t0)."""
    t, y = np.asarray(t, dtype=float), np.asarray(y, dtype=float)
    if t.size < 10:
        raise ValueError("decay fit needs at least 10 samples")
    if np.any(y <= 0):
        raise AlreadyConverged("non-positive samples; decay fit skipped")
    half = t.size // 2
    rate = float(np.polyfit(t[half:], np.log(y[half:]), 1)[0])
    env = float(np.max(y * np.exp(bound_rate * (t - t[0])) / y[0]))
    return DecayFit(rate=rate, envelope=env, samples=int(t.size))


def decay_fit(traj, field="omega"):
    """Decay of omega (bound 2nK) or tracelessSup (bound 4nK) along a trajectory."""
    K, n = traj.sf.K, traj.sf.n
    bound = {"omega": 2 * n * K, "tracelessSup": 4 * n * K}[field]
    t = [r.t for r in traj.records]
    y = [getattr(r, field) for r in traj.records]
    return fit_rate(t, y, bound)


def diagnose(p, t=0.0, mu=float("nan"), W_ell=float("nan"), event=None, cf=None):
    cf = cf or curvature(p)
    fit = sphere_fit(p)
    return DiagnosticsRecord(
        t=float(t), omega=pinching_deficit(cf), tracelessSup=traceless_sup(cf),
        minKappa=float(cf.kappa_min.min()), maxKappa=float(cf.kappa_max.max()),
        minU=float(cf.u.min()), maxRho=float(p.rho.max()), sphereFitRadius=fit.R,
        sphereFitCenter=fit.center, sphereFitResidual=fit.residual, mu=float(mu),
        W_ell=float(W_ell), minSec=min_sectional(cf), originDist=float(distance_extrema(p)[0]),
        event=event)


def write_csv(records, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow([repr(float(getattr(r, f))) for f in CSV_FIELDS])
