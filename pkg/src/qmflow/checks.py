"""Invariant suites with fixed seeds, shared by the `check` subcommand and the tests."""

from dataclasses import dataclass, replace
import math

import numpy as np

from . import elliptic as ell_mod
from .flow import RunConfig, conservation_drift, evolution_residuals, run
from .integrals import (ball_quermass, hsiung_minkowski_residual, newton_maclaurin_margins,
                        quermassintegrals)
from .presets import make_preset, random_convex
from .spaceform import SpaceForm
from .surface import Profile, curvature


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    margin: float
    detail: str = ""


def _result(suite, name, value, limit, detail=""):
    """Pass when value <= limit; margin = limit - value (negative on failure)."""
    ok = bool(np.isfinite(value) and value <= limit)
    return CheckResult(suite, name, ok, float(limit - value), detail or f"{value:.3e} <= {limit:.0e}")


def _safe(suite, name, fn):
    try:
        return fn()
    except Exception as exc:  # a crash is a failed property, reported not raised
        return [CheckResult(suite, name, False, -math.inf, f"{type(exc).__name__}: {exc}")]


def suite_spaceform(seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for K in (1.0, 0.3, 0.0, -1.0):
        sf = SpaceForm(K, 2)
        hi = 0.999 * sf.radius_limit if K > 0 else 3.0
        r = rng.uniform(1e-3, hi, 1000)
        s, c = sf.s(r), sf.c(r)
        out.append(_result("spaceform", f"pythagoras K={K:g}",
                           float(np.max(np.abs(c * c + K * s * s - 1))), 1e-12))
        h = 1e-5
        r_in = np.clip(r, 2 * h, hi - 2 * h)
        dc = (sf.c(r_in + h) - sf.c(r_in - h)) / (2 * h)
        ds = (sf.s(r_in + h) - sf.s(r_in - h)) / (2 * h)
        scale = np.maximum(np.abs(K * sf.s(r_in)), 1e-300)
        if K != 0:
            out.append(_result("spaceform", f"c' = -K s  K={K:g}",
                               float(np.max(np.abs(dc + K * sf.s(r_in)) / scale)), 1e-6))
        out.append(_result("spaceform", f"s' = c  K={K:g}",
                           float(np.max(np.abs(ds - sf.c(r_in)) / np.abs(sf.c(r_in)).clip(1e-3))),
                           1e-6))
    for K in (1e-4, -1e-4, 1e-8, -1e-8):
        err = abs(float(SpaceForm(K, 2).s(0.7)) - 0.7)
        out.append(_result("spaceform", f"K->0 continuity K={K:g}", err, 10 * abs(K)))
    return out


def suite_integrals(seed=0):
    out = []
    sf = SpaceForm(1.0, 2)
    worst = 0.0
    for i in range(5):
        p = random_convex(sf, 256, seed=seed + i)
        cf = curvature(p)
        worst = max(worst, max(hsiung_minkowski_residual(p, l, cf) for l in range(sf.n)))
    out.append(_result("integrals", "Hsiung-Minkowski (5 profiles, N=256)", worst, 1e-6))
    rng = np.random.default_rng(seed)
    for n in (2, 3, 4):
        k = np.exp(rng.uniform(-3, 3, size=(20000, n)))
        margin = float(np.min(newton_maclaurin_margins(k)))
        out.append(CheckResult("integrals", f"Newton-MacLaurin n={n}", margin >= -1e-12, margin,
                               f"min slack {margin:.3e}"))
    p = Profile.sphere(sf, 0.8, 256)
    rep = quermassintegrals(p)
    err = max(abs(rep.W[l] - ball_quermass(sf, l, 0.8)) / ball_quermass(sf, l, 0.8)
              for l in range(sf.n + 1))
    out.append(_result("integrals", "sphere quermassintegrals vs closed form", err, 1e-8))
    rep = quermassintegrals(random_convex(sf, 256, seed))
    out.append(_result("integrals", "Gauss-Bonnet closure of the top quermassintegral",
                       abs(rep.gauss_bonnet_defect) / rep.W[-1], 1e-6))
    return out


def suite_elliptic(seed=0):
    out = []
    for F in ell_mod.BUILTIN.values():
        for n in (2, 3):
            cond = ell_mod.condition_suite(F, n, 1000, seed)
            out.append(CheckResult("elliptic", f"{F.name} monotone n={n}", cond["min_grad"] > 0,
                                   cond["min_grad"], f"min grad {cond['min_grad']:.3e}"))
            out.append(_result("elliptic", f"{F.name} homogeneous n={n}", cond["homogeneity"], 1e-10))
            out.append(_result("elliptic", f"{F.name} normalized n={n}", cond["normalization"], 1e-12))
            out.append(_result("elliptic", f"{F.name} Euler relation n={n}", cond["euler"], 1e-6))
        k = ell_mod.cone_samples(3, 1000, seed)
        inv = F.inverse().inverse()
        out.append(_result("elliptic", f"{F.name} inverse involution",
                           float(np.max(np.abs(inv(k) - F(k)) / F(k))), 1e-10))
    sf = SpaceForm(1.0, 2)
    R = 0.6
    q = ell_mod.dual_profile(Profile.sphere(sf, R, 128))
    out.append(_result("elliptic", "dual of R-sphere", float(np.max(np.abs(q.rho - (math.pi / 2 - R)))),
                       1e-8))
    p = random_convex(sf, 256, seed)
    chk = ell_mod.duality_check(p)
    out.append(_result("elliptic", "duality kappa~ kappa = 1", chk.product_error, 1e-6))
    out.append(_result("elliptic", "duality c~ = u", chk.support_error, 1e-6))
    gamma = ell_mod.gamma_for_radius(sf, R, 1.0)
    rep = ell_mod.weingarten_solve(ell_mod.MEAN, gamma, 1.0, sf, random_convex(sf, 48, seed, R=R))
    R_root = ell_mod.radius_from_gamma(sf, gamma, 1.0, near=R)
    out.append(_result("elliptic", "rigidity solve lands on centred sphere",
                       max(rep.sphere.residual, abs(rep.sphere.center), abs(rep.sphere.R - R_root)),
                       1e-8))
    return out


def suite_flow_short(seed=0):
    out = []
    sf = SpaceForm(1.0, 2)
    cfg = RunConfig(sf=sf, N=128, t_end=0.05, sample_dt=0.005, shift_policy="off",
                    stop_on_converge=False)
    sph = run(Profile.sphere(sf, 0.8, 128), cfg, log_origin=False)
    out.append(_result("flow-short", "stationary sphere",
                       float(np.max(np.abs(sph.final.profile.rho - 0.8))), 1e-10))
    p0 = make_preset("perturbed-sphere", sf, 128)
    for ell in range(sf.n + 1):
        traj = run(p0, replace(cfg, ell=ell), log_origin=False)
        out.append(_result("flow-short", f"conservation ell={ell}", conservation_drift(traj), 1e-6))
    worst = max(max(evolution_residuals(random_convex(sf, 256, seed + i), 0).values())
                for i in range(2))
    out.append(_result("flow-short", "evolution equations of H and c_K", worst, 1e-3))
    return out


SUITES = {"spaceform": suite_spaceform, "integrals": suite_integrals,
          "elliptic": suite_elliptic, "flow-short": suite_flow_short}


def run_suites(name="all", seed=0):
    names = list(SUITES) if name == "all" else [name]
    results = []
    for s in names:
        results += _safe(s, "suite", lambda s=s: SUITES[s](seed))
    return results


def format_table(results):
    width = max(len(r.name) for r in results) + 2
    lines = [f"{'suite':<11}{'property':<{width}}{'result':<7}margin"]
    for r in results:
        lines.append(f"{r.suite:<11}{r.name:<{width}}{'pass' if r.passed else 'FAIL':<7}"
                     f"{r.margin:.3e}  {r.detail}")
    return "\n".join(lines)
