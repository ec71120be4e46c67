"""Acceptance criteria at desk scale: K = 1, n = 2, axisymmetric, N = 256 unless stated."""

from dataclasses import replace
import json
import math

import numpy as np
import pytest

from qmflow import cli
from qmflow import elliptic as E
from qmflow.diagnostics import decay_fit, pinching_deficit
from qmflow.flow import RunConfig, conservation_drift, evolution_residuals, run, step, initial_state
from qmflow.integrals import ball_quermass, hsiung_minkowski_residual, newton_maclaurin_margins
from qmflow.origin import outradius_bound, radii
from qmflow.presets import make_preset, random_convex
from qmflow.spaceform import SpaceForm
from qmflow.surface import Profile, curvature

SF = SpaceForm(1.0, 2)
ELLS = (0, 1, 2)
BASE = RunConfig(sf=SF, N=256, t_end=1.0, sample_dt=0.02, shift_policy="event",
                 stop_on_converge=False)


@pytest.fixture(scope="session")
def runs_off():
    """Perturbed sphere delta = 0.05 over t in [0, 1], feedback off, one run per ell."""
    p0 = make_preset("perturbed-sphere", SF, 256)
    return {ell: run(p0, replace(BASE, ell=ell), keep_profiles=True) for ell in ELLS}


@pytest.fixture(scope="session")
def runs_converged():
    """Same data with feedback on, run until omega < 1e-6."""
    p0 = make_preset("perturbed-sphere", SF, 256)
    cfg = replace(BASE, t_end=4.0, feedback=True, stop_on_converge=True, sample_dt=0.05)
    return {ell: run(p0, replace(cfg, ell=ell), keep_profiles=True) for ell in ELLS}


@pytest.fixture(scope="session")
def off_center(tmp_path_factory):
    out = tmp_path_factory.mktemp("off_center")
    code = cli.main(["flow", "--preset", "off-center t_end=4 feedback=true", "--out", str(out),
                     "--samples", "200"])
    lines = [json.loads(x) for x in (out / "trajectory.ndjson").read_text().splitlines()]
    profile = Profile.load(str(out / "trajectory_final_profile.txt"))
    return code, lines, profile


# 1 ------------------------------------------------------------------------

@pytest.mark.criterion(1, "stationary sphere: 1e4 steps keep rho fixed and omega = 0")
def test_criterion_01_stationary_sphere(detail):
    cfg = RunConfig(sf=SF, ell=0, N=256, shift_policy="off")
    state = initial_state(Profile.sphere(SF, 0.8, 256), cfg)
    worst_omega = 0.0
    for k in range(10_000):
        state = step(state, cfg)
        if k % 1000 == 0:
            worst_omega = max(worst_omega, pinching_deficit(curvature(state.profile)))
    drift = float(np.max(np.abs(state.profile.rho - 0.8)))
    detail(f"max|drho|={drift:.1e}, max omega={worst_omega:.1e}")
    assert drift < 1e-10
    # the two discrete principal curvatures agree to roundoff on a sphere
    assert worst_omega < 1e-12


# 2 ------------------------------------------------------------------------

@pytest.mark.criterion(2, "conservation of W_ell: drift, refinement order, feedback")
def test_criterion_02_conservation_feedback_off(runs_off, detail):
    drifts = {ell: conservation_drift(runs_off[ell]) for ell in ELLS}
    detail("off: " + ", ".join(f"l{ell}={d:.1e}" for ell, d in drifts.items()))
    assert all(d < 1e-6 for d in drifts.values())


@pytest.mark.criterion(2, "conservation of W_ell: drift, refinement order, feedback")
def test_criterion_02_drift_order(detail):
    # short horizon keeps the N = 512 runs within budget; the drift is linear in t
    orders = {}
    for ell in ELLS:
        drifts = []
        for N in (128, 256, 512):
            cfg = replace(BASE, ell=ell, N=N, t_end=0.1, sample_dt=0.02, shift_policy="off")
            drifts.append(conservation_drift(run(make_preset("perturbed-sphere", SF, N), cfg,
                                                 log_origin=False)))
        if max(drifts) < 1e-12:
            # exact up to roundoff: no order to measure
            orders[ell] = math.inf
        else:
            orders[ell] = min(math.log2(drifts[0] / drifts[1]), math.log2(drifts[1] / drifts[2]))
    detail("order: " + ", ".join(f"l{ell}={o:.2f}" for ell, o in orders.items()))
    assert all(o >= 2 for o in orders.values())


@pytest.mark.criterion(2, "conservation of W_ell: drift, refinement order, feedback")
def test_criterion_02_conservation_feedback_on(detail):
    p0 = make_preset("perturbed-sphere", SF, 256)
    drifts = {}
    for ell in ELLS:
        cfg = replace(BASE, ell=ell, feedback=True, shift_policy="off", sample_dt=0.05)
        drifts[ell] = conservation_drift(run(p0, cfg, log_origin=False))
    detail("on: " + ", ".join(f"l{ell}={d:.1e}" for ell, d in drifts.items()))
    assert all(d < 1e-10 for d in drifts.values())


# 3 ------------------------------------------------------------------------

@pytest.mark.criterion(3, "pinching envelope omega(t) e^{4t} / omega(0) <= 1 + 1e-3")
def test_criterion_03_pinching_envelope(runs_off, detail):
    env = {ell: decay_fit(runs_off[ell], "omega").envelope for ell in ELLS}
    detail(", ".join(f"l{ell}={e:.4f}" for ell, e in env.items()))
    assert all(e <= 1 + 1e-3 for e in env.values())


# 4 ------------------------------------------------------------------------

@pytest.mark.criterion(4, "traceless decay: fitted rate of log max|A0|^2 <= -7.2")
def test_criterion_04_traceless_rate(runs_off, detail):
    rates = {ell: decay_fit(runs_off[ell], "tracelessSup").rate for ell in ELLS}
    detail(", ".join(f"l{ell}={r:.2f}" for ell, r in rates.items()))
    assert all(r <= -4 * SF.n * SF.K * 0.9 for r in rates.values())


# 5 ------------------------------------------------------------------------

@pytest.mark.criterion(5, "limit radius: f_ell(R_inf) = W_ell(Omega_0) and sphere-fit residual")
def test_criterion_05_limit_radius(runs_converged, detail):
    parts = []
    for ell, traj in runs_converged.items():
        assert traj.status == "converged"
        last = traj.records[-1]
        assert last.omega < 1e-6
        W0 = traj.final.W_target
        rel = abs(ball_quermass(SF, ell, last.sphereFitRadius) - W0) / W0
        parts.append(f"l{ell}: rel={rel:.1e} res={last.sphereFitResidual:.1e} t={last.t:.2f}")
        assert rel < 1e-4
        assert last.sphereFitResidual < 1e-6
    detail(", ".join(parts))


# 6 ------------------------------------------------------------------------

@pytest.mark.criterion(6, "Hsiung-Minkowski residual < 1e-6 at N=512, order >= 3.5")
def test_criterion_06_minkowski(detail):
    worst = 0.0
    for seed in range(20):
        p = random_convex(SF, 512, seed=seed)
        cf = curvature(p)
        worst = max(worst, max(hsiung_minkowski_residual(p, ell, cf) for ell in range(SF.n)))
    orders = []
    for seed in range(3):
        res = [max(hsiung_minkowski_residual(random_convex(SF, N, seed=seed), ell)
                   for ell in range(SF.n)) for N in (64, 128, 256)]
        orders.append(min(math.log2(res[0] / res[1]), math.log2(res[1] / res[2])))
    detail(f"worst={worst:.1e}, min order={min(orders):.2f}")
    assert worst < 1e-6
    assert min(orders) >= 3.5


# 7 ------------------------------------------------------------------------

@pytest.mark.criterion(7, "Newton-MacLaurin: no violation below -1e-12 on 1e5 tuples, n=2,3,4")
def test_criterion_07_newton_maclaurin(detail):
    rng = np.random.default_rng(7)
    parts = []
    for n in (2, 3, 4):
        k = np.exp(rng.uniform(-4, 4, size=(100_000, n)))
        margins = newton_maclaurin_margins(k)
        violations = int(np.sum(margins < -1e-12))
        parts.append(f"n={n}: {violations} violations, min slack {margins.min():.1e}")
        assert violations == 0
    detail("; ".join(parts))


# 8 ------------------------------------------------------------------------

@pytest.mark.criterion(8, "mu(t) <= 2 n C0^(ell+1) / eps1 with constants logged at t=0")
def test_criterion_08_mu_bound(runs_off, runs_converged, detail):
    parts = []
    for name, group in (("off", runs_off), ("conv", runs_converged)):
        for ell, traj in group.items():
            bound = traj.origin0.mu_bound
            mu_max = max(r.mu for r in traj.records)
            assert mu_max <= bound
            parts.append(f"{name} l{ell}: max mu={mu_max:.2f} bound={bound:.1e}")
    detail(parts[0] + " ...")


# 9 ------------------------------------------------------------------------

@pytest.mark.criterion(9, "outradius <= pi/2 - d2 / max H + 1e-6 on acceptance profiles")
def test_criterion_09_outradius(runs_off, detail):
    worst = -math.inf
    count = 0
    for ell, traj in runs_off.items():
        for p in traj.profiles[::5] + [traj.profiles[-1]]:
            bound = outradius_bound(p, ell, check=False)
            worst = max(worst, radii(p).outradius - bound)
            count += 1
    detail(f"{count} profiles, max(outradius - bound)={worst:.3f}")
    assert worst <= 1e-6


# 10 -----------------------------------------------------------------------

@pytest.mark.criterion(10, "origin shifts: off-centre data converges with event-driven shifts")
def test_criterion_10_origin_shifts(off_center, detail):
    code, lines, _ = off_center
    records = [r for r in lines if "omega" in r]
    final = lines[-1]
    shifts = [r for r in records if r["event"] == "shift"]
    assert code == 0 and final["status"] == "converged"
    assert len(shifts) >= 1
    t_final = min((r["t"] for r in records if r["omega"] < 1e-3), default=math.inf)
    late = [r for r in shifts if r["t"] > t_final]
    slack = min(r["minU"] - math.sin(r["originDist"]) for r in records)
    detail(f"{len(shifts)} shift(s) at t={[round(r['t'], 3) for r in shifts]}, "
           f"final phase from t={t_final:.2f}, min(u - s(dist))={slack:.1e}")
    assert not late
    assert slack >= -1e-6


# 11 -----------------------------------------------------------------------

@pytest.mark.criterion(11, "elliptic rigidity: Newton solves land on the centred sphere")
def test_criterion_11_rigidity(detail):
    R0, worst = 0.6, 0.0
    count = 0
    for F in (E.MEAN, E.NORM):
        for alpha in (1.0, -1.0, 2.0):
            gamma = E.gamma_for_radius(SF, R0, alpha)
            R_root = E.radius_from_gamma(SF, gamma, alpha, near=R0)
            for seed in range(5):
                init = random_convex(SF, 64, seed=100 + seed, R=R0, amplitude=0.05)
                rep = E.weingarten_solve(F, gamma, alpha, SF, init)
                assert rep.converged
                err = max(rep.sphere.residual, abs(rep.sphere.center), abs(rep.sphere.R - R_root))
                worst = max(worst, err)
                count += 1
    detail(f"{count} solves, worst fit/centre/radius error={worst:.1e}")
    assert worst < 1e-8


# 12 -----------------------------------------------------------------------

@pytest.mark.criterion(12, "Gauss-map duality on random convex profiles at N=512")
def test_criterion_12_duality(detail):
    prod = supp = invol = 0.0
    for seed in range(10):
        p = random_convex(SF, 512, seed=200 + seed)
        q = E.dual_profile(p)
        chk = E.duality_check(p, q)
        prod, supp = max(prod, chk.product_error), max(supp, chk.support_error)
        invol = max(invol, float(np.max(np.abs(E.dual_profile(q).rho - p.rho))))
    R = 0.6
    sphere_err = float(np.max(np.abs(E.dual_profile(Profile.sphere(SF, R, 512)).rho
                                     - (math.pi / 2 - R))))
    detail(f"kk~-1={prod:.1e}, c~-u={supp:.1e}, dual^2-id={invol:.1e}, sphere={sphere_err:.1e}")
    assert prod < 1e-6 and supp < 1e-6 and invol < 1e-6
    assert sphere_err < 1e-8


# 13 -----------------------------------------------------------------------

@pytest.mark.criterion(13, "evolution equations of H and c_K at t=0, N=512")
def test_criterion_13_evolution_equations(detail):
    worst = {"H": 0.0, "cK": 0.0}
    for seed in range(5):
        p = random_convex(SF, 512, seed=300 + seed)
        for ell in ELLS:
            res = evolution_residuals(p, ell)
            worst = {k: max(worst[k], res[k]) for k in worst}
    detail(f"H: {worst['H']:.1e}, c_K: {worst['cK']:.1e}")
    assert max(worst.values()) < 1e-3
