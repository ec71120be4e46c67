"""Quermassintegral-preserving curvature flow for radial graphs.

The graph function evolves by d rho/dt = (mu c_K(rho) - H) v, with the global
term mu = int H sigma_ell dV / int c_K sigma_ell dV recomputed at every RK4
stage.  The inner stepping loop is compiled (see ``_kernels``); the driver
here handles sampling, origin shifts and terminal events.
"""

from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
import json
import math

import numpy as np

from . import _kernels as kern
from .diagnostics import NDJSON_FIELDS, diagnose, pinching_deficit
from .errors import (EquatorCrossing, GeometryError, NeedsRecenter, NotConvex,
                     InvalidProfile, StiffBlowup, StopNonconvex)
from .integrals import GL_NODES, _gauss_legendre, quermass
from .origin import choose_origin, origin_report, shift_decision
from .spaceform import SpaceForm, sphere_area
from .surface import (CosineSeries, Profile, curvature, derivatives, laplacian, recenter,
                      simpson_weights)

SHIFT_POLICIES = ("off", "interval", "event")
MAX_CHUNK_STEPS = 50_000_000


@dataclass(frozen=True)
class RunConfig:
    sf: SpaceForm
    ell: int = 0
    N: int = 256
    cfl: float = 0.25
    t_end: float = 2.0
    feedback: bool = False
    gain: float = 1.0
    shift_policy: str = "event"
    tau0: float = 0.5
    sample_dt: float = 0.01
    conservation_tol: float = 1e-6
    convexity_margin: float = 0.0
    converge_omega: float = 1e-6
    converge_traceless: float = 1e-10
    stop_on_converge: bool = True
    final_omega: float = 1e-3
    u_floor_ratio: float = 0.95
    max_shifts: int = 20

    def __post_init__(self):
        if not 0 <= self.ell <= self.sf.n:
            raise ValueError(f"ell must lie in 0..{self.sf.n}")
        if not 0 < self.cfl <= 0.5:
            raise ValueError("cfl must lie in (0, 0.5]")
        if self.gain < 0:
            raise ValueError("feedback gain must be >= 0")
        if self.shift_policy not in SHIFT_POLICIES:
            raise ValueError(f"shift_policy must be one of {SHIFT_POLICIES}")
        if self.N < 32 or self.N % 2:
            raise ValueError("N must be even and >= 32")
        if not (self.t_end > 0 and self.sample_dt > 0):
            raise ValueError("t_end and sample_dt must be positive")

    def as_dict(self):
        d = asdict(self)
        d["sf"] = {"K": self.sf.K, "n": self.sf.n}
        return d


@dataclass(frozen=True)
class FlowState:
    profile: Profile
    t: float
    ell: int
    W_target: float
    origin_log: tuple = ()
    mu_last: float = float("nan")
    origin: float = 0.0
    final_reached: bool = False


@dataclass
class Trajectory:
    config: RunConfig
    records: list = field(default_factory=list)
    shifts: list = field(default_factory=list)
    status: str = "running"
    final: FlowState = None
    origin0: object = None
    profiles: list = None
    steps: int = 0
    message: str = ""

    @property
    def sf(self):
        return self.config.sf

    def header(self):
        out = {"type": "header", "config": self.config.as_dict(),
               "W_target": self.final.W_target if self.final else None}
        if self.origin0 is not None:
            out["origin"] = self.origin0.as_dict()
        return out

    def ndjson_lines(self):
        yield json.dumps(self.header(), sort_keys=True)
        shift_at = {round(t, 15): rep for t, _, rep in self.shifts}
        for r in self.records:
            rec = {k: getattr(r, k) for k in NDJSON_FIELDS}
            rec["originDist"] = r.originDist
            if self.config.feedback:
                rec["feedback"] = True
            if r.event == "shift" and round(r.t, 15) in shift_at and shift_at[round(r.t, 15)]:
                rec["origin"] = shift_at[round(r.t, 15)]
            yield json.dumps(rec)
        yield json.dumps({"type": "final", "status": self.status, "steps": self.steps,
                          "t": self.final.t if self.final else None, "message": self.message})

    def write_ndjson(self, fh):
        for line in self.ndjson_lines():
            fh.write(line + "\n")


@lru_cache(maxsize=32)
def _grid(N, n):
    phi = np.linspace(0.0, math.pi, N + 1)
    sin = np.sin(phi)
    sin[-1] = 0.0
    wq = simpson_weights(N, math.pi / N) * np.abs(sin) ** (n - 1)
    for a in (phi, sin, wq):
        a.setflags(write=False)
    return np.cos(phi), sin, wq


def _kernel_args(sf, N, ell):
    cosphi, sinphi, wq = _grid(N, sf.n)
    return sf.K, sf.n, math.pi / N, cosphi, sinphi, wq, ell


def global_term(cf, ell):
    """mu = int H sigma_ell dV / int c_K sigma_ell dV."""
    den = cf.integrate(cf.cK * cf.sigma[ell])
    if not den > 0:
        raise EquatorCrossing("int c_K sigma_ell <= 0; the origin must be shifted", den=den)
    return cf.integrate(cf.H * cf.sigma[ell]) / den


def graph_speed(p, ell, mu=None, cf=None):
    """(mu c_K - H) v from the numpy curvature path."""
    cf = cf or curvature(p)
    mu = global_term(cf, ell) if mu is None else mu
    return (mu * cf.cK - cf.H) * cf.v


def resample(p, N):
    if N == p.N:
        return p
    return Profile(p.sf, CosineSeries(p.rho)(np.linspace(0.0, math.pi, N + 1)))


def _rho_cap(sf):
    return sf.hemisphere_radius if sf.K > 0 else math.inf


_STATUS = {kern.NONCONVEX: "stop-nonconvex", kern.EQUATOR: "needs-recenter",
           kern.HEMISPHERE: "needs-recenter", kern.CORRUPT: "stiff-blowup",
           kern.STIFF: "stiff-blowup"}
_EVENTS = {"stop-nonconvex": StopNonconvex, "needs-recenter": NeedsRecenter,
           "stiff-blowup": StiffBlowup}


def _advance(rho, t, t_stop, max_steps, cfg, W_target):
    sf = cfg.sf
    gl_x, gl_w = _gauss_legendre(GL_NODES)
    gain = cfg.gain if cfg.feedback else 0.0
    return kern.advance(rho, t, t_stop, max_steps, cfg.cfl, *_kernel_args(sf, rho.size - 1, cfg.ell),
                        gain, W_target, sphere_area(sf.n - 1), sphere_area(sf.n), gl_x, gl_w,
                        _rho_cap(sf))


def initial_state(p0, cfg):
    p = resample(p0, cfg.N)
    cf = curvature(p)
    if cf.kappa_min.min() <= cfg.convexity_margin:
        raise NotConvex("initial hypersurface is not strictly convex",
                        min_kappa=float(cf.kappa_min.min()))
    if p.sf.K > 0 and p.rho.max() >= p.sf.hemisphere_radius:
        raise InvalidProfile("initial hypersurface leaves the hemisphere about the origin")
    return FlowState(profile=p, t=0.0, ell=cfg.ell, W_target=quermass(p, cfg.ell, cf),
                     mu_last=global_term(cf, cfg.ell))


def step(state, cfg):
    """One RK4 step; raises a FlowEvent on convexity loss, equator crossing or blow-up."""
    rho = np.array(state.profile.rho)
    t, steps, status, mu = _advance(rho, state.t, math.inf, 1, cfg, state.W_target)
    if status != kern.OK:
        code = _STATUS[status]
        raise _EVENTS[code](code, t=t)
    return replace(state, profile=state.profile.with_rho(rho), t=t, mu_last=mu)


def _sample(state, cfg, event=None, traj=None):
    p = state.profile
    cf = curvature(p)
    mu = global_term(cf, cfg.ell)
    rec = diagnose(p, t=state.t, mu=mu, W_ell=quermass(p, cfg.ell, cf), event=event, cf=cf)
    if traj is not None:
        traj.records.append(rec)
        if traj.profiles is not None:
            traj.profiles.append(p)
    return rec, cf


def run(p0, cfg, log_origin=True, keep_profiles=False):
    """Integrate to t_end or a terminal event; returns the Trajectory."""
    state = initial_state(p0, cfg)
    traj = Trajectory(config=cfg)
    if keep_profiles:
        traj.profiles = []
    if log_origin and cfg.sf.K > 0:
        traj.origin0 = origin_report(state.profile, cfg.ell, state.W_target)
    rec, cf = _sample(state, cfg, event="start", traj=traj)
    n_samples = max(1, int(round(cfg.t_end / cfg.sample_dt)))
    k = 0
    while True:
        # origin policy at sample times
        if rec.omega < cfg.final_omega and not state.final_reached:
            state = replace(state, final_reached=True)
        try:
            shift = shift_decision(state, cfg, cf, rec.omega)
        except GeometryError as exc:
            traj.status, traj.message = "recenter-failed", str(exc)
            break
        if shift is not None:
            if len(traj.shifts) >= cfg.max_shifts:
                traj.status, traj.message = "recenter-failed", "shift budget exhausted"
                break
            state, rec, cf, err = _apply_shift(state, cfg, shift, traj)
            if err:
                traj.status, traj.message = "recenter-failed", err
                break
        if cfg.stop_on_converge and rec.omega < cfg.converge_omega and \
                rec.tracelessSup < cfg.converge_traceless:
            traj.status = "converged"
            break
        if k >= n_samples:
            traj.status = "t-end"
            break
        t_stop = min(cfg.t_end, (k + 1) * cfg.sample_dt)
        rho = np.array(state.profile.rho)
        t, steps, status, mu = _advance(rho, state.t, t_stop, MAX_CHUNK_STEPS, cfg, state.W_target)
        traj.steps += steps
        state = replace(state, profile=state.profile.with_rho(rho), t=t, mu_last=mu)
        if status == kern.OK:
            k += 1
            rec, cf = _sample(state, cfg, traj=traj)
            continue
        code = _STATUS[status]
        if code == "needs-recenter" and cfg.shift_policy != "off" \
                and len(traj.shifts) < cfg.max_shifts:
            try:
                shift, _ = choose_origin(state.profile, cfg.ell)
            except GeometryError as exc:
                traj.status, traj.message = "recenter-failed", str(exc)
                break
            if shift:
                state, rec, cf, err = _apply_shift(state, cfg, shift, traj)
                if not err:
                    continue
                traj.message = err
        traj.status = code
        rec, cf = _sample(state, cfg, event=code, traj=traj)
        break
    traj.final = state
    return traj


def _apply_shift(state, cfg, shift, traj):
    try:
        p = recenter(state.profile, shift)
    except GeometryError as exc:
        return state, None, None, str(exc)
    rep = None
    if cfg.sf.K > 0:
        try:
            rep = origin_report(p, cfg.ell, state.W_target).as_dict()
        except (GeometryError, ValueError):
            rep = None
    log = state.origin_log + ((state.t, shift),)
    state = replace(state, profile=p, origin_log=log, origin=state.origin + shift)
    traj.shifts.append((state.t, shift, rep))
    rec, cf = _sample(state, cfg, event="shift", traj=traj)
    return state, rec, cf, None


def conservation_drift(traj):
    """max_t |W_ell(t) - W_ell(0)| / W_ell(0) over the recorded samples."""
    W = np.array([r.W_ell for r in traj.records])
    return float(np.max(np.abs(W - W[0])) / abs(W[0]))


def evolution_residuals(p, ell, delta=1e-6):
    """Relative mismatch between finite-difference time derivatives of H and c_K and
    their evolution equations, at t = 0 along the normal parametrisation.

    The graph flow moves points radially; the tangential part of that motion
    contributes d rho/dt * rho' f' / (s^2 v^2) and is removed before comparing.
    """
    cf = curvature(p)
    mu = global_term(cf, ell)
    speed = (mu * cf.cK - cf.H) * cf.v
    plus = curvature(p.with_rho(p.rho + delta * speed))
    minus = curvature(p.with_rho(p.rho - delta * speed))
    tangential = speed * cf.drho / (cf.sK ** 2 * cf.v ** 2)
    K, n = p.sf.K, p.sf.n
    out = {}
    for name, fp, fm, f, rhs in (
            ("H", plus.H, minus.H, cf.H,
             laplacian(cf, cf.H) + cf.H * (cf.A2 + K * n) - mu * (cf.cK * cf.A2 + cf.u * K * cf.H)),
            ("cK", plus.cK, minus.cK, cf.cK,
             laplacian(cf, cf.cK) + K * cf.cK * (n - mu * cf.u))):
        dfdphi = derivatives(f, p.h)[0]
        lhs = (fp - fm) / (2 * delta) - tangential * dfdphi
        scale = float(np.max(np.abs(rhs)))
        # c_K is constant when K = 0; report the absolute error there
        out[name] = float(np.max(np.abs(lhs - rhs))) / (scale if scale > 0 else 1.0)
    return out
