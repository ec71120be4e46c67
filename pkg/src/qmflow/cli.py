"""Command-line front end: flow, elliptic, check and sweep subcommands.

Exit codes: 0 success, 1 failed invariant (check), 2 usage or config error,
3 convexity lost, 4 stiff blow-up or failed elliptic solve, 5 origin shift
failed, 6 t_end reached without convergence.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
import argparse
import csv
import io
import itertools
import json
import os
import sys

from . import elliptic as ell_mod
from .checks import SUITES, format_table, run_suites
from .config import ConfigError, load_spec
from .diagnostics import CSV_FIELDS, write_csv
from .errors import GeometryError
from .flow import conservation_drift, run
from .presets import PRESET_DEFAULTS, make_preset, random_convex
from .surface import Profile

EXIT = {"converged": 0, "stop-nonconvex": 3, "stiff-blowup": 4, "recenter-failed": 5,
        "needs-recenter": 5, "t-end": 6}
USAGE = 2


def _initial_profile(spec, N=None):
    N = N or spec.flow.N
    if spec.profile_path:
        p = Profile.load(spec.profile_path)
        if p.sf != spec.sf:
            raise ConfigError(f"{spec.profile_path}: profile space form {p.sf} differs from config")
        return p
    return make_preset(spec.preset, spec.sf, N, spec.seed, **spec.preset_params)


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _final_record(traj):
    rec = traj.records[-1].as_dict() if traj.records else {}
    rec.update(status=traj.status, shifts=len(traj.shifts), steps=traj.steps)
    return rec


def _flow_outputs(traj, out, stem="trajectory"):
    os.makedirs(out, exist_ok=True)
    buf = io.StringIO()
    traj.write_ndjson(buf)
    _write(os.path.join(out, f"{stem}.ndjson"), buf.getvalue())
    buf = io.StringIO()
    write_csv(traj.records, buf)
    _write(os.path.join(out, f"{stem}.csv"), buf.getvalue())
    traj.final.profile.save(os.path.join(out, f"{stem}_final_profile.txt"))


def cmd_flow(spec):
    try:
        p0 = _initial_profile(spec)
        traj = run(p0, spec.flow)
    except (GeometryError, OSError) as exc:
        print(f"error: invalid initial data: {exc}", file=sys.stderr)
        return USAGE
    _flow_outputs(traj, spec.out)
    print(json.dumps(_final_record(traj), sort_keys=True))
    if traj.message:
        print(f"{traj.status}: {traj.message}", file=sys.stderr)
    return EXIT[traj.status]


def cmd_elliptic(spec):
    par, sf = spec.elliptic, spec.sf
    F = ell_mod.BUILTIN.get(par["f"])
    if F is None:
        print(f"error: unknown curvature function {par['f']!r}; choose from {sorted(ell_mod.BUILTIN)}",
              file=sys.stderr)
        return USAGE
    os.makedirs(spec.out, exist_ok=True)
    try:
        if par["equation"] == "weingarten":
            alpha = par["alpha"]
            gamma = par.get("gamma") or ell_mod.gamma_for_radius(sf, par["r"], alpha)
            init = random_convex(sf, par["grid"], spec.seed, R=par["r"], amplitude=par["perturb"])
            rep = ell_mod.weingarten_solve(F, gamma, alpha, sf, init)
            rep.flags.update(ell_mod.hypothesis_check(rep.profile, F, {"alpha": alpha}))
            rep.flags["sphere_radius_from_gamma"] = ell_mod.radius_from_gamma(
                sf, gamma, alpha, near=par["r"])
            p = rep.profile
        else:
            p = _initial_profile(spec, par["grid"]) if spec.profile_path else \
                Profile.sphere(sf, par["r"], par["grid"])
            beta = par.get("beta") or ell_mod.soliton_beta_for_sphere(sf, par["r"], F)
            rep = ell_mod.soliton_via_duality(p, F, beta)
            rep.flags.update(ell_mod.hypothesis_check(p, F, {"beta": beta}))
    except (GeometryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    record = rep.as_dict()
    _write(os.path.join(spec.out, "elliptic.ndjson"), json.dumps(record, sort_keys=True) + "\n")
    rep.profile.save(os.path.join(spec.out, "elliptic_profile.txt"))
    print(json.dumps(record, sort_keys=True))
    return 0 if rep.converged else 4


def cmd_check(suite, seed=0):
    results = run_suites(suite, seed)
    print(format_table(results))
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"FAILED {r.suite}: {r.name} (margin {r.margin:.3e}) {r.detail}", file=sys.stderr)
    return 1 if failed else 0


SWEEP_COLUMNS = ("job", "ell", "N", "cfl", "delta", "status", "exit_code", "drift", "steps") \
    + CSV_FIELDS + ("error",)


def _sweep_job(job):
    idx, spec, ell, N, cfl, delta, out = job
    row = {"job": idx, "ell": ell, "N": N, "cfl": cfl, "delta": delta, "error": ""}
    try:
        params = dict(spec.preset_params)
        if delta is not None:
            params["delta"] = delta
        cfg = replace(spec.flow, ell=ell, N=N, cfl=cfl)
        p0 = make_preset(spec.preset, spec.sf, N, spec.seed, **params) if not spec.profile_path \
            else Profile.load(spec.profile_path)
        traj = run(p0, cfg)
        _flow_outputs(traj, out, f"job_{idx:03d}")
        last = traj.records[-1]
        row.update(status=traj.status, exit_code=EXIT[traj.status],
                   drift=conservation_drift(traj), steps=traj.steps,
                   **{f: getattr(last, f) for f in CSV_FIELDS})
    except Exception as exc:  # a failed job is recorded, the sweep continues
        row.update(status="error", exit_code=USAGE, error=f"{type(exc).__name__}: {exc}")
    return row


def cmd_sweep(spec, workers=None):
    grid = spec.sweep
    if not grid or any(len(v) == 0 for v in grid.values()):
        print("error: empty sweep grid", file=sys.stderr)
        return USAGE
    if "delta" in grid and "delta" not in PRESET_DEFAULTS[spec.preset]:
        print(f"error: preset {spec.preset!r} has no delta parameter", file=sys.stderr)
        return USAGE
    axes = [grid.get("ell", [spec.flow.ell]), grid.get("n", [spec.flow.N]),
            grid.get("cfl", [spec.flow.cfl]), grid.get("delta", [None])]
    os.makedirs(spec.out, exist_ok=True)
    jobs = [(i, spec, *combo, spec.out) for i, combo in enumerate(itertools.product(*axes))]
    workers = workers or min(len(jobs), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(j) for j in jobs]
    with open(os.path.join(spec.out, "sweep.csv"), "w", newline="") as fh:
        writer = csv.DictWriter(fh, SWEEP_COLUMNS, lineterminator="\n", restval="")
        writer.writeheader()
        writer.writerows(rows)
    for row in rows:
        print(f"job {row['job']:3d} ell={row['ell']} N={row['N']} cfl={row['cfl']} "
              f"delta={row['delta']} -> {row['status']}")
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI-style run specification")
    common.add_argument("--preset", help="preset name with optional key=value overrides, quoted")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, help="random seed for presets and sampling")
    common.add_argument("--samples", type=int, help="number of recorded samples up to t_end")
    parser = argparse.ArgumentParser(prog="qmflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("flow", parents=[common], help="run the constrained flow")
    sub.add_parser("elliptic", parents=[common], help="solve or check an elliptic equation")
    chk = sub.add_parser("check", parents=[common], help="run invariant suites")
    chk.add_argument("suite", nargs="?", default="all", choices=["all", *SUITES])
    sw = sub.add_parser("sweep", parents=[common], help="run a parameter grid")
    sw.add_argument("--workers", type=int, help="worker processes (default: CPU count)")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    if args.command == "check":
        return cmd_check(args.suite, args.seed or 0)
    try:
        spec = load_spec(args.config, args.preset, args.seed, args.samples, args.out)
        if args.preset is None and args.config is None and args.command == "sweep":
            raise ConfigError("sweep needs --config with a [sweep] section")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    if args.command == "flow":
        return cmd_flow(spec)
    if args.command == "elliptic":
        return cmd_elliptic(spec)
    return cmd_sweep(spec, args.workers)


if __name__ == "__main__":
    sys.exit(main())
