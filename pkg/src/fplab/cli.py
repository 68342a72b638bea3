"""Command-line entry point.

Exit codes: 0 success, 1 validation or usage failure, 2 solver failure,
3 I/O failure. All outputs are deterministic functions of (config, flags,
seed); worker counts change wall time only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import io
from .analytic_ou import OUOracle, ou_delta_order, ou_exact_density
from .approx import assemble, error_report, scaling_study
from .errors import SolverError, ValidationError
from .evolution import SchemeConfig, Trajectory, solve_fpe, solve_kappa
from .grid import Field, Grid1D, integrate, norms
from .hjb import bulk_window, hjb_residual, to_hj_potential
from .montecarlo import MCConfig, StationaryStart, empirical_density, simulate
from .problem import ProblemSpec, load_problem, validate
from .stationary import stationary_density

DEFAULTS = {
    "grid_n": 513,
    "dt": 1e-3,
    "theta": 0.5,
    "advection": "central",
    "snapshot_stride": 100,
    "seed": 42,
    "workers": 1,
    "paths": 10000,
    "time_window": [0.0, 20.0],
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _epsilon_list(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty epsilon list")
    return values


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="problem configuration JSON")
    common.add_argument("--grid-n", type=int, default=DEFAULTS["grid_n"],
                        help="number of grid nodes (default %(default)s)")
    common.add_argument("--dt", type=float, default=DEFAULTS["dt"],
                        help="time step (default %(default)s)")
    common.add_argument("--theta", type=float, default=DEFAULTS["theta"],
                        help="time weighting in [0.5, 1] (default %(default)s)")
    common.add_argument("--advection", choices=("central", "upwind"),
                        default=DEFAULTS["advection"])
    common.add_argument("--stride", type=int, default=DEFAULTS["snapshot_stride"],
                        help="snapshot stride in steps (default %(default)s)")
    common.add_argument("--seed", type=int, default=DEFAULTS["seed"],
                        help="random seed where meaningful (default %(default)s)")
    common.add_argument("--workers", type=int, default=DEFAULTS["workers"],
                        help="worker threads for independent solves/batches")
    common.add_argument("--out", help="primary output path")
    common.add_argument("--gnuplot", action="store_true",
                        help="also write a ready-to-run gnuplot script next to --out")

    p = _Parser(prog="fplab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", parents=[common],
                        help="check the standing assumptions of a configuration")
    sp.add_argument("--show-defaults", action="store_true")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("stationary", parents=[common],
                        help="emit the stationary density")
    sp.add_argument("--raw", action="store_true",
                    help="constant 1 against the shifted potential instead of unit mass")
    sp.set_defaults(func=cmd_stationary)

    sp = sub.add_parser("evolve", parents=[common],
                        help="advance the density over the configured window")
    sp.add_argument("--t0", type=float, help="override window start")
    sp.add_argument("--t1", type=float, help="override window end")
    sp.add_argument("--snapshot-dir", help="also write one field CSV per snapshot")
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("kappa", parents=[common],
                        help="advance the first-order correction over the window")
    sp.add_argument("--t0", type=float, help="override window start")
    sp.add_argument("--t1", type=float, help="override window end")
    sp.add_argument("--snapshot-dir", help="also write one field CSV per snapshot")
    sp.set_defaults(func=cmd_kappa)

    sp = sub.add_parser("approx", parents=[common],
                        help="assemble the corrected density and report errors")
    sp.add_argument("--t-eval", type=float, help="evaluation time (default window end)")
    sp.add_argument("--q-out", help="write the difference field as CSV")
    sp.set_defaults(func=cmd_approx)

    sp = sub.add_parser("scaling", parents=[common],
                        help="epsilon ladder study with fitted slopes")
    sp.add_argument("--epsilons", type=_epsilon_list, required=True,
                    help="comma-separated list, e.g. 0.2,0.1,0.05,0.025")
    sp.add_argument("--t-eval", type=float, help="evaluation time (default window end)")
    sp.set_defaults(func=cmd_scaling)

    sp = sub.add_parser("mc", parents=[common],
                        help="Monte Carlo paths and density cross-validation")
    sp.add_argument("--paths", type=int, default=DEFAULTS["paths"])
    sp.add_argument("--t1", type=float, help="end time (default window end)")
    sp.add_argument("--summary", help="summary JSON path (default: out with .json)")
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("oracle", parents=[common],
                        help="closed-form forced Ornstein-Uhlenbeck reference")
    sp.add_argument("--t", type=float, help="emission time (default window end)")
    sp.add_argument("--epsilons", type=_epsilon_list,
                    help="run the error-order study instead of emitting a density")
    sp.add_argument("--t-eval", type=float, default=20.0)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("hjb", parents=[common],
                        help="effective-potential transform and residual")
    sp.add_argument("--stationary", action="store_true",
                    help="diagnose the autonomous stationary density "
                         "(forcing off) instead of running a solve")
    sp.add_argument("--report", help="residual JSON path (default: out with .json)")
    sp.set_defaults(func=cmd_hjb)
    return p


# --------------------------------------------------------------------------
# shared helpers
# --------------------------------------------------------------------------

def _load(args) -> ProblemSpec:
    if not args.config:
        raise ValueError("--config is required for this command")
    return load_problem(args.config)


def _grid(args, spec: ProblemSpec) -> Grid1D:
    return Grid1D(spec.domain[0], spec.domain[1], args.grid_n)


def _scheme(args) -> SchemeConfig:
    return SchemeConfig(dt=args.dt, theta=args.theta, advection=args.advection,
                        snapshot_stride=args.stride)


def _require_out(args) -> str:
    if not args.out:
        raise ValueError("--out is required for this command")
    return args.out


def _sidecar(path: str, suffix: str = ".json") -> str:
    root, _ = os.path.splitext(path)
    return root + suffix


def _require_ok(spec: ProblemSpec) -> None:
    report = validate(spec)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))


def _window(args, spec: ProblemSpec, lo_attr="t0", hi_attr="t1") -> tuple[float, float]:
    t0 = getattr(args, lo_attr, None)
    t1 = getattr(args, hi_attr, None)
    t0 = spec.time_window[0] if t0 is None else t0
    t1 = spec.time_window[1] if t1 is None else t1
    return t0, t1


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_validate(args) -> int:
    if args.show_defaults:
        print(json.dumps(DEFAULTS, indent=2, sort_keys=True))
        if not args.config:
            return 0
    spec = _load(args)
    report = validate(spec)
    print(report)
    return 0 if report.ok else 1


def cmd_stationary(args) -> int:
    spec = _load(args)
    _require_ok(spec)
    grid = _grid(args, spec)
    f = stationary_density(spec, grid, normalize=not args.raw)
    out = _require_out(args)
    io.write_field_csv(out, f)
    if args.gnuplot:
        io.write_gnuplot_script(_sidecar(out, ".gp"), out,
                                [(1, 2, "stationary density")], "stationary density")
    print(f"wrote {out} (mass = {integrate(f):.12g})")
    return 0


def _write_trajectory(args, traj: Trajectory) -> None:
    out = _require_out(args)
    io.write_trajectory_csv(out, traj)
    if args.snapshot_dir:
        io.write_snapshot_series(args.snapshot_dir, traj)
    print(f"wrote {out} ({len(traj.snapshots)} snapshots, "
          f"t in [{traj.times[0]:g}, {traj.times[-1]:g}])")


def cmd_evolve(args) -> int:
    spec = _load(args)
    _require_ok(spec)
    grid = _grid(args, spec)
    t0, t1 = _window(args, spec)
    p0 = stationary_density(spec, grid, normalize=True)
    traj = solve_fpe(spec, grid, _scheme(args), p0, t0, t1)
    _write_trajectory(args, traj)
    return 0


def cmd_kappa(args) -> int:
    spec = _load(args)
    grid = _grid(args, spec)
    t0, t1 = _window(args, spec)
    kappa0 = Field(grid, np.zeros(grid.n), time=t0)
    traj = solve_kappa(spec, grid, _scheme(args), kappa0, t0, t1)
    _write_trajectory(args, traj)
    return 0


def cmd_approx(args) -> int:
    spec = _load(args)
    _require_ok(spec)
    grid = _grid(args, spec)
    scheme = replace(_scheme(args), snapshot_stride=10**9)
    t0 = spec.time_window[0]
    t_eval = args.t_eval if args.t_eval is not None else spec.time_window[1]

    phat = stationary_density(spec, grid, normalize=True)
    kappa0 = Field(grid, np.zeros(grid.n), time=t0)
    kappa = solve_kappa(spec, grid, scheme, kappa0, t0, t_eval).final
    p = solve_fpe(spec, grid, scheme, phat, t0, t_eval).final
    ptilde = assemble(phat, kappa, spec.epsilon)
    rep = error_report(p, ptilde, phat)

    out = _require_out(args)
    io.write_json(out, {
        "time": rep.time,
        "epsilon": spec.epsilon,
        "p_ptilde": rep.norms_p_ptilde._asdict(),
        "ptilde_phat": rep.norms_ptilde_phat._asdict(),
        "p_phat": rep.norms_p_phat._asdict(),
    })
    if args.q_out:
        io.write_field_csv(args.q_out, rep.q_field)
    print(f"wrote {out} (|p-ptilde|_inf = {rep.norms_p_ptilde.linf:.6g})")
    return 0


def cmd_scaling(args) -> int:
    spec = _load(args)
    _require_ok(spec)
    grid = _grid(args, spec)
    t_eval = args.t_eval if args.t_eval is not None else spec.time_window[1]
    result = scaling_study(spec, grid, _scheme(args), args.epsilons, t_eval,
                           workers=args.workers)
    out = _require_out(args)
    io.write_scaling_csv(out, result)
    io.write_json(_sidecar(out), io.scaling_to_dict(result))
    if args.gnuplot:
        io.write_gnuplot_script(
            _sidecar(out, ".gp"), out,
            [(1, 2, "|p-ptilde|"), (1, 3, "|ptilde-phat|"), (1, 4, "|p-phat|")],
            "error scaling",
        )
    print(f"wrote {out} (slopes: {result.slope_p_ptilde:.3f}, "
          f"{result.slope_ptilde_phat:.3f}, {result.slope_p_phat:.3f})")
    return 0


def cmd_mc(args) -> int:
    spec = _load(args)
    _require_ok(spec)
    grid = _grid(args, spec)
    t0 = spec.time_window[0]
    t1 = args.t1 if args.t1 is not None else spec.time_window[1]
    mc = MCConfig(n_paths=args.paths, dt=args.dt, seed=args.seed,
                  initial=StationaryStart())
    samples = simulate(spec, mc, t0, t1, workers=args.workers)
    emp, oor = empirical_density(samples, grid)

    pde_scheme = replace(_scheme(args), snapshot_stride=10**9)
    p0 = stationary_density(spec, grid, normalize=True)
    pde = solve_fpe(spec, grid, pde_scheme, p0, t0, t1).final
    l1 = norms(emp, pde).l1

    out = _require_out(args)
    io.write_samples_csv(out, samples)
    summary = io.mc_summary(samples, oor)
    summary["l1_vs_pde"] = l1
    summary["bins"] = grid.n
    io.write_json(args.summary or _sidecar(out), summary)
    print(f"wrote {out} (L1 vs PDE = {l1:.6g})")
    return 0


def cmd_oracle(args) -> int:
    spec = _load(args)
    oracle = OUOracle(epsilon=spec.epsilon, sigma=spec.sigma)
    grid = _grid(args, spec)
    out = _require_out(args)
    if args.epsilons:
        slope = ou_delta_order(oracle, grid, _scheme(args), args.epsilons, args.t_eval)
        io.write_json(out, {
            "epsilons": sorted(args.epsilons, reverse=True),
            "t_eval": args.t_eval,
            "slope": slope,
        })
        print(f"wrote {out} (slope = {slope:.4f})")
    else:
        t = args.t if args.t is not None else spec.time_window[1]
        f = ou_exact_density(oracle, t, grid)
        io.write_field_csv(out, f)
        if args.gnuplot:
            io.write_gnuplot_script(_sidecar(out, ".gp"), out,
                                    [(1, 2, "exact density")], "exact density")
        print(f"wrote {out} (t = {t:g})")
    return 0


def cmd_hjb(args) -> int:
    spec = _load(args)
    _require_ok(spec)
    grid = _grid(args, spec)
    if args.stationary:
        # the repeated stationary density solves the unforced equation
        spec = replace(spec, epsilon=0.0)
        phat = stationary_density(spec, grid, normalize=True)
        t0 = spec.time_window[0]
        snaps = tuple(Field(grid, phat.values, time=t0 + k) for k in range(3))
        traj = Trajectory(snaps, pde_kind="fpe")
    else:
        p0 = stationary_density(spec, grid, normalize=True)
        traj = solve_fpe(spec, grid, _scheme(args), p0, *spec.time_window)
    residual = hjb_residual(traj, spec)
    # emit S on the bulk window only; tail values carry no information
    bulk = bulk_window(traj.final)
    final_s = to_hj_potential(bulk, spec.sigma)

    out = _require_out(args)
    io.write_field_csv(out, final_s)
    io.write_json(args.report or _sidecar(out), {
        "residual": residual,
        "snapshots": len(traj.snapshots),
        "grid_n": grid.n,
        "window": [bulk.grid.x_min, bulk.grid.x_max],
        "stationary": bool(args.stationary),
    })
    print(f"wrote {out} (residual = {residual:.6g})")
    return 0


# --------------------------------------------------------------------------

def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        # JSONDecodeError subclasses ValueError, so handle it first
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
