"""Command line front end.

Exit codes: 0 success, 1 a check or ordering failed, 2 bad config, bad
request or unmet precondition, 3 boundary solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .boundary import BoundaryError, BoundaryField, find_endpoint
from .checks import run_checks
from .config import ConfigError, load_config
from .diffusion import DomainError
from .files import read_boundary, write_boundary, write_csv, write_json
from .montecarlo import SimConfig, StoppingPolicy, simulate_game_value, simulate_stopped_value
from .statics import EQUAL, HOLDS, INCONCLUSIVE, compare_cost_laws, compare_payoffs
from .value import REGION_NAMES, ValueSurface


class UsageError(Exception):
    pass


def _parse_grid(text: str):
    try:
        parts = [p.split(":") for p in text.split(",")]
        (x0, x1, nx), (m0, m1, nm) = parts
        xs = np.linspace(float(x0), float(x1), int(nx))
        ms = np.linspace(float(m0), float(m1), int(nm))
    except ValueError:
        raise UsageError(f"--grid expects 'x0:x1:n,m0:m1:n', got {text!r}") from None
    return xs, ms


def _run_dir(args, cfg) -> Path:
    return Path(args.out) / cfg.name


def _setup(args):
    cfg = load_config(args.config[0])
    problem = cfg.problem()
    settings = cfg.solver_settings()
    if getattr(args, "boundary", None):
        boundary = read_boundary(args.boundary, problem.x_R)
    else:
        boundary = find_endpoint(problem, settings)
    return cfg, problem, settings, boundary


def _summary(problem, boundary, field) -> dict:
    return {"m_low": boundary.m_low, "x_R": problem.x_R, "x_U": problem.payoffs.x_U,
            "m_xR": field.null_curve(problem.x_R), "horizon": boundary.horizon,
            "grid_end": boundary.m_max, "bracket": list(boundary.bracket),
            "bracket_width": boundary.bracket_width, "iterations": boundary.iterations,
            "tail_mass_at_grid_end": float(problem.law.sf(boundary.m_max))}


def cmd_solve(args) -> int:
    cfg, problem, _, boundary = _setup(args)
    field = BoundaryField(problem)
    out = _run_dir(args, cfg)
    write_boundary(out / "boundary.csv", problem, boundary, field)
    summary = _summary(problem, boundary, field)
    write_json(out / "summary.json", summary)
    print(f"m_low={summary['m_low']:.12g} x_R={summary['x_R']:.12g} "
          f"m_xR={summary['m_xR']:.12g} -> {out}")
    return 0


def cmd_value(args) -> int:
    if args.grid:
        xs, ms = _parse_grid(args.grid)
        pts = [(x, m) for m in ms for x in xs if x <= m]
    elif args.x is not None and args.m is not None:
        if args.x > args.m:
            raise UsageError(f"value needs x <= m, got x={args.x}, m={args.m}")
        pts = [(args.x, args.m)]
    else:
        raise UsageError("value needs --x and --m, or --grid")
    if not pts:
        raise UsageError("grid contains no point with x <= m")
    cfg, problem, _, boundary = _setup(args)
    s = ValueSurface(problem, boundary)
    x = np.array([p[0] for p in pts])
    m = np.array([p[1] for p in pts])
    if np.any(m > boundary.m_max):
        raise UsageError(f"m beyond the solved grid end {boundary.m_max:.6g}")
    w, wx, wm = s.value(x, m), s.partial_x(x, m), s.partial_m(x, m)
    reg = s.region(x, m)
    diag = x == m
    vbar = np.full(len(x), np.nan)
    if np.any(diag):
        vbar[diag] = s.initial_value(x[diag])
    rows = [(a, b, REGION_NAMES[int(k)], c, "" if np.isnan(v) else v, d, e)
            for a, b, k, c, v, d, e in zip(x, m, np.atleast_1d(reg), w, vbar, wx, wm)]
    path = write_csv(_run_dir(args, cfg) / "values.csv",
                     ["x", "m", "region", "W", "Vbar", "dW_dx", "dW_dm"], rows)
    if len(rows) == 1:
        print(f"region={rows[0][2]} W={rows[0][3]:.12g}")
    print(f"{len(rows)} rows -> {path}")
    return 0


def cmd_simulate(args) -> int:
    if args.x is None or args.m is None:
        raise UsageError("simulate needs --x and --m")
    cfg, problem, _, boundary = _setup(args)
    sim = dict(cfg.sim)
    if args.seed is not None:
        sim["seed"] = args.seed
    try:
        sc = SimConfig((args.x, args.m), **sim)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"sim: {exc}") from None
    if args.policy == "boundary":
        policy = StoppingPolicy.from_boundary(boundary)
    elif args.policy == "threshold":
        policy = StoppingPolicy.threshold(problem.x_R)
    else:
        policy = StoppingPolicy.never()
    s = ValueSurface(problem, boundary)
    if args.mode == "game":
        res = simulate_game_value(problem, policy, sc)
        analytic = s.initial_value(args.x)
    else:
        res = simulate_stopped_value(problem, policy, sc)
        analytic = s.value(args.x, args.m)
    path = write_csv(_run_dir(args, cfg) / "simulation.csv",
                     ["mode", "policy", "x", "m", "estimate", "std_error", "n_stopped",
                      "n_truncated", "tail_bound", "analytic"],
                     [(args.mode, policy.name, args.x, args.m, res.estimate, res.std_error,
                       res.n_stopped, res.n_truncated, res.tail_bound, analytic)])
    print(f"estimate={res.estimate:.8g} se={res.std_error:.3g} analytic={analytic:.8g} -> {path}")
    return 0


def cmd_check(args) -> int:
    cfg, problem, settings, boundary = _setup(args)
    report = run_checks(problem, boundary, args.level, settings, args.seed or 42)
    write_json(_run_dir(args, cfg) / "check.json", report.to_dict())
    for r in report.results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: worst={r.worst:.3g} tol={r.tolerance:.3g}")
    return 0 if report.passed else 1


def cmd_compare(args) -> int:
    if len(args.config) != 2:
        raise UsageError("compare needs exactly two --config files")
    a, b = load_config(args.config[0]), load_config(args.config[1])
    pa, pb = a.problem(), b.problem()
    fn = compare_cost_laws if args.mode == "costs" else compare_payoffs
    rep = fn(pa, pb, a.solver_settings())
    out = Path(args.out) / f"{a.name}_vs_{b.name}"
    write_json(out / "compare.json", rep.to_dict())
    if len(rep.grid):
        write_csv(out / "compare.csv", ["m", "b1", "b2", "b2_minus_b1"], rep.rows())
    print(f"verdict: {rep.verdict}" + (f" ({rep.reason})" if rep.reason else ""))
    if rep.verdict == INCONCLUSIVE:
        return 2
    return 0 if rep.verdict in (HOLDS, EQUAL) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="breakthrough-timing",
                                description="Investment timing with breakthrough uncertainty.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, boundary=True):
        sp.add_argument("--config", action="append", required=True, metavar="PATH")
        sp.add_argument("--out", default="out", metavar="DIR")
        sp.add_argument("--seed", type=int, default=None)
        if boundary:
            sp.add_argument("--boundary", metavar="CSV", help="use a saved boundary instead of solving")
        return sp

    common(sub.add_parser("solve", help="solve the free boundary"), boundary=False).set_defaults(func=cmd_solve)
    sp = common(sub.add_parser("value", help="evaluate the value surface"))
    sp.add_argument("--x", type=float)
    sp.add_argument("--m", type=float)
    sp.add_argument("--grid", help="'x0:x1:n,m0:m1:n'")
    sp.set_defaults(func=cmd_value)
    sp = common(sub.add_parser("simulate", help="Monte Carlo estimate at one start"))
    sp.add_argument("--x", type=float)
    sp.add_argument("--m", type=float)
    sp.add_argument("--mode", choices=["stopped", "game"], default="stopped")
    sp.add_argument("--policy", choices=["boundary", "threshold", "never"], default="boundary")
    sp.set_defaults(func=cmd_simulate)
    sp = common(sub.add_parser("check", help="run the invariant suite"))
    sp.add_argument("--level", choices=["fast", "full"], default="fast")
    sp.set_defaults(func=cmd_check)
    sp = common(sub.add_parser("compare", help="comparative statics of two configs"), boundary=False)
    sp.add_argument("--mode", choices=["costs", "payoffs"], required=True)
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BoundaryError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        for m0, horizon, kind in exc.trace:
            print(f"  m0={m0!r} horizon={horizon!r} {kind}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
