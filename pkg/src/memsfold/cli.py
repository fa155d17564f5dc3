"""Command-line interface: mems-fold <solve|branch|folds|singular|charts|compare|plot>.

Emits CSV/JSON data files and minimal SVG plots of the bifurcation structure.
All commands are deterministic for a fixed configuration.  Exit codes:
0 success, 1 runtime failure, 2 usage error.
"""
import argparse
import json
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import asymptotics, charts, continuation, firstint, plotting, shooting, singular
from .model import ModelParams


@dataclass
class RunConfig:
    rtol: float = 1e-12
    atol: float = 1e-12
    res_tol: float = 1e-10
    rho: float = 0.5
    sigma: float = 0.1
    grid: int = 2001
    lambda0: float = 0.005
    lambda_max: float = 1.0
    lambda_min: float = 1e-6
    h0: float = 2e-3
    seed: int = 1234
    width: int = 640
    height: int = 480

    def __post_init__(self):
        for name in ("rtol", "atol", "res_tol", "rho", "sigma"):
            if getattr(self, name) <= 0:
                raise ValueError(f"configuration value {name} must be positive")


def load_config(path):
    """Flat `key = value` lines; '#' starts a comment."""
    values = {}
    valid = {f.name: f.type for f in fields(RunConfig)}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in valid:
                raise ValueError(f"unknown config key: {key!r}")
            values[key] = int(val) if valid[key] is int else float(val)
    return values


def _config_from(args):
    values = load_config(args.config) if args.config else {}
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    return RunConfig(**values)


def _sol_record(s, p):
    return {"w0": s.w0, "norm_u2": s.norm2,
            "stability": continuation.classify_stability(s, p),
            "method": s.method}


def cmd_solve(args):
    cfg = _config_from(args)
    p = ModelParams(eps=args.eps, lam=args.lam)
    sols = shooting.find_solutions(p, res_tol=cfg.res_tol)
    if not args.all and sols:
        sols = sols[:1]
    out = {"eps": args.eps, "lambda": args.lam,
           "count": len(sols), "solutions": [_sol_record(s, p) for s in sols]}
    print(json.dumps(out, indent=2))
    if args.out:
        lines = ["solution_id,x,u,w"]
        for i, s in enumerate(sols):
            for x, u, w in zip(s.x, s.u, s.w):
                lines.append(f"{i},{x:.17g},{u:.17g},{w:.17g}")
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def cmd_branch(args):
    cfg = _config_from(args)
    br = continuation.trace_branch(args.eps, lambda_max=cfg.lambda_max,
                                   lambda_min=cfg.lambda_min, lambda0=cfg.lambda0,
                                   h0=cfg.h0, classify=True, n_stab=cfg.grid)
    continuation.write_branch_csv(br, args.out)
    info = {"eps": args.eps, "points": len(br.points),
            "folds": [{"kind": f.kind, "lambda": f.lambda_fold,
                       "norm_u2": f.norm2_fold} for f in br.folds]}
    if br.diagnostics:
        info["diagnostics"] = br.diagnostics
    print(json.dumps(info, indent=2))
    return 0


def cmd_folds(args):
    eps_list = [float(s) for s in args.eps_list.split(",") if s.strip()] \
        if args.eps_list else []
    rows = continuation.fold_report(eps_list)
    payload = json.dumps(rows, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    print(payload)
    return 0


def cmd_singular(args):
    cfg = _config_from(args)
    kind = args.type.upper()
    n_prof = args.grid_pts or cfg.grid
    if kind == "II":
        orb = singular.type2_orbit(n=n_prof)
    elif kind == "I":
        if args.delta is None:
            print("--type I requires --delta", file=sys.stderr)
            return 2
        orb = singular.type1_orbit(args.delta, n=n_prof)
    elif kind == "III":
        mgrid = 1.0 / (1.0 + np.geomspace(2e3, 2e-3, args.grid_pts or 120))
        pts = singular.type3_branch(mgrid)
        rows = [("B3", q.u_min, q.lam, q.norm2) for q in pts]
        if args.out:
            singular.write_singular_csv(rows, args.out)
        lam_max = max(q.lam for q in pts)
        print(json.dumps({"type": "III", "points": len(pts),
                          "lambda_fold": lam_max}, indent=2))
        return 0
    elif kind == "ALL":
        rows = singular.singular_diagram()
        if args.out:
            singular.write_singular_csv(rows, args.out)
        print(json.dumps({"type": "diagram", "rows": len(rows)}, indent=2))
        return 0
    else:
        print(f"unknown singular type {args.type!r}", file=sys.stderr)
        return 2
    if args.out:
        lines = ["x,u,w"] + [f"{x:.17g},{u:.17g},{w:.17g}"
                             for x, u, w in zip(orb.x, orb.u, orb.w)]
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    print(json.dumps({"type": kind, "norm_u2": orb.norm2,
                      "delta": orb.delta}, indent=2))
    return 0


def cmd_charts(args):
    cfg = _config_from(args)
    if args.action != "check":
        print(f"unknown charts action {args.action!r}", file=sys.stderr)
        return 2
    checks = charts.charts_check(sigma=cfg.sigma, rho=cfg.rho, seed=cfg.seed)
    payload = json.dumps({"checks": checks,
                          "all_pass": all(c["pass"] for c in checks)}, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    print(payload)
    return 0 if all(c["pass"] for c in checks) else 1


def _compare_rows(what, eps_vals, cfg):
    rows = [("what", "eps", "lambda", "numeric", "asymptotic", "residual",
             "scaled_residual")]
    if what == "lambda-star":
        report = continuation.fold_report(eps_vals)
        for r in report:
            if "error" in r:
                raise RuntimeError(f"eps={r['eps']}: {r['error']}")
            rows.append((what, r["eps"], "", r["lambda_star_numeric"],
                         r["lambda_star_asymptotic"], r["abs_error"],
                         r["abs_error"] / r["eps"] ** 2))
    elif what == "norm-upper":
        for eps in eps_vals:
            lam = 0.5
            from scipy.optimize import brentq
            plat = brentq(lambda q: firstint.residual_plateau(eps, lam, q),
                          1e-8, 0.999, xtol=1e-15)
            num = firstint.norm2_of_plateau(eps, lam, plat)
            asy = asymptotics.norm_upper(eps, lam)
            scale = eps**1.5 * abs(np.log(eps))
            rows.append((what, eps, lam, num, asy, num - asy, (num - asy) / scale))
    elif what == "xi-out":
        for eps in eps_vals:
            _, xi_num, _ = charts.transition_K1(-charts.W_INF, eps, delta=1.0,
                                                sigma=cfg.sigma)
            asy = asymptotics.xi1_out_expansion(1.0, eps)
            rows.append((what, eps, "", xi_num, asy, xi_num - asy,
                         (xi_num - asy) / eps))
    elif what == "slope":
        for eps in eps_vals:
            br = continuation.trace_branch(eps, stop_after_folds=2, lambda_max=0.6)
            lower = [f for f in br.folds if f.kind == "lower"][0]
            num = continuation.slope_at_fold(br, lower)
            asy = asymptotics.fold_slope(eps)
            rows.append((what, eps, lower.lambda_fold, num, asy, num - asy,
                         (num - asy) / asy))
    else:
        raise ValueError(f"unknown comparison {what!r}")
    return rows


def cmd_compare(args):
    cfg = _config_from(args)
    eps_vals = [float(s) for s in args.eps_list.split(",")] if args.eps_list \
        else ([args.eps] if args.eps is not None else [0.01])
    rows = _compare_rows(args.what, eps_vals, cfg)
    text = "\n".join(",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                              for v in row) for row in rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_plot(args):
    cfg = _config_from(args)
    rows = []
    folds = []
    with open(args.infile) as fh:
        header = fh.readline().strip().split(",")
        i_lam = header.index("lambda")
        i_n = header.index("norm_u2")
        i_f = header.index("is_fold")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) < len(header):
                continue
            lam, n2 = float(parts[i_lam]), float(parts[i_n])
            rows.append((lam, n2))
            if parts[i_f] == "1":
                folds.append((lam, n2))
    plotting.branch_svg(rows, folds, args.out, width=cfg.width, height=cfg.height)
    print(json.dumps({"points": len(rows), "folds": len(folds), "out": args.out}))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="mems-fold", allow_abbrev=False,
                                 description="Bifurcation structure of the "
                                             "regularized membrane problem")
    ap.add_argument("--config", help="key = value configuration file")
    for flag, dest, typ in (("--rtol", "rtol", float), ("--atol", "atol", float),
                            ("--res-tol", "res_tol", float), ("--rho", "rho", float),
                            ("--sigma", "sigma", float), ("--grid", "grid", int),
                            ("--start-lambda", "lambda0", float),
                            ("--max-lambda", "lambda_max", float),
                            ("--min-lambda", "lambda_min", float),
                            ("--h0", "h0", float), ("--seed", "seed", int),
                            ("--width", "width", int), ("--height", "height", int)):
        ap.add_argument(flag, type=typ, default=None, dest=dest)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solutions at fixed (eps, lambda)")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--lambda", type=float, required=True, dest="lam")
    p.add_argument("--all", action="store_true")
    p.add_argument("--out", help="optional profile CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("branch", help="trace the bifurcation branch to CSV")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("folds", help="numeric vs asymptotic fold report (JSON)")
    p.add_argument("--eps-list", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_folds)

    p = sub.add_parser("singular", help="limiting solutions and their diagram")
    p.add_argument("--type", required=True, help="I | II | III | all")
    p.add_argument("--delta", type=float)
    p.add_argument("--grid", type=int, dest="grid_pts",
                   help="branch points (type III) / profile samples (I, II)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_singular)

    p = sub.add_parser("charts", help="chart invariant suite")
    p.add_argument("action", help="check")
    p.add_argument("--out")
    p.set_defaults(func=cmd_charts)

    p = sub.add_parser("compare", help="numeric vs asymptotic residual table")
    p.add_argument("--what", required=True,
                   choices=["lambda-star", "norm-upper", "xi-out", "slope"])
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-list")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("plot", help="branch CSV to SVG")
    p.add_argument("--in", required=True, dest="infile")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime failures exit 1, usage errors exit 2 via argparse
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
