"""Command-line interface: ``cayley-tisgm {solve,census,critical,extremality}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import census, chain, extremality, tisgm
from .model import ModelParams
from .rootfind import RootFindingError

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def fmt(x) -> str:
    return f"{x:.12g}"


def _round(obj):
    """Round floats to 12 significant digits, recursively, for stable output."""
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _thetas(args) -> list:
    if args.theta is not None:
        return [args.theta]
    if args.theta_min is None or args.theta_max is None:
        raise UsageError("give --theta or both --theta-min and --theta-max")
    if args.steps < 1 or args.theta_max < args.theta_min:
        raise UsageError("need steps >= 1 and theta-max >= theta-min")
    if args.steps == 1:
        return [args.theta_min]
    return [float(t) for t in np.linspace(args.theta_min, args.theta_max, args.steps)]


def cmd_solve(args) -> str:
    params = ModelParams(args.k, args.q, args.theta)
    ms = [args.m] if args.m is not None else range(1, args.q // 2 + 1)
    sols = list(tisgm.solve_free(params))
    for m in ms:
        sols += tisgm.solve_all(params, m)
    report = census.enumerate_tisgm(params)
    rows = [{"m": s.m, "case_tag": s.case_tag, "branch": s.branch, "u": s.u, "v": s.v, "w": s.w,
             "residual": tisgm.residual(s, params)} for s in sols]
    if args.format == "csv":
        return _csv(["theta", "m", "case_tag", "branch", "u", "v", "w", "residual"],
                    [[params.theta, r["m"], r["case_tag"], r["branch"], r["u"], r["v"], r["w"], r["residual"]]
                     for r in rows])
    return json.dumps(_round({"theta": params.theta, "k": params.k, "q": params.q, "partial": params.k != 2,
                              "total": report.total, "solutions": rows}), indent=2)


def cmd_census(args) -> str:
    reports = [census.enumerate_tisgm(ModelParams(args.k, args.q, th)) for th in _thetas(args)]
    if args.format == "csv":
        if args.entries:
            return census.to_csv(reports)
        return _csv(["theta", "total", "formula_total", "partial"],
                    [[r.theta, r.total, r.formula_total, int(r.partial)] for r in reports])
    data = [r.to_dict() for r in reports]
    if not args.entries:
        for d in data:
            d.pop("entries")
    return json.dumps(_round(data), indent=2)


def cmd_critical(args) -> str:
    params = ModelParams(args.k, args.q, 2.0)
    lo = args.theta_min if args.theta_min is not None else 1.0
    hi = args.theta_max if args.theta_max is not None else 20.0
    crit = census.critical_scan(params, lo, hi, merge_tol=args.merge_tol)
    partial = args.k != 2
    rows = [{"theta": c.theta, "kind": c.kind, "cluster": list(c.cluster), "members": list(c.members),
             "changes_count": c.changes_count, "counts": list(c.counts)} for c in crit]
    if args.format == "csv":
        return _csv(["theta", "kind", "cluster", "changes_count", "count_below", "count_at", "count_above"],
                    [[r["theta"], r["kind"], ";".join(r["cluster"]), int(bool(r["changes_count"])), *r["counts"]]
                     for r in rows])
    return json.dumps(_round({"k": args.k, "q": args.q, "partial": partial, "merge_tol": args.merge_tol,
                              "critical_values": rows}), indent=2)


EXT_FIELDS = ["theta", "measure_id", "present", "w", "kappa", "kappa_matrix", "gamma_bound", "product",
              "lambda2", "ks_statistic", "msw_verdict", "ks_verdict"]


def cmd_extremality(args) -> str:
    rows = []
    for th in _thetas(args):
        params = ModelParams(args.k, args.q, th)
        try:
            rep = extremality.msw_check(args.measure, params)
        except ValueError:
            rows.append({"theta": th, "measure_id": args.measure, "present": False})
            continue
        d = rep.to_dict()
        d["present"] = True
        d["ks_statistic"] = args.k * rep.lambda2 ** 2
        rows.append(d)
    if args.format == "csv":
        return _csv(EXT_FIELDS, [[r.get(f, "") for f in EXT_FIELDS] for r in rows])
    return json.dumps(_round(rows), indent=2)


COMMANDS = {"solve": cmd_solve, "census": cmd_census, "critical": cmd_critical, "extremality": cmd_extremality}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cayley-tisgm",
                                     description="TISGMs of the coupled Ising-Potts model on a Cayley tree.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, theta_range: bool):
        p.add_argument("--k", type=int, default=2, help="branching order")
        p.add_argument("--q", type=int, default=5, help="number of Potts states")
        p.add_argument("--theta", type=float, default=None)
        if theta_range:
            p.add_argument("--theta-min", type=float, default=None)
            p.add_argument("--theta-max", type=float, default=None)
            p.add_argument("--steps", type=int, default=1)
        p.add_argument("--tol", type=float, default=None, help="residual tolerance (env TISGM_TOL)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output-path", default=None)

    p = sub.add_parser("solve", help="list every reduced solution at one theta")
    common(p, False)
    p.add_argument("--m", type=int, default=None)

    p = sub.add_parser("census", help="count TISGMs over a theta grid")
    common(p, True)
    p.add_argument("--entries", action="store_true", help="include one record per reduced solution")

    p = sub.add_parser("critical", help="scan theta for critical values")
    common(p, True)
    p.add_argument("--merge-tol", type=float, default=1e-3)

    p = sub.add_parser("extremality", help="Kesten-Stigum and MSW checks for a free-branch measure")
    common(p, True)
    p.add_argument("--measure", choices=chain.MEASURES, default="free")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    tol = args.tol
    if tol is None and os.environ.get("TISGM_TOL"):
        try:
            tol = float(os.environ["TISGM_TOL"])
        except ValueError:
            print("TISGM_TOL must be a number", file=sys.stderr)
            return EXIT_USAGE
    try:
        if tol is not None:
            tisgm.set_residual_tol(tol)
        if args.command == "solve" and args.theta is None:
            raise UsageError("solve needs --theta")
        out = COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RootFindingError, np.linalg.LinAlgError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    finally:
        tisgm.set_residual_tol(tisgm.RESIDUAL_TOL)
    if args.output_path:
        with open(args.output_path, "w") as fh:
            fh.write(out if out.endswith("\n") else out + "\n")
    else:
        print(out, end="" if out.endswith("\n") else "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
