"""Command-line front end.

Exit codes: 0 success, 2 malformed input or flags, 3 domain error,
4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from fractions import Fraction

import numpy as np

from . import __version__
from .cxone import (
    MarkedPoint,
    PolyhedralDivisor,
    SussFamilyParams,
    admissible_degenerations,
    general_fiber,
    hilbert_dims,
    suss_family,
)
from .documents import InputDocument, format_rational, parse_rational, parse_vector, suss_document
from .errors import DomainError, InvalidParams, NonConvergence, ParseError
from .kstab import (
    ZERO_BAND,
    bishop_gromov_bound,
    df_report,
    dh_measure,
    jna_norm,
    liu_bound,
    point_df_table,
    product_test_configuration,
    verdict,
)
from .ratgeom import lattice_points_under_level
from .reebopt import DEFAULT_TOL, minimize_volume, quasiregular_detect
from .reporting import csv_text, table, to_json
from .toric import ToricConeVariety, check_reeb, check_reeb_cone

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_CONVERGENCE = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


# ---------------------------------------------------------------------------
# helpers


def _document(args) -> InputDocument:
    if getattr(args, "input", None):
        return InputDocument.load(args.input)
    if getattr(args, "k", None) is not None:
        return suss_document(args.k, args.m or 0, args.mp or 0)
    raise ParseError("give --input FILE or --k/--m/--mp for the built-in family")


def _target(obj):
    """The object the optimizer works on."""
    return general_fiber(obj) if isinstance(obj, PolyhedralDivisor) else obj


def _rat_list(v):
    return None if v is None else [format_rational(x) for x in v]


def _minimize(obj, args):
    target = _target(obj)
    rep = minimize_volume(target, tol=args.tol, starts=args.starts, seed=args.seed)
    return target, rep


def _minimizer_results(target, rep, max_den=1000) -> dict:
    q = quasiregular_detect(target, rep, max_den)
    return {
        "xi_star": [float(x) for x in rep.xi_star],
        "vhat": rep.vhat,
        "a0": rep.a0,
        "volume_density": rep.vhat / target.n**target.n,
        "grad_residual": rep.grad_residual,
        "iterations": rep.iterations,
        "hessian_min_eigen": rep.hessian_min_eigen,
        "starts": rep.starts,
        "start_spread": rep.start_spread,
        "quasiregular": _rat_list(q),
        "gorenstein_u": _rat_list(target.gorenstein_u),
        "n": target.n,
    }


def _df_rows(reports) -> list[dict]:
    return [
        {
            "point": r.label,
            "df_volume_route": r.df_volume_route,
            "df_ab_route": r.df_ab_route,
            "sign": r.sign,
            "sign_ab": r.sign_ab,
            "product": r.product,
            "gauge_eta": list(r.gauge_eta),
        }
        for r in reports
    ]


def _sign(s: int) -> str:
    return {1: "+", 0: "0", -1: "-"}[s]


# ---------------------------------------------------------------------------
# commands; each returns (results dict, human-readable text)


def cmd_hilbert(args):
    obj = _document(args).build()
    if args.xi is not None:
        xi = parse_vector(args.xi)
    else:
        xi = tuple(Fraction(x) for x in (obj.sigma if isinstance(obj, ToricConeVariety) else obj.tail).ray_sum())
    cutoff = parse_rational(args.cutoff)
    check_reeb_cone(obj.sigma if isinstance(obj, ToricConeVariety) else obj.tail, xi)
    pts = lattice_points_under_level(obj.dual, xi, cutoff)
    if isinstance(obj, ToricConeVariety):
        dims = np.ones(len(pts), dtype=np.int64)
    else:
        dims = hilbert_dims(obj, pts)
    levels = [sum(Fraction(int(a)) * b for a, b in zip(m, xi)) for m in pts]
    order = sorted(range(len(pts)), key=lambda i: (levels[i], tuple(int(x) for x in pts[i])))
    rows = [(tuple(int(x) for x in pts[i]), int(dims[i])) for i in order]
    res = {
        "xi": _rat_list(xi),
        "cutoff": format_rational(cutoff),
        "rows": [{"m": list(m), "dim": d} for m, d in rows],
    }
    headers = ["m", "dim R_m"]
    text = csv_text(headers, rows) if args.csv else table(headers, rows)
    return res, text


def cmd_volmin(args):
    obj = _document(args).build()
    target, rep = _minimize(obj, args)
    res = _minimizer_results(target, rep, args.max_denominator)
    text = table(["quantity", "value"], [(k, v) for k, v in res.items()])
    return res, text


def cmd_df(args):
    obj = _document(args).build()
    target = _target(obj)
    if args.xi is not None:
        xi = parse_vector(args.xi)
        check_reeb(target, xi)
        mini = None
    else:
        _, rep = _minimize(obj, args)
        xi = tuple(float(x) for x in rep.xi_star)
        mini = _minimizer_results(target, rep, args.max_denominator)
    if isinstance(obj, PolyhedralDivisor):
        reports, skipped = point_df_table(obj, xi, parse_rational(args.cutoff), args.band)
    else:
        reports, skipped = [], []
        for i in range(obj.n):
            e = tuple(int(i == j) for j in range(obj.n))
            r = df_report(product_test_configuration(obj, e, xi), args.band)
            reports.append(replace(r, label=f"product e{i + 1}"))
    res = {
        "xi": [float(x) for x in xi],
        "minimizer": mini,
        "df": _df_rows(reports),
        "skipped": [{"point": p, "reason": r} for p, r in skipped],
    }
    rows = [(r.label, r.df_volume_route, r.df_ab_route, _sign(r.sign), "yes" if r.product else "no") for r in reports]
    text = table(["point", "DF (volume)", "DF (A/B)", "sign", "product"], rows)
    if skipped:
        text += "\n\nskipped:\n" + "\n".join(f"  {p}: {r}" for p, r in skipped)
    return res, text


def cmd_verdict(args):
    obj = _document(args).build()
    target, rep = _minimize(obj, args)
    v = verdict(obj, rep, cutoff=parse_rational(args.cutoff), band=args.band)
    res = {
        "status": v.status,
        "witnesses": [{"point": p, "sign": s} for p, s in v.witnesses],
        "minimizer": _minimizer_results(target, rep, args.max_denominator),
        "df": _df_rows(v.table),
        "skipped": [{"point": p, "reason": r} for p, r in v.skipped],
    }
    rows = [(r.label, r.df_volume_route, r.df_ab_route, _sign(r.sign), "yes" if r.product else "no") for r in v.table]
    text = f"status: {v.status}\nxi*: {tuple(float(x) for x in rep.xi_star)}  vhat: {rep.vhat:.12g}\n\n"
    text += table(["point", "DF (volume)", "DF (A/B)", "sign", "product"], rows)
    if v.skipped:
        text += "\n\nskipped:\n" + "\n".join(f"  {p}: {r}" for p, r in v.skipped)
    return res, text


def cmd_dh(args):
    obj = _document(args).build()
    target = _target(obj)
    if args.xi is not None:
        xi = parse_vector(args.xi)
        check_reeb(target, xi)
    else:
        xi = tuple(float(x) for x in _minimize(obj, args)[1].xi_star)
    cutoff = parse_rational(args.cutoff)
    if isinstance(obj, PolyhedralDivisor) and args.eta is None:
        want = MarkedPoint.parse(args.point) if args.point is not None else None
        tc = None
        for y, cand, check in admissible_degenerations(obj, xi, cutoff):
            if cand is not None and check.ok and (want is None or y == want):
                tc = cand
                break
        if tc is None:
            raise DomainError("no admissible degeneration at the requested point")
        label = tc.label
    else:
        eta = parse_vector(args.eta) if args.eta is not None else (1,) + (0,) * (len(xi) - 1)
        tc = product_test_configuration(target, eta, xi)
        label = "product eta=(" + ",".join(str(x) for x in eta) + ")"
    mu = dh_measure(tc, cutoff)
    j = jna_norm(mu)
    res = {
        "configuration": label,
        "cutoff": format_rational(cutoff),
        "characters": mu.characters,
        "total_mass": mu.total_mass,
        "jna_norm": j,
        "atoms": [[x, m] for x, m in mu.atoms],
    }
    headers = ["location", "mass"]
    if args.csv:
        text = csv_text(headers, mu.atoms)
    else:
        text = f"{label}: {len(mu.atoms)} atoms, J^NA = {j:.12g}\n\n" + table(headers, mu.atoms)
    return res, text


def cmd_bounds(args):
    res = {}
    rows = []
    if args.n is None:
        raise ParseError("--n is required")
    if args.vhat is not None:
        try:
            vhat = parse_rational(args.vhat)
        except ParseError:
            try:
                vhat = float(args.vhat)
            except ValueError as exc:
                raise ParseError(f"bad --vhat {args.vhat!r}") from exc
        try:
            b = liu_bound(args.n, vhat)
        except InvalidParams as exc:
            raise ParseError(str(exc)) from exc
        res["liu"] = b
        rows.append(("liu", b))
    if args.gamma is not None:
        try:
            b = bishop_gromov_bound(args.n, args.gamma)
        except InvalidParams as exc:
            raise ParseError(str(exc)) from exc
        res["bishop_gromov"] = b
        rows.append(("bishop_gromov", b))
    if not rows:
        raise ParseError("give --vhat and/or --gamma")
    return res, table(["bound", "value"], rows)


def _sweep_cell(k: int, m: int, mp: int, cutoff, tol: float):
    D = suss_family(SussFamilyParams(k, m, mp))
    v = verdict(D, cutoff=cutoff, tol=tol)
    signs = {p: s for p, s in v.witnesses}
    return {
        "m": m,
        "mp": mp,
        "status": v.status,
        "df_sign_0": signs.get("0"),
        "df_sign_inf": signs.get("inf"),
        "vhat": v.minimizer.vhat,
    }


def _workers(cells: int) -> int:
    env = os.environ.get("CONEVOL_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError as exc:
            raise ParseError(f"CONEVOL_THREADS must be an integer, got {env!r}") from exc
    return max(1, min(cap, cells))


def cmd_sweep_suss(args):
    if args.k is None:
        raise ParseError("--k is required")
    if not 1 <= args.k <= 4:
        raise ParseError("sweep-suss supports 1 <= k <= 4")
    grid = args.k if args.grid is None else args.grid
    cells = [(m, mp) for m in range(args.k + 1) for mp in range(args.k + 1) if m + mp <= min(grid, args.k)]
    cutoff = parse_rational(args.cutoff)
    workers = _workers(len(cells))
    if workers == 1:
        rows = [_sweep_cell(args.k, m, mp, cutoff, args.tol) for m, mp in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_sweep_cell, args.k, m, mp, cutoff, args.tol) for m, mp in cells]
            rows = [f.result() for f in futs]
    headers = ["m", "mp", "status", "DF(0)", "DF(inf)", "vhat"]
    flat = [
        (r["m"], r["mp"], r["status"], _sign_or_dash(r["df_sign_0"]), _sign_or_dash(r["df_sign_inf"]), r["vhat"])
        for r in rows
    ]
    text = csv_text(headers, flat) if args.csv else table(headers, flat)
    return {"k": args.k, "rows": rows}, text


def _sign_or_dash(s):
    return "-" if s is None else _sign(s)


COMMANDS = {
    "hilbert": cmd_hilbert,
    "volmin": cmd_volmin,
    "df": cmd_df,
    "verdict": cmd_verdict,
    "dh": cmd_dh,
    "bounds": cmd_bounds,
    "sweep-suss": cmd_sweep_suss,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", metavar="FILE", help="YAML input document")
    common.add_argument("--k", type=int, help="built-in Süß family: number of points")
    common.add_argument("--m", type=int, default=0, help="points collided at 0")
    common.add_argument("--mp", type=int, default=0, help="points collided at infinity")
    common.add_argument("--format", choices=("table", "json"), default="table")
    common.add_argument("--report", metavar="FILE", help="also write the JSON report here")
    common.add_argument("--csv", action="store_true", help="CSV instead of an aligned table")
    common.add_argument("--timing", action="store_true", help="include wall time in the report")

    opt = _Parser(add_help=False)
    opt.add_argument("--tol", type=float, default=DEFAULT_TOL)
    opt.add_argument("--starts", type=int, default=1)
    opt.add_argument("--seed", type=int, default=0)
    opt.add_argument("--max-denominator", type=int, default=1000)
    opt.add_argument("--band", type=float, default=ZERO_BAND, help="|DF| at or below this counts as zero")

    parser = _Parser(prog="conevol", description="Volumes and K-stability of Fano cones.")
    parser.add_argument("--version", action="version", version=f"conevol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("hilbert", parents=[common], help="characters and their multiplicities")
    p.add_argument("--xi", help='Reeb field, e.g. "1,1" or "3/2,3/2,3"')
    p.add_argument("--cutoff", default="10")

    sub.add_parser("volmin", parents=[common, opt], help="minimize the normalized volume")

    p = sub.add_parser("df", parents=[common, opt], help="Donaldson-Futaki table")
    p.add_argument("--xi", help="evaluate at this Reeb field instead of the minimizer")
    p.add_argument("--cutoff", default="50", help="level for the Hilbert constancy check")

    p = sub.add_parser("verdict", parents=[common, opt], help="stability verdict at the minimizer")
    p.add_argument("--cutoff", default="50")

    p = sub.add_parser("dh", parents=[common, opt], help="Duistermaat-Heckman measure and J-norm")
    p.add_argument("--xi")
    p.add_argument("--cutoff", default="50")
    p.add_argument("--point", help="degeneration point for complexity-one input")
    p.add_argument("--eta", help="one-parameter subgroup for a product configuration")

    p = sub.add_parser("bounds", parents=[common], help="Liu and Bishop-Gromov bounds")
    p.add_argument("--n", type=int)
    p.add_argument("--vhat")
    p.add_argument("--gamma", type=int)

    p = sub.add_parser("sweep-suss", parents=[common, opt], help="verdicts over collision patterns")
    p.add_argument("--grid", type=int, help="only cells with m + mp <= GRID")
    p.add_argument("--cutoff", default="50")
    return parser


def _flags(args) -> dict:
    skip = {"command", "format", "report", "timing"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None and v is not False}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        start = time.perf_counter()
        results, text = COMMANDS[args.command](args)
        report = {"command": args.command, "flags": _flags(args)}
        try:
            report["input_digest"] = _document(args).digest
        except ParseError:
            report["input_digest"] = None
        report["results"] = results
        report["tolerances"] = {
            "tol": getattr(args, "tol", None),
            "zero_band": getattr(args, "band", None),
        }
        if args.timing:
            report["wall_time"] = time.perf_counter() - start
        payload = to_json(report)
        if args.report:
            with open(args.report, "w", encoding="utf-8") as fh:
                fh.write(payload + "\n")
        stdout.write((payload if args.format == "json" else text) + "\n")
        return EXIT_OK
    except ParseError as exc:
        print(f"conevol: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"conevol: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NonConvergence as exc:
        print(f"conevol: no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
