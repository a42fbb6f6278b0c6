"""Command-line interface.

Exit codes: 0 success, 2 numerical failure (a report with the best iterate is
still written), 3 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import inequalities as ineq
from .discrete import DiscreteProblem, SolveOptions, solve_gaussian_minkowski, solve_normalized
from .errors import GeometryError, GminkError, InputError, NumericalError
from .gauss_core import NoSolution, ball_roots
from .geometry import HBody, Polytope2, Polytope3, wulff_shape
from .measure import DEFAULT_QUAD, facet_measures, gaussian_volume, monte_carlo_volume
from .serialize import (BALL_SCHEMA, PROBLEM_SCHEMA, SMOOTH_SCHEMA, SWEEP_SCHEMA, VERIFY_SCHEMA,
                        canonical_json, loads, measure_to_dict, parse_body, parse_measure, to_plain,
                        validate)
from .smooth import DensityProfile, SmoothOptions, second_derivative, solve_smooth

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 2, 3
SUBCOMMANDS = ("measure", "volume", "solve", "solve-normalized", "solve-smooth", "verify",
               "sweep-rectangles", "ball-roots")

log = logging.getLogger("gmink")


@dataclass
class CommandSpec:
    subcommand: str
    input_path: Optional[str] = "-"
    output_path: str = "-"
    format: str = "json"
    seed: int = 0
    overrides: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gmink", description="Gaussian Minkowski problem toolkit")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("input", nargs="?", default=None, help="input JSON path or '-' for stdin")
        s.add_argument("-o", "--output", default="-", help="output path or '-' for stdout")
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--residual-tol", type=float, default=None)
        if name == "volume":
            s.add_argument("--mc-samples", type=int, default=0)
            s.add_argument("--seed", type=int, default=0)
        if name in ("solve", "solve-normalized", "solve-smooth"):
            s.add_argument("--force", action="store_true")
        if name == "solve-normalized":
            s.add_argument("--alpha", type=float, default=None)
        if name == "verify":
            s.add_argument("--suite", choices=ineq.SUITES, default=None)
        if name == "sweep-rectangles":
            s.add_argument("--mu1", type=float, default=None)
            s.add_argument("--mu2", type=float, default=None)
            s.add_argument("--grid", type=int, default=None)
        if name == "ball-roots":
            s.add_argument("--c", type=float, default=None)
            s.add_argument("--n", type=int, default=None)
    return p


def thread_count() -> int:
    raw = os.environ.get("GMINK_THREADS", "0")
    try:
        k = int(raw)
    except ValueError as exc:
        raise InputError(f"GMINK_THREADS must be an integer, got {raw!r}") from exc
    if k < 0:
        raise InputError("GMINK_THREADS must be >= 0")
    return k or (os.cpu_count() or 1)


def ordered_map(fn, items):
    """``map`` over a thread pool capped by GMINK_THREADS; results keep input order."""
    k = thread_count()
    if k == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


# ----------------------------------------------------------------------------
# I/O


def _read(path: Optional[str]):
    if path is None or path == "-":
        return loads(sys.stdin.read())
    try:
        with open(path) as fh:
            return loads(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(x) for x in r])
    return buf.getvalue()


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def emit_report(report: dict, fmt: str, path: str, csv_text: Optional[str] = None) -> None:
    text = canonical_json(report) if fmt == "json" else (csv_text if csv_text is not None
                                                         else _generic_csv(report))
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _generic_csv(report: dict) -> str:
    # flat key/value listing for reports without a natural table
    rows = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else k, obj[k])
        elif isinstance(obj, list):
            for i, v in enumerate(obj):
                walk(f"{prefix}[{i}]", v)
        else:
            rows.append((prefix, obj))

    walk("", to_plain(report))
    return _csv(rows, ["key", "value"])


# ----------------------------------------------------------------------------
# commands


def _solution_dict(body: HBody) -> dict:
    P = wulff_shape(body)
    out = {"directions": body.directions, "support": body.support}
    if isinstance(P, Polytope2):
        out["vertices"] = P.vertices
    elif isinstance(P, Polytope3):
        out["vertices"] = P.vertices
    return out


def _options(doc: dict, args) -> SolveOptions:
    opts = SolveOptions(**doc.get("options", {}))
    if args.residual_tol is not None:
        opts = replace(opts, residual_tol=args.residual_tol)
    if getattr(args, "force", False):
        opts = replace(opts, force=True)
    return opts


def _report_dict(rep) -> dict:
    return {"mode": rep.mode, "solution": _solution_dict(rep.solution),
            "gaussian_volume": rep.gaussian_volume, "measure_residual": rep.measure_residual,
            "branch": rep.branch_label, "converged": rep.converged,
            "stages": [{"t": s.t, "iterations": s.iterations, "residuals": s.residuals}
                       for s in rep.stages],
            "vanished_facets": rep.vanished_facets, "normalizer_c": rep.normalizer_c,
            "gamma_value": rep.gamma_value, "warnings": rep.warnings,
            "multistart": rep.multistart}


def _failure_dict(exc: NumericalError) -> dict:
    best = exc.best
    info = {k: v for k, v in exc.info.items() if k not in ("stages", "history")}
    return {"error": type(exc).__name__, "message": str(exc),
            "best": None if best is None else np.asarray(best, dtype=float),
            "info": info}


def cmd_measure(args):
    body = parse_body(_read(args.input))
    body_p = wulff_shape(body) if isinstance(body, HBody) else body
    mv = facet_measures(body_p, DEFAULT_QUAD)
    rep = measure_to_dict(mv)
    if isinstance(body, HBody) and getattr(body_p, "vanished", ()):
        rep["vanished"] = [body.directions[i] for i in body_p.vanished]
    rows = [list(v) + [c] for v, c in zip(mv.directions, mv.weights)]
    header = [f"v{i}" for i in range(mv.dimension)] + ["c"]
    return EXIT_OK, rep, _csv(rows, header)


def cmd_volume(args):
    body = parse_body(_read(args.input))
    P = wulff_shape(body) if isinstance(body, HBody) else body
    rep = {"gaussian_volume": gaussian_volume(P, DEFAULT_QUAD)}
    if args.mc_samples:
        if args.mc_samples < 1000:
            raise InputError("--mc-samples must be >= 1000")
        est, se = monte_carlo_volume(P, args.mc_samples, args.seed)
        rep["monte_carlo"] = {"estimate": est, "std_error": se, "samples": args.mc_samples,
                              "seed": args.seed}
    return EXIT_OK, rep, None


def _solve(args, normalized: bool):
    doc = _read(args.input)
    validate(doc, PROBLEM_SCHEMA)
    mv = parse_measure(doc, PROBLEM_SCHEMA)
    problem = DiscreteProblem(mv)
    opts = _options(doc, args)
    if normalized:
        alpha = args.alpha if args.alpha is not None else doc.get("alpha")
        if alpha is None:
            raise InputError("alpha: required for the normalized problem")
        opts = replace(opts, alpha=alpha)
    elif doc.get("mode") == "normalized":
        raise InputError("mode: use the solve-normalized subcommand for normalized problems")
    try:
        rep = solve_normalized(problem, opts) if normalized else solve_gaussian_minkowski(problem, opts)
    except NumericalError as exc:
        return EXIT_NUMERIC, _failure_dict(exc), None
    d = _report_dict(rep)
    rows = [list(v) + [h] for v, h in zip(rep.solution.directions, rep.solution.support)]
    header = [f"v{i}" for i in range(mv.dimension)] + ["h"]
    return (EXIT_OK if rep.converged else EXIT_NUMERIC), d, _csv(rows, header)


def cmd_solve(args):
    return _solve(args, False)


def cmd_solve_normalized(args):
    return _solve(args, True)


def cmd_solve_smooth(args):
    doc = _read(args.input)
    validate(doc, SMOOTH_SCHEMA)
    if len(doc["f"]) != doc["N"]:
        raise InputError(f"f: expected N={doc['N']} samples, got {len(doc['f'])}")
    f = DensityProfile(doc["f"])
    opts = SmoothOptions(**doc.get("options", {}))
    if args.residual_tol is not None:
        opts = replace(opts, residual_tol=args.residual_tol)
    if args.force:
        opts = replace(opts, force=True)
    try:
        h, rep = solve_smooth(f, opts)
    except NumericalError as exc:
        return EXIT_NUMERIC, _failure_dict(exc), None
    out = {"h": h.values, "gamma2": rep.gamma2, "residual": rep.residual,
           "diagnostics": rep.diagnostics.as_dict(), "c0": rep.c0, "r0": rep.r0,
           "stages": rep.stages, "warnings": rep.warnings}
    rad = second_derivative(h.values) + h.values
    rows = zip(h.theta, h.values, f.values, rad)
    return EXIT_OK, out, _csv(rows, ["theta", "h", "f", "curvature_radius"])


def cmd_verify(args):
    doc = {} if args.input is None else _read(args.input)
    validate(doc, VERIFY_SCHEMA)
    suite = args.suite or doc.get("suite")
    if suite is None:
        raise InputError("suite: required (flag --suite or field 'suite')")
    if "pairs" in doc:
        pairs = [(parse_body(a), parse_body(b)) for a, b in doc["pairs"]]
        pairs = [tuple(wulff_shape(x) if isinstance(x, HBody) else x for x in p) for p in pairs]
    else:
        pairs = ineq.bundled_pairs()
    chunks = ordered_map(lambda p: ineq.run_suite(suite, [p]), pairs)
    reports = [r for c in chunks for r in c]
    min_slack = min(r.min_slack for r in reports)
    passed = min_slack >= -ineq.SLACK_TOL
    out = {"suite": suite, "n_reports": len(reports), "min_slack": min_slack, "passed": passed,
           "reports": [r.as_dict() for r in reports]}
    rows = [(i, r.name, g, l, rr, l - rr) for i, r in enumerate(reports)
            for g, l, rr in zip(r.grid, r.lhs, r.rhs)]
    return (EXIT_OK if passed else EXIT_NUMERIC), out, _csv(rows, ["pair", "name", "grid", "lhs", "rhs", "slack"])


def cmd_sweep(args):
    if args.mu1 is not None:
        doc = {"mu1": args.mu1}
        if args.mu2 is not None:
            doc["mu2"] = args.mu2
        if args.grid is not None:
            doc["grid"] = args.grid
    else:
        doc = _read(args.input)
    validate(doc, SWEEP_SCHEMA)
    res = ineq.rectangle_sweep(doc["mu1"], doc.get("grid", 200), doc.get("mu2"))
    return EXIT_OK, res.as_dict(), res.to_csv()


def cmd_ball_roots(args):
    if args.c is not None or args.n is not None:
        doc = {"c": args.c, "n": args.n if args.n is not None else 2}
    else:
        doc = _read(args.input)
    validate(doc, BALL_SCHEMA)
    r = ball_roots(doc["c"], doc["n"])
    if isinstance(r, NoSolution):
        out = {"c": r.c, "n": r.dimension, "solutions": 0, "peak_value": r.peak_value}
    else:
        out = {"c": doc["c"], "n": r.dimension, "solutions": 1 if r.is_unique else 2,
               "r_small": r.r_small, "r_large": r.r_large, "r_peak": r.r_peak}
    return EXIT_OK, out, None


COMMANDS = {"measure": cmd_measure, "volume": cmd_volume, "solve": cmd_solve,
            "solve-normalized": cmd_solve_normalized, "solve-smooth": cmd_solve_smooth,
            "verify": cmd_verify, "sweep-rectangles": cmd_sweep, "ball-roots": cmd_ball_roots}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        print(f"gmink: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        thread_count()
        code, report, csv_text = COMMANDS[args.subcommand](args)
    except (InputError, GeometryError) as exc:
        print(f"gmink: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GminkError as exc:
        print(f"gmink: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception:  # never leak other exit codes
        traceback.print_exc()
        return EXIT_NUMERIC
    try:
        emit_report(report, args.format, args.output, csv_text)
    except OSError as exc:
        print(f"gmink: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if code == EXIT_NUMERIC:
        print("gmink: numerical failure; best iterate written to the report", file=sys.stderr)
    return code


def main() -> None:
    logging.basicConfig(level=os.environ.get("GMINK_LOGLEVEL", "WARNING"))
    sys.exit(run())
