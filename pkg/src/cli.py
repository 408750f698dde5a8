"""
Command line: solve, check, list, history.
Run with: python -m src.cli solve TP1 --format table

Exit codes: 0 ApproxKKT, 1 usage/IO/parse error, 2 SingularStationary, 3 InfeasibleStationary,
4 IterationLimit, 5 StepFailure, 6 derivative check failed.
"""
import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional

from src.catalog import describe, get_problem_names, lookup_problem
from src.db import Database
from src.errors import (
    ConfigError,
    DerivativeCheckError,
    ModelDomainError,
    ModelSyntaxError,
    ProblemShapeError,
    UnknownProblemError,
)
from src.model_text import load_model
from src.models import SolveReport, SolveStatus
from src.problem import ProblemModel, check_derivatives
from src.report import format_number, render
from src.settings import Config, SolverConfig, reference_for
from src.solver import outer_solve

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_CHECK_FAILED = 6
FORMATS = ("table", "csv", "json")


# ---------- Helpers ----------
def resolve_target(target: str) -> ProblemModel:
    """Catalog name, or a path to a text model (anything with a suffix or an existing file)."""
    path = Path(target)
    if path.suffix or path.exists():
        return load_model(path)
    return lookup_problem(target)


def build_config(args) -> SolverConfig:
    return SolverConfig.from_env().with_overrides(
        mu0=args.mu0,
        tau0=args.tau0,
        eps=args.eps,
        max_total_iters=args.max_iter,
        xi=args.xi,
        tau_factor=args.tau_factor,
        monitor=True if args.monitor else None,
    )


def _record(report: SolveReport, cfg: SolverConfig, db_path: Optional[str]):
    path = db_path or (Config.DB_PATH if Config.RECORD_RUNS else None)
    if not path:
        return
    db = Database(path)
    try:
        run_id = db.save_run(report, asdict(cfg))
        logger.info("stored run %d for %s in %s", run_id, report.problem, path)
    finally:
        db.close()


# ---------- Commands ----------
def cmd_solve(args) -> int:
    cfg = build_config(args)
    if args.all:
        return _solve_all(cfg, args)
    if not args.target:
        print("solve: a problem name or model file is required (or --all)", file=sys.stderr)
        return EXIT_USAGE
    problem = resolve_target(args.target)
    report = outer_solve(problem, cfg)
    print(render(report, args.format))
    _record(report, cfg, args.db)
    return report.exit_code


def _solve_all(cfg: SolverConfig, args) -> int:
    names = get_problem_names()
    with ThreadPoolExecutor(max_workers=max(1, Config.BATCH_WORKERS)) as pool:
        reports = list(pool.map(lambda name: outer_solve(lookup_problem(name), cfg), names))

    for report in reports:
        _record(report, cfg, args.db)

    if args.format == "json":
        print(json.dumps([r.to_dict() for r in reports], indent=2, allow_nan=False))
    else:
        for report in reports:
            ref = reference_for(report.problem) or {}
            print(f"{report.problem:<6} {report.status.value:<20} f={format_number(report.f):>12} "
                  f"ref={format_number(ref.get('f')):>10} iters={report.iters:>4} "
                  f"(ref {format_number(ref.get('iter'))}) nf={report.nf} ng={report.ng}")

    bad = [r.exit_code for r in reports
           if r.status in (SolveStatus.ITERATION_LIMIT, SolveStatus.STEP_FAILURE)]
    return max(bad) if bad else 0


def cmd_check(args) -> int:
    problem = resolve_target(args.target)
    x = problem.standard_start
    try:
        result = check_derivatives(problem, x, args.h)
    except (DerivativeCheckError, ModelDomainError) as exc:
        print(f"check {problem.name}: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    for block, err in result.to_dict().items():
        print(f"{problem.name} {block:<7} max rel error {err:.3e}")
    ok = result.passed(args.tol)
    print(f"{problem.name}: {'ok' if ok else 'FAILED'} (tol {args.tol:g}, h {args.h:g})")
    return 0 if ok else EXIT_CHECK_FAILED


def cmd_list(args) -> int:
    needle = (args.filter or "").upper()
    for name in get_problem_names():
        if needle and needle not in name:
            continue
        problem = lookup_problem(name)
        ref = reference_for(name) or {}
        extra = f"  f*={format_number(ref['f'])}" if "f" in ref else ""
        print(f"{describe(problem)}{extra}")
    return 0


def cmd_history(args) -> int:
    path = args.db or Config.DB_PATH
    if not Path(path).exists():
        print(f"no run history at {path}", file=sys.stderr)
        return EXIT_USAGE
    db = Database(path)
    try:
        if args.run is not None:
            rows = db.get_iterations(args.run)
            if not rows:
                print(f"no run {args.run}", file=sys.stderr)
                return EXIT_USAGE
            for r in rows:
                print("  ".join(format_number(r[c]) for c in ("l", "f", "v", "r_inf", "g_inf", "mu", "tau", "k")))
            return 0
        for run in db.get_runs(args.problem, args.limit):
            print(f"#{run['id']:<4} {run['ts'][:19]}  {run['problem']:<6} {run['status']:<20} "
                  f"f={format_number(run['f'])} iters={run['iters']} nf={run['nf']} ng={run['ng']}")
    finally:
        db.close()
    return 0


# ---------- Parser ----------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iprelax", description="Interior-point relaxation NLP solver")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a catalog problem or a model file")
    solve.add_argument("target", nargs="?", help="catalog name (e.g. TP1) or path to a .mod file")
    solve.add_argument("--all", action="store_true", help="solve every catalog problem concurrently")
    solve.add_argument("--format", choices=FORMATS, default=Config.DEFAULT_FORMAT
                       if Config.DEFAULT_FORMAT in FORMATS else "table")
    solve.add_argument("--mu0", type=float)
    solve.add_argument("--tau0", type=float)
    solve.add_argument("--eps", type=float)
    solve.add_argument("--max-iter", dest="max_iter", type=int)
    solve.add_argument("--xi", type=float)
    solve.add_argument("--tau-factor", dest="tau_factor", type=float)
    solve.add_argument("--monitor", action="store_true", help="record invariant violations")
    solve.add_argument("--db", help="store the run in this SQLite file")
    solve.set_defaults(func=cmd_solve)

    check = sub.add_parser("check", help="compare analytic derivatives with central differences")
    check.add_argument("target")
    check.add_argument("--h", type=float, default=1e-6, help="difference step")
    check.add_argument("--tol", type=float, default=1e-5, help="max relative error")
    check.set_defaults(func=cmd_check)

    lst = sub.add_parser("list", help="list catalog problems")
    lst.add_argument("--filter", default="")
    lst.set_defaults(func=cmd_list)

    hist = sub.add_parser("history", help="show stored runs")
    hist.add_argument("--db")
    hist.add_argument("--problem")
    hist.add_argument("--limit", type=int, default=20)
    hist.add_argument("--run", type=int, help="print the iteration rows of one run")
    hist.set_defaults(func=cmd_history)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0

    level = {0: Config.LOG_LEVEL, 1: "INFO"}.get(args.verbose, "DEBUG")
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UnknownProblemError, OSError, ModelSyntaxError, ConfigError, ProblemShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
