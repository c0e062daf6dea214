"""Command-line front end.

Exit codes: 0 success, 1 an asserted verification check failed, 2 bad
input (malformed file, invalid arguments), 3 physics invariant violated
(non-PSD, trace not one, numerical fault), 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .correlations import CorrelationReport, NumericalFault, quantum_correlations
from .distances import DISTANCES, get_distance
from .optimize import OptimizerConfig
from .state_space import (
    InvalidStateError,
    StateFileError,
    make_bell_diagonal,
    make_isotropic,
    make_werner,
    random_density,
    state_from_json,
    state_to_json,
)
from .verify import DEFAULT_SAMPLES, SUITES, run_suite

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_PHYSICS, EXIT_IO = 0, 1, 2, 3, 4

CLI_DISTANCES = [d.cli_name for d in DISTANCES.values()]

# family -> (parameter name, constructor taking (value, dims))
FAMILIES = {
    "werner": ("z", lambda v, dims: make_werner(v)),
    "bell_diagonal": ("p", lambda v, dims: make_bell_diagonal(v)),
    "isotropic": ("F", lambda v, dims: make_isotropic(v, dims[0])),
}

FIXED_COLUMNS = ["state_id", "param", "distance", "total", "classical", "quantum"]


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dimensions must look like 2x2, got {text!r}") from None
    if len(dims) < 2 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"dimensions must look like 2x2, got {text!r}")
    return dims


def csv_header(dim_a: int) -> list[str]:
    """Sweep/compute CSV columns; one ``theta_k`` per measurement parameter."""
    thetas = [f"theta_{k}" for k in range(dim_a * (dim_a - 1))]
    return FIXED_COLUMNS + thetas + ["restarts_used", "converged"]


def csv_row(report: CorrelationReport, param="") -> list:
    return ([report.state_id, param, get_distance(report.distance).cli_name,
             repr(report.total), repr(report.classical), repr(report.quantum)]
            + [repr(float(t)) for t in report.best_params]
            + [report.optimizer.restarts_used, int(report.optimizer.converged)])


def _write_csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc


def _config(args) -> OptimizerConfig:
    if args.restarts < 1:
        raise CliError(f"--restarts must be >= 1, got {args.restarts}", EXIT_INPUT)
    return OptimizerConfig(restarts=args.restarts, seed=args.seed)


# --- commands ---------------------------------------------------------------

def cmd_compute(args) -> int:
    try:
        text = Path(args.state).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {args.state}: {exc}", EXIT_IO) from exc
    try:
        rho = state_from_json(text)
    except InvalidStateError as exc:
        raise CliError(f"invalid state: {exc} (residual {exc.residual:.3e})", EXIT_PHYSICS) from exc
    except StateFileError as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc
    report = quantum_correlations(args.distance, rho, _config(args), state_id=Path(args.state).stem)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.format == "csv":
        text = _write_csv([csv_row(report)], csv_header(rho.dim_a))
    else:
        text = report.to_json() + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _sweep_point(task):
    family, dims, value, distance, restarts, seed, state_id = task
    rho = FAMILIES[family][1](value, dims)
    cfg = OptimizerConfig(restarts=restarts, seed=seed)
    return quantum_correlations(distance, rho, cfg, state_id=state_id)


def cmd_sweep(args) -> int:
    param_name = FAMILIES[args.family][0]
    if args.param is not None and args.param != param_name:
        raise CliError(f"family {args.family} is parametrized by {param_name!r}, "
                       f"not {args.param!r}", EXIT_INPUT)
    if args.steps < 2:
        raise CliError(f"--steps must be >= 2, got {args.steps}", EXIT_INPUT)
    if not args.start < args.stop:
        raise CliError(f"--from must be smaller than --to (got {args.start} and {args.stop})",
                       EXIT_INPUT)
    if not (0.0 <= args.start and args.stop <= 1.0):
        raise CliError(f"{param_name} must lie in [0, 1]", EXIT_INPUT)
    dims = args.dims or (2, 2)
    if args.family != "isotropic" and dims[:2] != (2, 2):
        raise CliError(f"family {args.family} is two-qubit only", EXIT_INPUT)
    _config(args)
    distances = args.distance or ["relative-entropy"]
    values = np.linspace(args.start, args.stop, args.steps)
    tasks = [(args.family, dims, float(v), dist, args.restarts, args.seed,
              f"{args.family}-{i:03d}")
             for i, v in enumerate(values) for dist in distances]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            reports = list(pool.map(_sweep_point, tasks))
    else:
        reports = [_sweep_point(t) for t in tasks]
    rows = [csv_row(rep, repr(t[2])) for t, rep in zip(tasks, reports)]
    _emit(_write_csv(rows, csv_header(dims[0])), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    suite = args.suite_pos or args.suite
    if suite is None:
        raise CliError("choose a suite: " + ", ".join(SUITES), EXIT_INPUT)
    if suite not in SUITES:
        raise CliError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}", EXIT_INPUT)
    samples = DEFAULT_SAMPLES[suite] if args.samples is None else args.samples
    if samples < 1:
        raise CliError("--samples must be >= 1", EXIT_INPUT)
    dims = args.dims
    if dims is not None:
        want = 3 if suite == "prop6" else 2
        if len(dims) != want:
            raise CliError(f"suite {suite} needs {want} dimensions", EXIT_INPUT)
    _config(args)
    results = run_suite(suite, samples, args.seed, args.distance, dims, args.restarts)
    passed = all(r.passed for r in results)
    payload = {
        "suite": suite,
        "seed": args.seed,
        "samples": samples,
        "passed": passed,
        "results": [r.as_dict() for r in results],
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    for r in results:
        for c in r.checks:
            if c.verdict == "fail":
                print(f"FAIL {r.distance} {c.name}: {c.violations}/{c.samples} "
                      f"worst residual {c.worst_residual:.3e}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_random(args) -> int:
    dims = args.dims or (2, 2)
    if len(dims) != 2:
        raise CliError("random states are bipartite: use --dims AxB", EXIT_INPUT)
    n = dims[0] * dims[1]
    rank = n if args.rank is None else args.rank
    if not 1 <= rank <= n:
        raise CliError(f"rank must lie in [1, {n}] for dims {dims[0]}x{dims[1]}, got {rank}",
                       EXIT_INPUT)
    rho = random_density(dims, rank, seed=args.seed)
    _emit(state_to_json(rho), args.out)
    return EXIT_OK


# --- parser -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distcorr", description="Distance-based correlation measures.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def optimizer_flags(p):
        p.add_argument("--restarts", type=int, default=20, help="random restarts (default 20)")
        p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")

    p = sub.add_parser("compute", help="correlation report for one state file")
    p.add_argument("--state", required=True)
    p.add_argument("--distance", choices=CLI_DISTANCES, default="relative-entropy")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    optimizer_flags(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("sweep", help="CSV of reports along a one-parameter family")
    p.add_argument("--family", choices=list(FAMILIES), required=True)
    p.add_argument("--param", help="parameter name (z, p or F); checked against the family")
    p.add_argument("--from", dest="start", type=float, default=0.0)
    p.add_argument("--to", dest="stop", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--distance", choices=CLI_DISTANCES, action="append",
                   help="repeat for several distances (default relative-entropy)")
    p.add_argument("--dims", type=parse_dims, help="dxd for the isotropic family")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--out")
    optimizer_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run a property verification suite")
    p.add_argument("suite_pos", nargs="?", metavar="SUITE", choices=list(SUITES))
    p.add_argument("--suite", choices=list(SUITES))
    p.add_argument("--samples", type=int)
    p.add_argument("--dims", type=parse_dims, help="AxB, or AxBxE for prop6")
    p.add_argument("--distance", choices=CLI_DISTANCES, action="append",
                   help="restrict to these distances (default all)")
    p.add_argument("--out")
    optimizer_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("random", help="write a Ginibre random state file")
    p.add_argument("--dims", type=parse_dims)
    p.add_argument("--rank", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_random)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except NumericalFault as exc:
        print(f"error: numerical fault: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
