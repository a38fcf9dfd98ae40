"""Command-line front end.

Exit codes: 0 success or check passed, 1 check ran and failed, 2 usage,
parse or validation error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .checker import DEFAULT_TOL, check_binary_tree, check_three_arc
from .recovery import RecoveryError, degrees_of_freedom, recover_parameters
from .simulator import simulate_design
from .transforms import AdmissibilityError, ScalingParams, apply_transform, solve_scaling
from .tree_model import SbtopParams, predict, validate_params

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
MODE_NAMES = {"nonneg": "nonnegative", "unrestricted": "unrestricted"}

PARAM_ROWS = [("pA", "pA(i)"), ("pB", "pB(i)"), ("pC", "pC"), ("pD", "pD"), ("pE", "pE(j)"),
              ("pF", "pF(j)"), ("tA", "tA(i)"), ("tB", "tB(i)"), ("tC", "tC"), ("tD", "tD"),
              ("tE", "tE(j)"), ("tF", "tF(j)")]


class CliError(Exception):
    pass


def _fmt(v) -> str:
    return f"{v:.4f}"


def params_table(*columns: tuple[str, SbtopParams]) -> str:
    """Parameter-name rows, one value column per (label, params) pair; vectors expand by level."""
    header = ["parameter"] + [label for label, _ in columns]
    lines = []
    first = columns[0][1]
    for attr, label in PARAM_ROWS:
        value = getattr(first, attr)
        if np.ndim(value) == 0:
            lines.append([label] + [_fmt(getattr(p, attr)) for _, p in columns])
        else:
            for idx in range(np.size(value)):
                lines.append([label.replace("(i)", f"({idx})").replace("(j)", f"({idx})")]
                             + [_fmt(getattr(p, attr)[idx]) for _, p in columns])
    return _render([header] + lines)


def matrix_table(name: str, matrix) -> str:
    matrix = np.asarray(matrix, dtype=float)
    header = [name] + [f"j={j}" for j in range(matrix.shape[1])]
    rows = [[f"i={i}"] + ["nan" if np.isnan(v) else _fmt(v) for v in row] for i, row in enumerate(matrix)]
    return _render([header] + rows)


def _render(rows) -> str:
    widths = [max(len(str(r[c])) for r in rows) for c in range(len(rows[0]))]
    return "\n".join("  ".join(str(cell).rjust(w) for cell, w in zip(r, widths)) for r in rows)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text + "\n")
    else:
        print(text)


def _load_params(path: str, mode: str | None) -> SbtopParams:
    try:
        params = io.load_params(path)
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        raise CliError(f"cannot read parameters from {path}: {exc}") from exc
    if mode:
        params = params.replace(measure_mode=MODE_NAMES[mode])
    problems = validate_params(params)
    if problems:
        raise CliError(f"invalid parameters in {path}:\n  " + "\n  ".join(problems))
    return params


def _load_data(paths: list[str]):
    try:
        return io.load_data(paths)
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        raise CliError(f"cannot read data: {exc}") from exc


def _write_data(data, args) -> None:
    if args.format == "json":
        _emit(io.dumps(data.to_dict()), args.output)
    elif args.format == "csv":
        if not args.output:
            raise CliError("--format csv needs --output PREFIX (writes PREFIX_P.csv, PREFIX_T.csv, PREFIX_Tw.csv)")
        io.save_data_csv(args.output, data)
    else:
        _emit("\n\n".join(matrix_table(n, getattr(data, n)) for n in ("P", "T", "Tw")), args.output)


def cmd_predict(args) -> int:
    params = _load_params(args.params, args.mode)
    try:
        data = predict(params)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _write_data(data, args)
    return EXIT_OK


def cmd_check(args) -> int:
    data = _load_data(args.data)
    check = check_three_arc if args.theorem5 else check_binary_tree
    try:
        report = check(data, tol=args.tol)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.format == "table":
        lines = [f"conditions: {report.conditions}", f"k: {report.k}", f"h: {report.h}", f"n: {report.n}"]
        for name, value in report.residuals.items():
            lines.append(f"{name}: residual {value:.3e}  {'pass' if report.verdicts.get(name) else 'FAIL'}")
        lines += [f"failure: {msg}" for msg in report.failures]
        lines.append("PASS" if report.passed else "FAIL")
        _emit("\n".join(lines), args.output)
    else:
        _emit(io.dumps(report.to_dict()), args.output)
    return EXIT_OK if report.passed else EXIT_FAIL


def _load_scaling(path: str) -> ScalingParams:
    try:
        return ScalingParams.from_dict(io.load_json(path))
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        raise CliError(f"cannot read scaling from {path}: {exc}") from exc


def cmd_transform(args) -> int:
    params = _load_params(args.params, args.mode)
    scaling = _load_scaling(args.scaling)
    try:
        new = apply_transform(params, scaling, strict=not args.lenient)
    except AdmissibilityError as exc:
        raise CliError(str(exc)) from exc
    if args.format == "table":
        _emit(params_table(("old", params), ("new", new)), args.output)
    else:
        _emit(io.dumps(new.to_dict()), args.output)
    return EXIT_OK


def cmd_solve_scaling(args) -> int:
    old = _load_params(args.old, args.mode)
    new = _load_params(args.new, args.mode)
    try:
        scaling = solve_scaling(old, new, tol=args.tol)
    except AdmissibilityError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    _emit(io.dumps(scaling.to_dict()), args.output)
    return EXIT_OK


def cmd_recover(args) -> int:
    data = _load_data(args.data)
    try:
        report = check_binary_tree(data, tol=args.tol)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if not report.passed:
        print("data do not satisfy the binary-tree conditions:", file=sys.stderr)
        print(io.dumps(report.to_dict()), file=sys.stderr)
        return EXIT_FAIL
    try:
        model = recover_parameters(data, report, mode=MODE_NAMES[args.mode or "nonneg"])
    except RecoveryError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    if args.format == "table":
        _emit(params_table(("recovered", model.params)), args.output)
    else:
        _emit(io.dumps(model.to_dict()), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = _load_params(args.params, args.mode)
    emp = simulate_design(params, n_trials_per_cell=args.n, seed=args.seed,
                          n_partitions=args.partitions, workers=args.workers)
    if args.format == "json":
        payload = emp.to_dict()
        payload["standard_errors"] = {k: v.tolist() for k, v in emp.standard_errors().items()}
        _emit(io.dumps(payload), args.output)
    else:
        _write_data(emp.to_data_triple(), args)
    return EXIT_OK


def cmd_dof(args) -> int:
    try:
        print(degrees_of_freedom(args.I, args.J))
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    return EXIT_OK


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbtop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "csv", "table"), mode=True):
        p.add_argument("--format", choices=formats, default="json")
        p.add_argument("-o", "--output", help="output file (prefix for csv)")
        if mode:
            p.add_argument("--mode", choices=sorted(MODE_NAMES), help="measure mode override")

    p = sub.add_parser("predict", help="predicted P, T, Tw from parameters")
    p.add_argument("params")
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("check", help="test data against the tree conditions")
    p.add_argument("data", nargs="+", help="one JSON file, or three CSV files P T Tw")
    p.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)
    p.add_argument("--theorem5", action="store_true", help="use the three-arc tree conditions")
    common(p, formats=("json", "table"), mode=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("transform", help="apply an admissible scaling")
    p.add_argument("params")
    p.add_argument("scaling")
    p.add_argument("--lenient", action="store_true",
                   help="set measures on zero-probability Psi arcs to 0 instead of failing")
    common(p, formats=("json", "table"))
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("solve-scaling", help="scaling linking two parameter sets")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--tol", type=_positive_float, default=1e-9)
    common(p, formats=("json",))
    p.set_defaults(func=cmd_solve_scaling)

    p = sub.add_parser("recover", help="parameters in canonical gauge from data")
    p.add_argument("data", nargs="+")
    p.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)
    common(p, formats=("json", "table"))
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("simulate", help="Monte Carlo trials from parameters")
    p.add_argument("params")
    p.add_argument("--n", type=int, default=10_000, help="trials per cell")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--partitions", type=int, default=1)
    p.add_argument("--workers", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dof", help="degrees of freedom for an I x J design")
    p.add_argument("--I", type=int, required=True)
    p.add_argument("--J", type=int, required=True)
    p.set_defaults(func=cmd_dof)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
