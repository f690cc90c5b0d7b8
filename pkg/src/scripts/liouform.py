#!/usr/bin/env python
"""Command-line front end: derive, sweep, integrate and verify.

Exit codes: 0 success, 1 invalid input, 2 verification failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from src.config import CSV_FLOAT_FORMAT, DEFAULT_SEED, DEFAULT_TOL, OUTPUT_DIR
from src.core.derivation import SYMPLECTIC, classify, kernel_basis, report_to_dict
from src.core.errors import InvalidSpecError, SingularityError, SolverFailureError
from src.core.forms import (
    VALID_FAMILIES,
    FormFamilySpec,
    form_to_dict,
    load_form_spec,
    make_family_form,
    parse_angle,
    s_parameter,
)
from src.diagnostics.sweeps import (
    classify_abc_plane,
    sample_abc,
    sweep_records_to_frame,
    sweep_s_lines,
    sweep_theta_phi,
)
from src.diagnostics.verification import run_verification, verification_report
from src.dynamics.integrator import (
    SchemeSpec,
    SolverOptions,
    euler_scheme,
    explicit_euler_scheme,
    identity_scheme,
    integrate,
    midpoint_scheme,
    scheme_from_form,
    trajectory_to_frame,
)
from src.dynamics.systems import VALID_SYSTEMS, builtin_system

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFY_FAILED = 2
EXIT_SOLVER_FAILED = 3

SWEEP_FAMILIES = {
    "theta_phi": "theta_phi",
    "abc_family": "abc_family",
    "abc": "abc_family",
    "s_lines": "s_lines",
}
NAMED_SCHEMES = ("midpoint", "euler", "explicit_euler", "identity")

# Sweep options, keyed by argparse dest: (flag, families it applies to, default)
SWEEP_OPTIONS: dict[str, tuple[str, tuple[str, ...], Any]] = {
    "start": ("--from", ("theta_phi",), 0.0),
    "stop": ("--to", ("theta_phi",), math.pi / 2),
    "points": ("--points", ("theta_phi",), 1001),
    "samples": ("--samples", ("abc_family",), 1000),
    "seed": ("--seed", ("abc_family",), DEFAULT_SEED),
    "plane_fraction": ("--plane-fraction", ("abc_family",), 0.5),
    "s_values": ("--s-values", ("s_lines",), [k / 10 for k in range(-10, 11)]),
    "beta_values": ("--beta-values", ("s_lines",), [-1.0, -0.5, 0.0, 0.5, 1.0]),
}

# Options whose values may start with a minus sign, e.g. --z0 -1,0.5 or --from -pi/2
SIGNED_OPTIONS = frozenset({
    "--z0", "--alpha", "--beta", "--gamma", "--phi", "--from", "--to",
    "--s-values", "--beta-values",
})


def _vector(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from exc


def _angle(text: str) -> float:
    try:
        return parse_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _join_signed_values(argv: list[str]) -> list[str]:
    """Rewrite `--z0 -1,0.5` as `--z0=-1,0.5` so argparse does not read the value as a flag."""
    joined = []
    i = 0
    while i < len(argv):
        token = argv[i]
        value = argv[i + 1] if i + 1 < len(argv) else ""
        if token in SIGNED_OPTIONS and value.startswith("-") and not value.startswith("--"):
            joined.append(f"{token}={value}")
            i += 2
        else:
            joined.append(token)
            i += 1
    return joined


def _resolve_output(path: str | None) -> Path | None:
    if path is None:
        return None
    out = Path(path)
    # Bare file names land in LIOUFORM_OUTPUT_DIR
    if not out.is_absolute() and out.parent == Path("."):
        out = OUTPUT_DIR / out
    out.parent.mkdir(parents=True, exist_ok=True)
    return out


def _emit(text: str, path: str | None) -> Path | None:
    out = _resolve_output(path)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")
    return out


def _frame_text(frame: pd.DataFrame, fmt: str, header: str | None = None) -> str:
    if fmt == "json":
        return frame.to_json(orient="records", double_precision=15) + "\n"
    body = frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return f"# {header}\n{body}" if header else body


def _form_spec(args: argparse.Namespace) -> FormFamilySpec:
    """Form from --form (a JSON file or a family name) or --family plus parameter flags."""
    source = args.form or args.family
    if source is None:
        raise ValueError("one of --family or --form is required")
    if source.endswith(".json") or Path(source).is_file():
        return load_form_spec(source)
    params: dict[str, Any] = {}
    if args.phi is not None:
        params["phi"] = args.phi
    for key in ("alpha", "beta", "gamma"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    family = SWEEP_FAMILIES.get(source, source)
    if family not in VALID_FAMILIES:
        raise ValueError(f"family must be one of {VALID_FAMILIES}, got '{source}'")
    return FormFamilySpec(family, args.n, params)


def cmd_derive(args: argparse.Namespace) -> int:
    """Derive the implicit map of one form and write its report as JSON."""
    spec = _form_spec(args)
    form = make_family_form(spec, args.tol)
    report = classify(form, args.tol)
    data = report_to_dict(report, len(kernel_basis(form, args.tol)))
    data["family"] = form.family
    data["form"] = form_to_dict(form)
    if form.family in ("abc_family", "abc_plane") and report.verdict == SYMPLECTIC:
        data["s"] = s_parameter(form.params["alpha"], form.params["beta"]).tolist()
    out = _emit(json.dumps(data, indent=2) + "\n", args.output)
    if out is not None:
        print(f"{form.family} (n={form.n}): {report.verdict}, saved report to {out}")
    return EXIT_OK


def _sweep_options(args: argparse.Namespace, family: str) -> dict[str, Any]:
    """Fill sweep defaults, rejecting options given for a family they do not apply to."""
    options = {}
    for dest, (flag, families, default) in SWEEP_OPTIONS.items():
        value = getattr(args, dest)
        if value is not None and family not in families:
            raise ValueError(f"{flag} does not apply to --family {args.family}")
        options[dest] = default if value is None else value
    return options


def cmd_sweep(args: argparse.Namespace) -> int:
    """Sweep theta_phi over an angle range, classify random abc samples or walk s-lines."""
    family = SWEEP_FAMILIES[args.family]
    opts = _sweep_options(args, family)
    seed = None
    if family == "theta_phi":
        if opts["points"] < 1:
            raise ValueError(f"--points must be at least 1, got {opts['points']}")
        if opts["start"] > opts["stop"]:
            raise ValueError(f"--from ({opts['start']}) must not exceed --to ({opts['stop']})")
        grid = np.linspace(opts["start"], opts["stop"], opts["points"])
        records = sweep_theta_phi(args.n, grid, args.tol, args.threads, debug=args.debug)
    elif family == "abc_family":
        seed = opts["seed"]
        samples = sample_abc(args.n, opts["samples"], seed, plane_fraction=opts["plane_fraction"])
        records = classify_abc_plane(args.n, samples, args.tol, args.threads, debug=args.debug)
    else:
        records = sweep_s_lines(args.n, opts["s_values"], opts["beta_values"], args.tol,
                                args.threads)

    frame = sweep_records_to_frame(records)
    header = None
    if seed is not None:
        if args.format == "json":
            frame.insert(0, "seed", seed)
        header = f"seed={seed}"
    out = _emit(_frame_text(frame, args.format, header), args.output)
    if out is not None:
        print(f"Saved {len(frame)} rows to {out}")
    return EXIT_OK


def _scheme(args: argparse.Namespace, n: int) -> SchemeSpec:
    if args.scheme and args.form:
        raise ValueError("give either --scheme or --form, not both")
    if args.form:
        spec = _form_spec(args)
        if spec.n != n:
            spec = FormFamilySpec(spec.family, n, spec.params)
        return scheme_from_form(make_family_form(spec, args.tol))
    name = args.scheme or "midpoint"
    if name == "midpoint":
        return midpoint_scheme(n)
    if name == "euler":
        return euler_scheme(n, args.phi if args.phi is not None else 0.0)
    if name == "explicit_euler":
        return explicit_euler_scheme(n)
    return identity_scheme(n)


def cmd_integrate(args: argparse.Namespace) -> int:
    """Integrate one trajectory and write it as CSV (partial on solver failure)."""
    z0 = np.asarray(args.z0, dtype=float)
    if z0.size == 0 or z0.size % 2 != 0:
        raise ValueError(f"--z0 must have an even number of entries, got {z0.size}")
    n = z0.size // 2
    if args.n is not None and args.n != n:
        raise ValueError(f"--z0 has length {z0.size} but --n is {args.n}")
    args.n = n
    params = json.loads(args.system_params) if args.system_params else None
    if params is not None and not isinstance(params, dict):
        raise InvalidSpecError(f"--system-params must be a JSON object, got {args.system_params}")
    system = builtin_system(args.system, n, params)
    scheme = _scheme(args, n)
    opts = SolverOptions(method=args.method)

    try:
        traj = integrate(scheme, system, z0, args.h, args.steps, opts, debug=args.debug)
    except (SolverFailureError, SingularityError) as exc:
        if exc.trajectory is None:
            raise
        _emit(_frame_text(trajectory_to_frame(exc.trajectory), args.format), args.output)
        print(f"Error: {exc} (kept {len(exc.trajectory)} states)", file=sys.stderr)
        return EXIT_SOLVER_FAILED

    frame = trajectory_to_frame(traj)
    out = _emit(_frame_text(frame, args.format), args.output)
    if out is not None:
        print(f"Saved {len(frame)} rows to {out} ({scheme.label} on {system.name})")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """Run the verification suite; exit 0 only when every item passes."""
    items = run_verification(args.only, args.tol, args.seed, debug=args.debug)
    for item in items:
        status = "PASS" if item.passed else "FAIL"
        print(f"[{status}] {item.name}: {item.detail}")
    if args.output:
        _emit(json.dumps(verification_report(items), indent=2) + "\n", args.output)
    passed = sum(item.passed for item in items)
    print(f"{passed}/{len(items)} items passed")
    return EXIT_OK if passed == len(items) else EXIT_VERIFY_FAILED


class _Parser(argparse.ArgumentParser):
    """Usage errors count as invalid input (exit 1), not the argparse default 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INVALID)


def _add_form_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--form", help="Form specification JSON file or family name")
    parser.add_argument("--phi", type=_angle, help="Rotation angle in radians, e.g. 0.3 or pi/4")
    parser.add_argument("--alpha", type=_vector, help="Comma-separated alpha_i")
    parser.add_argument("--beta", type=_vector, help="Comma-separated beta_i")
    parser.add_argument("--gamma", type=_vector, help="Comma-separated gamma_i")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="liouform",
        description="Derive and test integrators from constant-coefficient Liouvillian forms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help=f"Classification tolerance (default: {DEFAULT_TOL})")
    common.add_argument("--output", help="Output file (default: stdout)")
    common.add_argument("--debug", action="store_true", help="Enable debug output")

    derive = sub.add_parser("derive", parents=[common], help="Classify one form")
    derive.add_argument("--family", help=f"One of {VALID_FAMILIES}")
    derive.add_argument("--n", type=int, default=1, help="Degrees of freedom (default: 1)")
    _add_form_args(derive)
    derive.set_defaults(handler=cmd_derive)

    sweep = sub.add_parser("sweep", parents=[common], help="Sweep a form family")
    sweep.add_argument("--family", required=True, choices=sorted(SWEEP_FAMILIES))
    sweep.add_argument("--n", type=int, default=1, help="Degrees of freedom (default: 1)")
    sweep.add_argument("--from", dest="start", type=_angle,
                       help="theta_phi: first angle (default: 0)")
    sweep.add_argument("--to", dest="stop", type=_angle,
                       help="theta_phi: last angle (default: pi/2)")
    sweep.add_argument("--points", type=int, help="theta_phi: grid size (default: 1001)")
    sweep.add_argument("--samples", type=int, help="abc: random samples (default: 1000)")
    sweep.add_argument("--seed", type=int,
                       help=f"abc: sampling seed (default: {DEFAULT_SEED})")
    sweep.add_argument("--plane-fraction", type=float,
                       help="abc: share of samples placed on beta + gamma = 0 (default: 0.5)")
    sweep.add_argument("--s-values", type=_vector,
                       help="s_lines: comma-separated s values (default: -1 to 1 by 0.1)")
    sweep.add_argument("--beta-values", type=_vector,
                       help="s_lines: comma-separated beta values (default: -1,-0.5,0,0.5,1)")
    sweep.add_argument("--threads", type=int, help="Worker cap (default: LIOUFORM_THREADS)")
    sweep.add_argument("--format", choices=["csv", "json"], default="csv")
    sweep.set_defaults(handler=cmd_sweep)

    run = sub.add_parser("integrate", parents=[common], help="Integrate a trajectory")
    run.add_argument("--system", required=True, choices=VALID_SYSTEMS)
    run.add_argument("--system-params", help='JSON object, e.g. \'{"mu": 1.0}\'')
    run.add_argument("--scheme", choices=NAMED_SCHEMES,
                     help="Named scheme (default: midpoint); euler uses --phi 0 or pi/2")
    run.add_argument("--family", help="Form family, same as --form with a family name")
    run.add_argument("--n", type=int, help="Degrees of freedom (default: len(z0)/2)")
    _add_form_args(run)
    run.add_argument("--z0", type=_vector, required=True, help="Initial state q1..qn,p1..pn")
    run.add_argument("--h", type=float, required=True, help="Step size")
    run.add_argument("--steps", type=int, required=True, help="Number of steps")
    run.add_argument("--method", choices=["fixed_point", "newton"], default="fixed_point")
    run.add_argument("--format", choices=["csv", "json"], default="csv")
    run.set_defaults(handler=cmd_integrate)

    verify = sub.add_parser("verify", parents=[common], help="Run the verification suite")
    verify.add_argument("--only", nargs="+", help="Item names to run (default: all)")
    verify.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"Seed (default: {DEFAULT_SEED})")
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_signed_values(sys.argv[1:] if argv is None else argv))
    if args.command == "integrate" and args.family and not args.form:
        args.form = args.family
    if args.command == "derive" and args.family and args.form:
        parser.error("give either --family or --form, not both")
    try:
        return args.handler(args)
    except (ValueError, json.JSONDecodeError, OSError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverFailureError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAILED


if __name__ == "__main__":
    sys.exit(main())
