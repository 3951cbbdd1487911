"""Command line entry point: ``contact-thermo {run,verify,list}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .dynamics import IntegrationError, PreconditionError, analytic_processes
from .scenario import (
    DEFAULT_SCENARIOS,
    OC_PROCESS,
    OutputSpec,
    Scenario,
    ScenarioError,
    default_scenario,
    emit_outputs,
    load_scenario,
    run_scenario,
)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("contact_thermo")


def _override(sc: Scenario, args, out_dir) -> Scenario:
    cfg = sc.integrator
    try:
        cfg = dataclasses.replace(
            cfg,
            dt=cfg.dt if args.dt is None else args.dt,
            t_end=cfg.t_end if args.t_end is None else args.t_end)
    except ValueError as exc:
        raise ScenarioError("integrator", str(exc)) from None
    tol = sc.tol if args.tol is None else args.tol
    if not tol > 0:
        raise ScenarioError("tol", "must be positive")
    output = OutputSpec(str(out_dir) if out_dir is not None else sc.output.directory,
                        sc.output.long_format or args.long)
    return dataclasses.replace(sc, integrator=cfg, tol=tol, output=output)


def _print_report(report) -> None:
    status = "PASS" if report.passed else "FAIL"
    print(f"[{status}] {report.name} ({report.process}, {report.representation}, t_end={report.t_end:g})")
    for c in report.checks:
        mark = "ok  " if c.passed else "FAIL"
        note = f"  {c.note}" if c.note else ""
        print(f"    {mark} {c.name:<10} {c.value: .3e}  (tol {c.tol:.1e}){note}")


def _run_one(sc: Scenario) -> int:
    try:
        report = run_scenario(sc)
    except (IntegrationError, PreconditionError) as exc:
        traj = getattr(exc, "trajectory", None)
        if traj is not None and sc.output.directory:
            emit_outputs(traj, None, sc, sc.output.directory)
        print(f"[ERROR] {sc.name}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"[ERROR] {sc.name}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _print_report(report)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_run(args) -> int:
    scenarios = []
    for path in args.files:
        sc = load_scenario(path)
        out = None
        if args.output is not None:
            out = Path(args.output) / sc.name if len(args.files) > 1 else Path(args.output)
        elif sc.output.directory is None:
            out = Path("out") / sc.name
        scenarios.append(_override(sc, args, out))
    if args.jobs > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_run_one, scenarios))
    else:
        codes = [_run_one(sc) for sc in scenarios]
    return max(codes)


def cmd_verify(args) -> int:
    base = Path(args.output) if args.output else Path(tempfile.mkdtemp(prefix="contact-thermo-"))
    codes = []
    for key in DEFAULT_SCENARIOS:
        sc = _override(default_scenario(key), args, base / key)
        codes.append(_run_one(sc))
    failed = sum(c != EXIT_PASS for c in codes)
    print(f"{len(codes) - failed}/{len(codes)} built-in scenarios passed; outputs in {base}")
    return max(codes)


def cmd_list(args) -> int:
    for pid, proc in analytic_processes().items():
        print(f"{pid:<22} {proc.description}")
    print(f"{OC_PROCESS:<22} user-defined Onsager-Casimir system (J, M, E, S, beta)")
    print()
    print("built-in scenarios (contact-thermo verify): " + ", ".join(DEFAULT_SCENARIOS))
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dt", type=float, help="fixed step size")
    common.add_argument("--t-end", type=float, help="final value of the affine parameter")
    common.add_argument("--tol", type=float, help="check tolerance")
    common.add_argument("--output", help="output directory")
    common.add_argument("--long", action="store_true", help="also write long-format CSV")

    parser = argparse.ArgumentParser(prog="contact-thermo",
                                     description="Contact Hamiltonian flows of thermodynamic systems.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run scenario files")
    run.add_argument("files", nargs="+")
    run.add_argument("--jobs", type=int, default=1, help="run scenarios in parallel")
    run.set_defaults(func=cmd_run)
    verify = sub.add_parser("verify", parents=[common], help="run the built-in suite")
    verify.set_defaults(func=cmd_verify)
    lst = sub.add_parser("list", help="list catalog processes")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
