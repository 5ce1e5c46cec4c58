"""``graphdamp`` command-line driver.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 tolerance
breach in the ``check`` and ``oracle`` gates.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .checks import constraint_residuals
from .errors import NumericalError, ValidationError
from .oracle import oracle_energy, oracle_solve
from .problem import parse_problem
from .results import (NODAL_HEADER, SOLUTION_HEADER, TRAJECTORY_HEADER, by_label, nodal_rows, read_control,
                      solution_rows, trajectory_rows, write_csv, write_json)
from .simulate import simulate, verify_damping
from .solver import solve_bvp
from .study import convergence_study, diagnostics

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_TOLERANCE = 0, 1, 2, 3


def _solve(args):
    spec = parse_problem(args.problem)
    sys_, mesh = spec.build(args.refine)
    t0 = time.perf_counter()
    result = solve_bvp(sys_, mesh)
    return sys_, mesh, result, time.perf_counter() - t0


def _write_solution(out: Path, mesh, result, resample):
    write_csv(out / "solution.csv", SOLUTION_HEADER, solution_rows(mesh, result.y, result.u))
    if resample == "nodal":
        write_csv(out / "solution_nodal.csv", NODAL_HEADER, nodal_rows(mesh, result.y, result.u))


def cmd_solve(args) -> int:
    sys_, mesh, result, elapsed = _solve(args)
    report = diagnostics(sys_, mesh, result)
    report["timings"] = {"solve_seconds": elapsed}
    _write_solution(args.out, mesh, result, args.resample)
    write_json(args.out / "report.json", report)
    print(f"J = {result.J:.17g}  (n_free={mesh.n_free}, h={mesh.h:g})")
    return EXIT_OK


def cmd_check(args) -> int:
    sys_, mesh, result, elapsed = _solve(args)
    report = diagnostics(sys_, mesh, result)
    tol = args.tol if args.tol is not None else 1e-10
    gates = {
        "weak_residual": report["weak_residual"] <= tol * report["weak_residual_scale"],
        "constraints": max(report["constraints"].values()) <= 1e-12,
        "damping": max(report["damping"].values()) <= tol,
        "simulation_round_trip": report["simulation_round_trip"] <= tol,
    }
    report["gates"] = gates
    report["tol"] = tol
    report["timings"] = {"solve_seconds": elapsed}
    _write_solution(args.out, mesh, result, args.resample)
    write_json(args.out / "report.json", report)
    for name, ok in gates.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if all(gates.values()) else EXIT_TOLERANCE


def cmd_oracle(args) -> int:
    sys_, mesh, result, _ = _solve(args)
    t0 = time.perf_counter()
    y_oracle = oracle_solve(sys_, mesh)
    elapsed = time.perf_counter() - t0
    diff = max(float(np.max(np.abs(y_oracle.edges[j] - result.y.edges[j]))) for j in mesh.tree.edges)
    J_oracle = oracle_energy(sys_, mesh, y_oracle)
    dJ = abs(J_oracle - result.J)
    tol = args.tol if args.tol is not None else 1e-8
    ok = diff <= tol and dJ <= 1e-10 * (1 + result.J)
    report = {
        "J_galerkin": result.J,
        "J_oracle": J_oracle,
        "J_difference": dJ,
        "max_nodal_difference": diff,
        "oracle_constraints": constraint_residuals(sys_, mesh, y_oracle),
        "n_free": mesh.n_free,
        "h": mesh.h,
        "tol": tol,
        "pass": ok,
        "timings": {"oracle_seconds": elapsed},
    }
    write_json(args.out / "oracle.json", report)
    print(f"{'PASS' if ok else 'FAIL'}  max|y_galerkin - y_oracle| = {diff:.3e}, |dJ| = {dJ:.3e}")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_simulate(args) -> int:
    spec = parse_problem(args.problem)
    sys_, mesh = spec.build(args.refine)
    control = args.control or (args.out / "solution.csv")
    u = read_control(control, mesh)
    y = simulate(sys_, mesh, u)
    write_csv(args.out / "trajectory.csv", TRAJECTORY_HEADER, trajectory_rows(mesh, y))
    damping = by_label(mesh, verify_damping(y, mesh))
    write_json(args.out / "damping.json", {"damping": damping, "h": mesh.h, "refine": mesh.refine})
    print("max |y| on target windows: " + ", ".join(f"e{k}={v:.3e}" for k, v in damping.items()))
    return EXIT_OK


def cmd_convergence(args) -> int:
    spec = parse_problem(args.problem)
    report = convergence_study(spec, args.refine, args.levels)
    write_json(args.out / "convergence.json", report)
    for row in report["levels"]:
        diff = row.get("successive_difference")
        print(f"refine={row['refine']:<4d} J={row['J']:.12g}  kirchhoff={row['kirchhoff_max']:.3e}"
              + (f"  |y_h - y_h/2|={diff:.3e}" if diff is not None else ""))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "check": cmd_check,
    "oracle": cmd_oracle,
    "convergence": cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphdamp", description="Minimum-energy damping of delay systems on trees")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--problem", required=True, type=Path)
    parser.add_argument("--refine", type=int, default=1)
    parser.add_argument("--out", type=Path, default=Path("."))
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--levels", type=int, default=4)
    parser.add_argument("--resample", choices=["nodal"], default=None)
    parser.add_argument("--control", type=Path, default=None,
                        help="control CSV for 'simulate' (default: OUT/solution.csv)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.refine < 1 or args.levels < 1:
        print("error: --refine and --levels must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
