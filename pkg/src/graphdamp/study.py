"""Refinement studies and the full diagnostic report for one solve."""
from __future__ import annotations

import numpy as np

from .checks import constraint_residuals, kirchhoff_residual, strong_residual, weak_residual, weak_residual_scale
from .delay import DelaySystem
from .mesh import Mesh, TreeFunction
from .problem import ProblemSpec
from .results import by_label
from .simulate import simulate, verify_damping
from .solver import SolveResult, solve_bvp


def diagnostics(sys: DelaySystem, mesh: Mesh, result: SolveResult) -> dict:
    """Everything ``report.json`` carries about one solution."""
    y = result.y
    replay = simulate(sys, mesh, result.u)
    round_trip = max(float(np.max(np.abs(replay.edges[j] - y.edges[j]))) for j in mesh.tree.edges)
    return {
        "J": result.J,
        "h": mesh.h,
        "refine": mesh.refine,
        "n_free": mesh.n_free,
        "weak_residual": weak_residual(sys, mesh, y),
        "weak_residual_scale": weak_residual_scale(sys, mesh, y),
        "kirchhoff_residual": by_label(mesh, kirchhoff_residual(sys, mesh, y)),
        "strong_residual": by_label(mesh, strong_residual(sys, mesh, y)),
        "constraints": constraint_residuals(sys, mesh, y),
        "damping": by_label(mesh, verify_damping(replay, mesh)),
        "simulation_round_trip": round_trip,
        "gram_condition_hint": result.gram_condition_hint,
        "solver": result.solver_stats,
        "relabel": {str(k): v for k, v in mesh.tree.relabel.items()},
    }


def successive_difference(coarse: Mesh, y_coarse: TreeFunction, y_fine: TreeFunction) -> float:
    """Max nodal difference on the coarse nodes (fine mesh is one halving finer)."""
    return max(float(np.max(np.abs(y_coarse.edges[j] - y_fine.edges[j][::2]))) for j in coarse.tree.edges)


def convergence_study(spec: ProblemSpec, refine: int = 1, levels: int = 4) -> dict:
    """Solve at ``refine * 2**k`` for ``k < levels`` and collect per-level diagnostics."""
    rows, prev = [], None
    for k in range(levels):
        sys, mesh = spec.build(refine * 2 ** k)
        res = solve_bvp(sys, mesh)
        kir = kirchhoff_residual(sys, mesh, res.y)
        row = {
            "refine": mesh.refine,
            "h": mesh.h,
            "n_free": mesh.n_free,
            "J": res.J,
            "kirchhoff_residual": by_label(mesh, kir),
            "kirchhoff_max": max(kir.values(), default=0.0),
            "strong_residual": by_label(mesh, strong_residual(sys, mesh, res.y)),
        }
        if prev is not None:
            row["successive_difference"] = successive_difference(prev[0], prev[1], res.y)
        rows.append(row)
        prev = (mesh, res.y)

    diffs = [r["successive_difference"] for r in rows[1:]]
    kmax = [r["kirchhoff_max"] for r in rows]
    return {
        "levels": rows,
        "successive_differences": diffs,
        "difference_ratios": [b / a for a, b in zip(diffs, diffs[1:]) if a > 0],
        "differences_decreasing": all(b < a for a, b in zip(diffs, diffs[1:])),
        "kirchhoff_decreasing": all(b < a for a, b in zip(kmax, kmax[1:])),
    }
