"""CSV and JSON output plus the control-file reader.

Edges are written with the labels of the problem file (1-based positions),
even when the tree was relabelled internally.  Floats use 17 significant
digits so files round-trip bit-exactly and repeated runs are byte-identical.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .mesh import BrokenLinear, Mesh, TreeFunction

SOLUTION_HEADER = ["edge", "t", "y", "u_left", "u_right"]
TRAJECTORY_HEADER = ["edge", "t", "y"]
NODAL_HEADER = ["edge", "t", "y", "u"]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def original_labels(mesh: Mesh) -> dict[int, int]:
    """Internal edge number -> label used in the problem file."""
    relabel = mesh.tree.relabel
    if not relabel:
        return {j: j for j in mesh.tree.edges}
    return {new: old for old, new in relabel.items()}


def by_label(mesh: Mesh, values: dict[int, float]) -> dict[str, float]:
    """Re-key a per-edge (or per-vertex) dict by problem-file labels."""
    labels = original_labels(mesh)
    return {str(labels[j]): v for j, v in sorted(values.items(), key=lambda kv: labels[kv[0]])}


def _prehistory_rows(mesh: Mesh, y: TreeFunction, label: int, pad: int):
    for t, v in zip(mesh.prehistory_nodes()[:-1], y.prehistory[:-1]):
        yield [str(label), fmt(t), fmt(v)] + [""] * pad


def solution_rows(mesh: Mesh, y: TreeFunction, u: BrokenLinear):
    labels = original_labels(mesh)
    yield from _prehistory_rows(mesh, y, labels[1], 2)
    for j in sorted(mesh.tree.edges, key=labels.get):
        t = mesh.nodes(j)
        N = mesh.N[j]
        for p in range(N + 1):
            ul = fmt(u.right[j][p - 1]) if p > 0 else ""
            ur = fmt(u.left[j][p]) if p < N else ""
            yield [str(labels[j]), fmt(t[p]), fmt(y.edges[j][p]), ul, ur]


def nodal_rows(mesh: Mesh, y: TreeFunction, u: BrokenLinear):
    """Node-averaged control for plotting."""
    labels = original_labels(mesh)
    for j in sorted(mesh.tree.edges, key=labels.get):
        t = mesh.nodes(j)
        N = mesh.N[j]
        for p in range(N + 1):
            sides = ([u.right[j][p - 1]] if p > 0 else []) + ([u.left[j][p]] if p < N else [])
            yield [str(labels[j]), fmt(t[p]), fmt(y.edges[j][p]), fmt(np.mean(sides))]


def trajectory_rows(mesh: Mesh, y: TreeFunction):
    labels = original_labels(mesh)
    yield from _prehistory_rows(mesh, y, labels[1], 0)
    for j in sorted(mesh.tree.edges, key=labels.get):
        for t, v in zip(mesh.nodes(j), y.edges[j]):
            yield [str(labels[j]), fmt(t), fmt(v)]


def write_csv(path: str | Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path: str | Path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def read_control(path: str | Path, mesh: Mesh) -> BrokenLinear:
    """Read ``edge,t,u_left,u_right`` rows (extra columns ignored) into a control.

    Rows with ``t < 0`` are prehistory and skipped.  Every edge must list all
    of its ``N_j + 1`` nodes.
    """
    labels = original_labels(mesh)
    internal = {lab: j for j, lab in labels.items()}
    rows: dict[int, list[tuple[float, str, str]]] = {j: [] for j in mesh.tree.edges}
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"edge", "t", "u_left", "u_right"} - set(reader.fieldnames or [])
            if missing:
                raise ValidationError(f"{path}: missing columns {sorted(missing)}")
            for line, rec in enumerate(reader, start=2):
                try:
                    edge, t = int(rec["edge"]), float(rec["t"])
                except ValueError:
                    raise ValidationError(f"{path}:{line}: bad edge or t value") from None
                if edge not in internal:
                    raise ValidationError(f"{path}:{line}: unknown edge {edge}")
                if t < 0:
                    continue
                rows[internal[edge]].append((t, rec["u_left"], rec["u_right"]))
    except OSError as exc:
        raise ValidationError(f"cannot read control file {path}: {exc.strerror}") from None

    left, right = {}, {}
    for j, recs in rows.items():
        N = mesh.N[j]
        if len(recs) != N + 1:
            raise ValidationError(f"{path}: edge {labels[j]} has {len(recs)} nodes, mesh needs {N + 1}")
        recs.sort(key=lambda r: r[0])
        try:
            left[j] = np.array([float(r[2]) for r in recs[:N]])
            right[j] = np.array([float(r[1]) for r in recs[1:]])
        except ValueError:
            raise ValidationError(f"{path}: edge {labels[j]} has non-numeric control values") from None
    return BrokenLinear(left, right)
