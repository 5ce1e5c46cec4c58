"""Delay-commensurate uniform grids on a rooted tree.

Every edge length and the delay are integer multiples of a common ``unit``;
with ``refine`` sub-steps per unit the delay is exactly ``n_tau`` grid steps,
so shifting by the delay maps grid nodes onto grid nodes.

Two vector layouts are used throughout:

* *free* vectors: one entry per unknown of the constrained space (functions
  vanishing on the prehistory, continuous at internal vertices and zero on
  the target windows of boundary edges);
* *raw* vectors: every stored nodal value, i.e. the prehistory samples on
  ``[-tau, 0]`` followed by the nodes ``0..N_j`` of each edge in turn.  Shared
  vertex values appear once per incident edge here.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import MeshError
from .tree import RootedTree

FIXED = -1
MAX_NODES = 20_000_000


@dataclass
class TreeFunction:
    """Continuous piecewise-linear function on the extended tree.

    ``edges[j]`` holds the ``N_j + 1`` nodal values of edge ``j``;
    ``prehistory`` holds the ``n_tau + 1`` samples at ``-tau, ..., 0``.
    """

    edges: dict[int, np.ndarray]
    prehistory: np.ndarray

    def _combine(self, other: "TreeFunction", op) -> "TreeFunction":
        return TreeFunction(
            {j: op(v, other.edges[j]) for j, v in self.edges.items()},
            op(self.prehistory, other.prehistory),
        )

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, alpha: float):
        return TreeFunction({j: alpha * v for j, v in self.edges.items()}, alpha * self.prehistory)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def max_abs(self, include_prehistory: bool = True) -> float:
        vals = [np.max(np.abs(v)) for v in self.edges.values()]
        if include_prehistory:
            vals.append(np.max(np.abs(self.prehistory)))
        return float(max(vals))

    def copy(self) -> "TreeFunction":
        return TreeFunction({j: v.copy() for j, v in self.edges.items()}, self.prehistory.copy())


@dataclass
class BrokenLinear:
    """Element-wise linear function, possibly discontinuous at nodes.

    On element ``p`` of edge ``j`` (the interval ``[p h, (p+1) h]``) the
    function runs linearly from ``left[j][p]`` to ``right[j][p]``.
    """

    left: dict[int, np.ndarray]
    right: dict[int, np.ndarray]

    def means(self, j: int) -> np.ndarray:
        return 0.5 * (self.left[j] + self.right[j])

    def __add__(self, other: "BrokenLinear") -> "BrokenLinear":
        return BrokenLinear(
            {j: v + other.left[j] for j, v in self.left.items()},
            {j: v + other.right[j] for j, v in self.right.items()},
        )

    def __mul__(self, alpha: float) -> "BrokenLinear":
        return BrokenLinear(
            {j: alpha * v for j, v in self.left.items()},
            {j: alpha * v for j, v in self.right.items()},
        )

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(max(max(np.max(np.abs(self.left[j])), np.max(np.abs(self.right[j]))) for j in self.left))


class Mesh:
    """Uniform grid per edge plus the global map of free unknowns.

    ``dof[j][i]`` is the global free index of node ``i`` on edge ``j`` or
    :data:`FIXED`.  The terminal node of edge ``k`` and node 0 of each child
    share one index.
    """

    def __init__(self, tree: RootedTree, tau_units: int, length_units: Sequence[int] | Mapping[int, int],
                 unit: float = 1.0, refine: int = 1):
        if isinstance(length_units, Mapping):
            length_units = [length_units[j] for j in tree.edges]
        length_units = [int(n) for n in length_units]
        if len(length_units) != tree.m:
            raise MeshError(f"expected {tree.m} edge lengths, got {len(length_units)}")
        if int(tau_units) != tau_units or tau_units < 1:
            raise MeshError("tau_units must be a positive integer")
        if int(refine) != refine or refine < 1:
            raise MeshError("refine must be a positive integer")
        if not unit > 0:
            raise MeshError("unit must be positive")
        for j, n in zip(tree.edges, length_units):
            if n <= tau_units:
                raise MeshError(f"delay must be shorter than every edge (edge {j}: {n} <= {tau_units} units)")
        if (sum(length_units) + tau_units) * refine > MAX_NODES:
            raise MeshError("mesh too fine")

        self.tree = tree
        self.unit = float(unit)
        self.refine = int(refine)
        self.tau_units = int(tau_units)
        self.length_units = dict(zip(tree.edges, length_units))
        self.h = self.unit / self.refine
        self.n_tau = self.tau_units * self.refine
        self.N = {j: n * self.refine for j, n in self.length_units.items()}

        self._number_dofs()
        self._layout()

    # ------------------------------------------------------------------
    def _number_dofs(self):
        tree, n = self.tree, self.n_tau
        dof: dict[int, np.ndarray] = {}
        vertex_dof: dict[int, int] = {}
        count = 0
        for j in tree.bfs_order():
            N = self.N[j]
            idx = np.full(N + 1, FIXED, dtype=np.int64)
            if j != 1:
                idx[0] = vertex_dof[tree.parent[j]]
            last_free = N - n - 1 if tree.is_boundary_edge(j) else N - 1
            if last_free >= 1:
                idx[1:last_free + 1] = np.arange(count, count + last_free)
                count += last_free
            if not tree.is_boundary_edge(j):
                vertex_dof[j] = count
                idx[N] = count
                count += 1
            dof[j] = idx
        self.dof = dof
        self.vertex_dof = vertex_dof
        self.n_free = count

    def _layout(self):
        offset = self.n_tau + 1
        self.raw_offset: dict[int, int] = {}
        self.elem_offset: dict[int, int] = {}
        e = 0
        for j in self.tree.edges:
            self.raw_offset[j] = offset
            self.elem_offset[j] = e
            offset += self.N[j] + 1
            e += self.N[j]
        self.n_raw = offset
        self.n_elem = e

    # ------------------------------------------------------------------
    @property
    def tau(self) -> float:
        return self.n_tau * self.h

    def nodes(self, j: int) -> np.ndarray:
        return self.h * np.arange(self.N[j] + 1)

    def prehistory_nodes(self) -> np.ndarray:
        return self.h * np.arange(-self.n_tau, 1)

    def target_window(self, j: int) -> slice:
        """Node slice covering ``[T_j - tau, T_j]`` on a boundary edge."""
        return slice(self.N[j] - self.n_tau, self.N[j] + 1)

    def zeros(self) -> TreeFunction:
        return TreeFunction({j: np.zeros(self.N[j] + 1) for j in self.tree.edges}, np.zeros(self.n_tau + 1))

    def check(self, y: TreeFunction) -> None:
        if set(y.edges) != set(self.tree.edges):
            raise MeshError("function edges do not match the mesh")
        for j in self.tree.edges:
            if y.edges[j].shape != (self.N[j] + 1,):
                raise MeshError(f"edge {j}: expected {self.N[j] + 1} nodal values, got {y.edges[j].shape}")
        if y.prehistory.shape != (self.n_tau + 1,):
            raise MeshError(f"prehistory: expected {self.n_tau + 1} samples, got {y.prehistory.shape}")

    def check_broken(self, w: BrokenLinear) -> None:
        for j in self.tree.edges:
            if w.left[j].shape != (self.N[j],) or w.right[j].shape != (self.N[j],):
                raise MeshError(f"edge {j}: expected {self.N[j]} elements")

    def scatter(self, x: np.ndarray) -> TreeFunction:
        """Free vector -> tree function (zero on every fixed node)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_free,):
            raise MeshError(f"expected {self.n_free} free values, got {x.shape}")
        padded = np.append(x, 0.0)
        return TreeFunction({j: padded[idx] for j, idx in self.dof.items()}, np.zeros(self.n_tau + 1))

    def gather(self, y: TreeFunction) -> np.ndarray:
        x = np.zeros(self.n_free)
        for j in self.tree.bfs_order():
            idx = self.dof[j]
            free = idx != FIXED
            x[idx[free]] = y.edges[j][free]
        return x

    def to_raw(self, y: TreeFunction) -> np.ndarray:
        return np.concatenate([y.prehistory] + [y.edges[j] for j in self.tree.edges])

    def from_raw(self, v: np.ndarray) -> TreeFunction:
        edges = {j: v[o:o + self.N[j] + 1].copy() for j, o in self.raw_offset.items()}
        return TreeFunction(edges, v[:self.n_tau + 1].copy())

    def to_elements(self, w: BrokenLinear) -> np.ndarray:
        """Interleaved ``[left_0, right_0, left_1, ...]`` over all elements."""
        out = np.empty(2 * self.n_elem)
        for j, e in self.elem_offset.items():
            out[2 * e:2 * (e + self.N[j]):2] = w.left[j]
            out[2 * e + 1:2 * (e + self.N[j]):2] = w.right[j]
        return out

    def from_elements(self, v: np.ndarray) -> BrokenLinear:
        left, right = {}, {}
        for j, e in self.elem_offset.items():
            left[j] = v[2 * e:2 * (e + self.N[j]):2].copy()
            right[j] = v[2 * e + 1:2 * (e + self.N[j]):2].copy()
        return BrokenLinear(left, right)

    def scatter_matrix(self) -> sp.csr_matrix:
        """Sparse ``n_raw x n_free`` matrix with ``to_raw(scatter(x)) == S @ x``."""
        rows, cols = [], []
        for j, idx in self.dof.items():
            free = np.flatnonzero(idx != FIXED)
            rows.append(self.raw_offset[j] + free)
            cols.append(idx[free])
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        return sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(self.n_raw, self.n_free))

    def __repr__(self):
        return f"Mesh(m={self.tree.m}, h={self.h:g}, n_tau={self.n_tau}, n_free={self.n_free})"


def build_mesh(tree: RootedTree, tau_units: int, length_units, unit: float = 1.0, refine: int = 1) -> Mesh:
    return Mesh(tree, tau_units, length_units, unit=unit, refine=refine)
