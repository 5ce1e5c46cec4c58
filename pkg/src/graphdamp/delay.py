"""The delay operator, its adjoint-side advance operator and vertex couplings.

On edge ``j`` the controlled state obeys

    y_j'(t) + b_j y_j(t) + c_j y_j(t - tau) = u_j(t),

where for ``t < tau`` the delayed value is read from the parent edge's last
``tau`` window (or from the prehistory on the root edge).  For piecewise
linear ``y`` on an aligned mesh this expression is exactly element-wise
linear, so it is stored as a :class:`BrokenLinear`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import MeshError, ValidationError
from .mesh import BrokenLinear, Mesh, TreeFunction
from .tree import RootedTree


def _exact_poly(coeffs: Sequence[float], t: Fraction) -> float:
    acc = Fraction(0)
    for a in reversed(coeffs):
        acc = acc * t + Fraction(a)
    return float(acc)


@dataclass(frozen=True)
class Prehistory:
    """State on ``[-tau, 0]``: a polynomial (ascending coefficients) or nodal samples."""

    kind: str
    coeffs: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("polynomial", "samples"):
            raise ValidationError(f"unknown prehistory kind {self.kind!r}")
        if self.kind == "polynomial" and not self.coeffs:
            raise ValidationError("polynomial prehistory needs at least one coefficient")
        if self.kind == "samples" and len(self.values) < 2:
            raise ValidationError("sampled prehistory needs at least two values")

    @classmethod
    def polynomial(cls, *coeffs: float) -> "Prehistory":
        return cls("polynomial", coeffs=tuple(float(a) for a in coeffs))

    @classmethod
    def constant(cls, value: float) -> "Prehistory":
        return cls.polynomial(value)

    @classmethod
    def samples(cls, values: Sequence[float]) -> "Prehistory":
        return cls("samples", values=tuple(float(v) for v in values))

    def sample(self, mesh: Mesh) -> np.ndarray:
        """Nodal values at ``-tau, -tau + h, ..., 0``."""
        n = mesh.n_tau
        if self.kind == "samples":
            if len(self.values) != n + 1:
                raise ValidationError(
                    f"sampled prehistory has {len(self.values)} values, mesh needs tau_units*refine+1 = {n + 1}")
            return np.array(self.values)
        h = Fraction(mesh.unit) / mesh.refine
        return np.array([_exact_poly(self.coeffs, h * (i - n)) for i in range(n + 1)])

    def at_zero(self) -> float:
        return self.values[-1] if self.kind == "samples" else self.coeffs[0]


@dataclass(frozen=True)
class DelaySystem:
    tree: RootedTree
    tau: float
    b: Mapping[int, float]
    c: Mapping[int, float]
    phi: Prehistory = field(default_factory=lambda: Prehistory.constant(0.0))

    def __post_init__(self):
        edges = set(self.tree.edges)
        if set(self.b) != edges or set(self.c) != edges:
            raise ValidationError("coefficients b and c must be given for every edge")
        if not self.tau > 0:
            raise ValidationError("delay must be positive")
        for j in self.tree.edges:
            if not self.tau < self.tree.lengths[j]:
                raise ValidationError(f"delay must be shorter than every edge (edge {j})")

    @classmethod
    def create(cls, tree: RootedTree, tau, b: Sequence[float], c: Sequence[float],
               phi: Prehistory | None = None) -> "DelaySystem":
        """Convenience constructor taking coefficient lists ordered by edge."""
        if len(b) != tree.m or len(c) != tree.m:
            raise ValidationError(f"expected {tree.m} coefficients per family")
        return cls(tree, tau, dict(zip(tree.edges, map(float, b))), dict(zip(tree.edges, map(float, c))),
                   phi or Prehistory.constant(0.0))

    def with_coefficients(self, b=0.0, c=0.0) -> "DelaySystem":
        return replace(self, b={j: float(b) for j in self.tree.edges}, c={j: float(c) for j in self.tree.edges})

    def with_prehistory(self, phi: Prehistory) -> "DelaySystem":
        return replace(self, phi=phi)

    def check_mesh(self, mesh: Mesh) -> None:
        if mesh.tree is not self.tree and mesh.tree != self.tree:
            raise MeshError("mesh was built for a different tree")
        if abs(mesh.tau - float(self.tau)) > 1e-12 * float(self.tau):
            raise MeshError(f"delay {float(self.tau)} is not n_tau*h = {mesh.tau}")


def delayed_columns(mesh: Mesh, j: int, q: np.ndarray) -> np.ndarray:
    """Raw-vector column of node ``q`` on edge ``j``; negative ``q`` reaches into the past."""
    q = np.asarray(q)
    own = mesh.raw_offset[j] + q
    if j == 1:
        past = q + mesh.n_tau
    else:
        k = mesh.tree.parent[j]
        past = mesh.raw_offset[k] + mesh.N[k] + q
    return np.where(q >= 0, own, past)


def ell_matrix(sys: DelaySystem, mesh: Mesh) -> sp.csr_matrix:
    """Sparse map from raw nodal values to interleaved element endpoint values of the delay operator."""
    sys.check_mesh(mesh)
    h, n = mesh.h, mesh.n_tau
    rows, cols, vals = [], [], []
    for j in mesh.tree.edges:
        N = mesh.N[j]
        p = np.arange(N)
        r = 2 * (mesh.elem_offset[j] + p)
        lo = mesh.raw_offset[j] + p
        for row, node, q in ((r, lo, p - n), (r + 1, lo + 1, p + 1 - n)):
            rows += [row, row, row, row]
            cols += [lo, lo + 1, node, delayed_columns(mesh, j, q)]
            vals += [np.full(N, -1.0 / h), np.full(N, 1.0 / h),
                     np.full(N, sys.b[j]), np.full(N, sys.c[j])]
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * mesh.n_elem, mesh.n_raw),
    )


def apply_ell(sys: DelaySystem, mesh: Mesh, y: TreeFunction) -> BrokenLinear:
    mesh.check(y)
    return mesh.from_elements(ell_matrix(sys, mesh) @ mesh.to_raw(y))


def apply_ell_tilde(sys: DelaySystem, mesh: Mesh, w: BrokenLinear) -> BrokenLinear:
    """Advance operator: ``c_j w_j(t + tau)`` and, on the last window of an
    internal edge, the sum of ``c_nu w_nu(t + tau - T_j)`` over its children."""
    mesh.check_broken(w)
    tree, n = mesh.tree, mesh.n_tau
    left, right = {}, {}
    for j in tree.edges:
        N = mesh.N[j]
        lj, rj = np.zeros(N), np.zeros(N)
        lj[:N - n] = sys.c[j] * w.left[j][n:]
        rj[:N - n] = sys.c[j] * w.right[j][n:]
        if not tree.is_boundary_edge(j):
            for nu in tree.children(j):
                lj[N - n:] += sys.c[nu] * w.left[nu][:n]
                rj[N - n:] += sys.c[nu] * w.right[nu][:n]
        left[j], right[j] = lj, rj
    return BrokenLinear(left, right)


def vertex_coupling(sys: DelaySystem) -> dict[int, tuple[float, float]]:
    """``(beta_j, gamma_j)`` for every internal vertex ``j``."""
    tree = sys.tree
    out = {}
    for j in tree.internal:
        kids = tree.children(j)
        out[j] = (sys.b[j] - sum(sys.b[nu] for nu in kids), sys.c[j] - sum(sys.c[nu] for nu in kids))
    return out
