"""Brute-force reference minimiser.

Works only through :func:`oracle_energy`, which evaluates the delay
operator at element endpoints by direct nodal look-ups and integrates its
square with Simpson's rule.  Because the energy is exactly quadratic in the
free nodal values, central differences with unit step recover its gradient
and Hessian up to rounding, and one dense solve gives the minimiser.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .delay import DelaySystem
from .errors import OracleError
from .mesh import Mesh, TreeFunction

MAX_FREE = 2000


def _element_energies(sys: DelaySystem, mesh: Mesh, y: TreeFunction) -> np.ndarray:
    tree, h, n = mesh.tree, mesh.h, mesh.n_tau
    chunks = []
    for j in tree.edges:
        yj = y.edges[j]
        if j == 1:
            before = y.prehistory[:n]
        else:
            k = tree.parent[j]
            before = y.edges[k][-n - 1:-1]

        def value_at(q, yj=yj, before=before):
            # node q of edge j, q >= -n
            return np.where(q >= 0, yj[np.maximum(q, 0)], before[np.minimum(q + n, n - 1)])

        p = np.arange(mesh.N[j])
        slope = (yj[p + 1] - yj[p]) / h
        wl = slope + sys.b[j] * yj[p] + sys.c[j] * value_at(p - n)
        wr = slope + sys.b[j] * yj[p + 1] + sys.c[j] * value_at(p + 1 - n)
        wm = 0.5 * (wl + wr)
        chunks.append(h / 6.0 * (wl * wl + 4.0 * wm * wm + wr * wr))
    return np.concatenate(chunks)


def oracle_energy(sys: DelaySystem, mesh: Mesh, y: TreeFunction) -> float:
    mesh.check(y)
    return float(np.sum(_element_energies(sys, mesh, y)))


def fixed_values(sys: DelaySystem, mesh: Mesh) -> TreeFunction:
    """Prehistory samples, ``phi(0)`` at the root and zero on every other node."""
    y = mesh.zeros()
    y.prehistory = sys.phi.sample(mesh)
    y.edges[1][0] = y.prehistory[-1]
    return y


class _Prober:
    def __init__(self, sys: DelaySystem, mesh: Mesh, base: TreeFunction):
        self.sys, self.mesh, self.base = sys, mesh, base

    def __call__(self, *terms: tuple[int, float]) -> np.ndarray:
        y = self.base.copy()
        for i, s in terms:
            for j, idx in self.mesh.dof.items():
                y.edges[j][idx == i] += s
        return _element_energies(self.sys, self.mesh, y)


def oracle_derivatives(sys: DelaySystem, mesh: Mesh) -> tuple[float, np.ndarray, np.ndarray]:
    """``(J0, g, H)`` of ``x -> J(fixed_values + scatter(x))`` at ``x = 0``."""
    sys.check_mesh(mesh)
    nf = mesh.n_free
    if nf > MAX_FREE:
        raise OracleError(f"oracle limited to desk scale (n_free={nf} > {MAX_FREE})")
    probe = _Prober(sys, mesh, fixed_values(sys, mesh))
    zero_probe = _Prober(sys, mesh, mesh.zeros())

    J0 = float(np.sum(probe()))
    g = np.empty(nf)
    support = []
    for i in range(nf):
        g[i] = np.sum(probe((i, 1.0)) - probe((i, -1.0))) / 2.0
        support.append(np.flatnonzero(zero_probe((i, 1.0))))

    # entries whose probes share no element vanish identically
    rows = np.concatenate(support) if support else np.zeros(0, dtype=int)
    cols = np.repeat(np.arange(nf), [s.size for s in support])
    incidence = sp.csc_matrix((np.ones(rows.size), (rows, cols)), shape=(mesh.n_elem, nf))
    overlap = sp.triu(incidence.T @ incidence).tocoo()

    H = np.zeros((nf, nf))
    for i, k in zip(overlap.row, overlap.col):
        H[i, k] = H[k, i] = hessian_entry(probe, i, k)
    return J0, g, H


def hessian_entry(probe, i: int, k: int) -> float:
    e = probe((i, 1.0), (k, 1.0)) - probe((i, 1.0), (k, -1.0)) - probe((i, -1.0), (k, 1.0)) + probe((i, -1.0), (k, -1.0))
    return float(np.sum(e) / 4.0)


def oracle_solve(sys: DelaySystem, mesh: Mesh) -> TreeFunction:
    J0, g, H = oracle_derivatives(sys, mesh)
    if g.size == 0:
        return fixed_values(sys, mesh)
    try:
        factor = la.cho_factor(H)
    except la.LinAlgError:
        raise OracleError("oracle detected non-coercive discretization") from None
    x = la.cho_solve(factor, -g)
    return fixed_values(sys, mesh) + mesh.scatter(x)
