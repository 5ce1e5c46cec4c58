"""Residual diagnostics for a computed state.

Optimality of the minimiser is equivalent to a second-order delay-advance
boundary value problem: the Euler-Lagrange equations on each edge, the
continuity/prehistory/target constraints, and a Kirchhoff-type flux balance
at every internal vertex.  These functions measure how well a given state
satisfies each piece.
"""
from __future__ import annotations

import numpy as np

from .delay import DelaySystem, apply_ell, apply_ell_tilde, vertex_coupling
from .mesh import Mesh, TreeFunction
from .solver import assemble_system


def weak_residual(sys: DelaySystem, mesh: Mesh, y: TreeFunction) -> float:
    """``max_i |B(y, e_i)|`` over the free hat functions."""
    return float(np.max(np.abs(weak_residual_vector(sys, mesh, y)), initial=0.0))


def weak_residual_vector(sys: DelaySystem, mesh: Mesh, y: TreeFunction) -> np.ndarray:
    mesh.check(y)
    a = assemble_system(sys, mesh)
    w = a.ell @ mesh.to_raw(y)
    return np.asarray(a.ell_free.T @ (a.mass @ w)).ravel()


def weak_residual_scale(sys: DelaySystem, mesh: Mesh, y: TreeFunction) -> float:
    """Cauchy-Schwarz bound ``sqrt(B(y,y) * max_i B(e_i,e_i))`` for ``|B(y, e_i)|``; at least 1."""
    a = assemble_system(sys, mesh)
    w = a.ell @ mesh.to_raw(y)
    J = float(w @ (a.mass @ w))
    diag = a.gram.diagonal()
    return max(1.0, float(np.sqrt(J * diag.max())) if diag.size else 0.0)


def _slope_end(v: np.ndarray, h: float) -> float:
    if v.size < 3:
        return (v[-1] - v[-2]) / h
    return (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)


def _slope_start(v: np.ndarray, h: float) -> float:
    if v.size < 3:
        return (v[1] - v[0]) / h
    return (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)


def one_sided_slopes(mesh: Mesh, y: TreeFunction, j: int) -> tuple[float, dict[int, float]]:
    """Second-order one-sided slopes at internal vertex ``j``: incoming ``y_j'(T_j)``
    and outgoing ``y_nu'(0)`` for each child.

    A child stencil never reaches past ``T_nu - tau`` on a boundary edge (the
    state has a kink there).
    """
    tree, h = mesh.tree, mesh.h
    incoming = _slope_end(y.edges[j], h)
    outgoing = {}
    for nu in tree.children(j):
        stop = mesh.N[nu] - mesh.n_tau if tree.is_boundary_edge(nu) else mesh.N[nu]
        outgoing[nu] = _slope_start(y.edges[nu][:stop + 1], h)
    return incoming, outgoing


def kirchhoff_residual(sys: DelaySystem, mesh: Mesh, y: TreeFunction) -> dict[int, float]:
    mesh.check(y)
    coupling = vertex_coupling(sys)
    out = {}
    for j in mesh.tree.internal:
        beta, gamma = coupling[j]
        incoming, outgoing = one_sided_slopes(mesh, y, j)
        N = mesh.N[j]
        r = incoming - sum(outgoing.values()) + beta * y.edges[j][N] + gamma * y.edges[j][N - mesh.n_tau]
        out[j] = float(abs(r))
    return out


def strong_residual(sys: DelaySystem, mesh: Mesh, y: TreeFunction) -> dict[int, float]:
    """Root-mean-square of ``-(l_j y)' + b_j l_j y + ltilde_j y`` at element midpoints of ``(0, l_j)``."""
    mesh.check(y)
    w = apply_ell(sys, mesh, y)
    wt = apply_ell_tilde(sys, mesh, w)
    out = {}
    for j in mesh.tree.edges:
        stop = mesh.N[j] - mesh.n_tau if mesh.tree.is_boundary_edge(j) else mesh.N[j]
        mid = w.means(j)[:stop]
        adv = wt.means(j)[:stop]
        deriv = np.gradient(mid, mesh.h) if mid.size > 1 else np.zeros_like(mid)
        r = -deriv + sys.b[j] * mid + adv
        out[j] = float(np.sqrt(np.mean(r * r))) if r.size else 0.0
    return out


def constraint_residuals(sys: DelaySystem, mesh: Mesh, y: TreeFunction) -> dict[str, float]:
    mesh.check(y)
    tree = mesh.tree
    continuity = max((abs(y.edges[j][0] - y.edges[tree.parent[j]][-1]) for j in tree.edges if j != 1),
                     default=0.0)
    phi = sys.phi.sample(mesh)
    prehistory = max(float(np.max(np.abs(y.prehistory - phi))), abs(y.edges[1][0] - phi[-1]))
    target = max(float(np.max(np.abs(y.edges[j][mesh.target_window(j)]))) for j in tree.boundary_edges)
    return {"continuity": float(continuity), "prehistory": float(prehistory), "target": target}
