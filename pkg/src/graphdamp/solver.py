"""Galerkin solution of the energy-minimisation problem.

The energy is the squared L2 norm of the delay operator applied to the
state.  Writing the state as a lift of the prehistory plus an element of the
constrained space turns the minimisation into one symmetric positive
definite linear system whose matrix is the Gram matrix of the energy form on
the free hat functions.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from .delay import DelaySystem, apply_ell, ell_matrix
from .errors import CoercivityError, SolverStalled
from .mesh import BrokenLinear, Mesh, TreeFunction

CG_RTOL = 1e-12
# banded Cholesky storage limit (entries); beyond it conjugate gradients take over
BANDED_LIMIT = 50_000_000


@dataclass
class SolveResult:
    y: TreeFunction
    u: BrokenLinear
    J: float
    gram_condition_hint: float
    solver_stats: dict = field(default_factory=dict)


def element_mass(mesh: Mesh) -> sp.csr_matrix:
    """Block-diagonal mass matrix of element-wise linear functions (interleaved layout)."""
    block = (mesh.h / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])
    return sp.block_diag([block] * mesh.n_elem, format="csr")


def build_lift(sys: DelaySystem, mesh: Mesh) -> TreeFunction:
    """Prehistory on ``[-tau, 0]`` continued by a ramp down to zero on the root edge.

    The ramp ends at ``T_1`` when the root edge is internal and at
    ``T_1 - tau`` when it is the only edge, so the lift always satisfies the
    target condition.
    """
    sys.check_mesh(mesh)
    y = mesh.zeros()
    y.prehistory = sys.phi.sample(mesh)
    phi0 = y.prehistory[-1]
    N = mesh.N[1]
    end = N - mesh.n_tau if mesh.tree.is_boundary_edge(1) else N
    ramp = y.edges[1]
    ramp[:end + 1] = phi0 * (end - np.arange(end + 1)) / end
    return y


def bilinear_apply(sys: DelaySystem, mesh: Mesh, yA: TreeFunction, yB: TreeFunction) -> float:
    """Energy form ``sum_j int l_j yA * l_j yB dt`` evaluated exactly."""
    wa = mesh.to_elements(apply_ell(sys, mesh, yA))
    wb = mesh.to_elements(apply_ell(sys, mesh, yB))
    la_, ra = wa[0::2], wa[1::2]
    lb, rb = wb[0::2], wb[1::2]
    return float(mesh.h / 6.0 * np.sum(2 * la_ * lb + la_ * rb + ra * lb + 2 * ra * rb))


@dataclass
class Assembly:
    gram: sp.csr_matrix
    load: np.ndarray
    lift: TreeFunction
    ell: sp.csr_matrix          # raw nodes -> element values
    ell_free: sp.csr_matrix     # free dofs -> element values
    mass: sp.csr_matrix


def assemble_system(sys: DelaySystem, mesh: Mesh) -> Assembly:
    L = ell_matrix(sys, mesh)
    A = (L @ mesh.scatter_matrix()).tocsr()
    M = element_mass(mesh)
    gram = (A.T @ (M @ A)).tocsr()
    gram.sum_duplicates()
    lift = build_lift(sys, mesh)
    load = -(A.T @ (M @ (L @ mesh.to_raw(lift))))
    return Assembly(gram, np.asarray(load).ravel(), lift, L, A, M)


def assemble(sys: DelaySystem, mesh: Mesh) -> tuple[sp.csr_matrix, np.ndarray]:
    a = assemble_system(sys, mesh)
    return a.gram, a.load


def _banded_upper(A: sp.spmatrix, bw: int) -> np.ndarray:
    n = A.shape[0]
    ab = np.zeros((bw + 1, n))
    coo = sp.triu(A).tocoo()
    ab[bw + coo.row - coo.col, coo.col] = coo.data
    return ab


def spd_solve(gram: sp.spmatrix, rhs: np.ndarray) -> tuple[np.ndarray, dict]:
    """Solve ``gram x = rhs`` by banded Cholesky after reverse Cuthill-McKee.

    Raises :class:`CoercivityError` if the factorisation breaks down.
    """
    n = gram.shape[0]
    if n == 0:
        return np.zeros(0), {"method": "empty"}
    gram = sp.csr_matrix(gram)
    perm = csgraph.reverse_cuthill_mckee(gram, symmetric_mode=True)
    P = gram[perm][:, perm].tocoo()
    bw = int(np.max(np.abs(P.row - P.col))) if P.nnz else 0
    if (bw + 1) * n <= BANDED_LIMIT:
        try:
            cb = la.cholesky_banded(_banded_upper(P, bw), lower=False)
        except la.LinAlgError as exc:
            raise CoercivityError(f"coercivity violated: Gram matrix is not positive definite ({exc})") from None
        xp = la.cho_solve_banded((cb, False), rhs[perm])
        x = np.empty(n)
        x[perm] = xp
        return x, {"method": "banded-cholesky", "bandwidth": bw, "n": n}

    iters = 0

    def count(_):
        nonlocal iters
        iters += 1

    d = gram.diagonal()
    if np.any(d <= 0):
        raise CoercivityError("coercivity violated: nonpositive Gram diagonal")
    precond = sp.diags(1.0 / d)
    x, info = spla.cg(gram, rhs, rtol=CG_RTOL, atol=0.0, maxiter=10 * n, M=precond, callback=count)
    if info != 0:
        raise SolverStalled(f"linear solver stalled after {iters} iterations")
    return x, {"method": "cg", "iterations": iters, "n": n}


def solve_bvp(sys: DelaySystem, mesh: Mesh) -> SolveResult:
    t0 = time.perf_counter()
    a = assemble_system(sys, mesh)
    t1 = time.perf_counter()
    x, stats = spd_solve(a.gram, a.load)
    t2 = time.perf_counter()
    y = a.lift + mesh.scatter(x)
    w = a.ell @ mesh.to_raw(y)
    u = mesh.from_elements(w)
    J = float(w @ (a.mass @ w))
    d = a.gram.diagonal()
    hint = float(d.max() / d.min()) if d.size else 1.0
    stats.update(assemble_seconds=t1 - t0, solve_seconds=t2 - t1, n_free=mesh.n_free)
    return SolveResult(y=y, u=u, J=J, gram_condition_hint=hint, solver_stats=stats)


def sobolev_norm(mesh: Mesh, y: TreeFunction, include_prehistory: bool = True) -> float:
    """Discrete W^1_2 norm of a piecewise-linear function (exact integrals)."""
    parts = [y.edges[j] for j in mesh.tree.edges]
    if include_prehistory:
        parts.append(y.prehistory)
    return float(np.sqrt(sum(sobolev_norm_samples(mesh.h, v) ** 2 for v in parts)))


def sobolev_norm_samples(h: float, v: np.ndarray) -> float:
    a, b = v[:-1], v[1:]
    return float(np.sqrt(h / 3.0 * np.sum(a * a + a * b + b * b) + np.sum((b - a) ** 2) / h))
