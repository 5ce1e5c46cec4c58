"""Rooted metric trees.

Edges are numbered 1..m and vertices 0..m. Edge ``j`` runs from vertex
``parent[j]`` to vertex ``j``; vertex 0 is the root and has a single edge.
Internal vertices (those with outgoing edges) are numbered 1..d, boundary
vertices are 0 and d+1..m.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

from .errors import TreeError


@dataclass(frozen=True)
class RootedTree:
    parent: Mapping[int, int]
    lengths: Mapping[int, Fraction]
    d: int
    # original edge label -> new edge label; empty when no relabelling happened
    relabel: Mapping[int, int] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.parent)

    @property
    def edges(self) -> range:
        return range(1, self.m + 1)

    @property
    def internal(self) -> range:
        return range(1, self.d + 1)

    @property
    def boundary_edges(self) -> range:
        return range(self.d + 1, self.m + 1)

    def vertex_kind(self, v: int) -> str:
        if not 0 <= v <= self.m:
            raise TreeError(f"vertex {v} out of range 0..{self.m}")
        if v == 0:
            return "root"
        return "internal" if v <= self.d else "boundary"

    def is_boundary_edge(self, j: int) -> bool:
        return j > self.d

    def children(self, j: int) -> tuple[int, ...]:
        """Edges emanating from vertex ``j`` (the set V_j)."""
        if not 0 <= j <= self.d:
            raise TreeError(f"vertex {j} has no children or is out of range 0..{self.d}")
        return tuple(nu for nu in self.edges if self.parent[nu] == j)

    def path_to_root(self, j: int) -> list[int]:
        if not 1 <= j <= self.m:
            raise TreeError(f"edge {j} out of range 1..{self.m}")
        path = [j]
        while path[-1] != 1:
            path.append(self.parent[path[-1]])
        return path

    def height(self) -> Fraction:
        return max(sum(self.lengths[e] for e in self.path_to_root(j)) for j in self.edges)

    def bfs_order(self) -> list[int]:
        """Edges ordered parents-before-children."""
        order, queue = [], deque([1])
        while queue:
            j = queue.popleft()
            order.append(j)
            if j <= self.d:
                queue.extend(self.children(j))
        return order


def _as_length(value) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise TreeError(f"invalid length {value!r}: lengths must be exact (int, Fraction or 'p/q')")
    try:
        if isinstance(value, (Rational, str)):
            value = Fraction(value)
        else:
            raise TypeError
    except (TypeError, ValueError, ZeroDivisionError):
        raise TreeError(f"invalid length {value!r}") from None
    if value <= 0:
        raise TreeError(f"invalid length {value}: must be positive")
    return value


def build_tree(parent: Iterable[int], lengths: Iterable) -> RootedTree:
    """Validate a parent list and edge lengths and return a :class:`RootedTree`.

    ``parent[i]`` is the start vertex of edge ``i + 1``. If the internal
    vertices are not already 1..d (or the root edge is not edge 1) the edges
    are relabelled and the mapping is stored in ``tree.relabel``.
    """
    parent = [int(p) for p in parent]
    lengths = [_as_length(t) for t in lengths]
    m = len(parent)
    if m == 0:
        raise TreeError("not a tree: no edges")
    if len(lengths) != m:
        raise TreeError(f"got {m} parents but {len(lengths)} lengths")

    k = {j + 1: p for j, p in enumerate(parent)}
    for j, p in k.items():
        if not 0 <= p <= m or p == j:
            raise TreeError(f"not a tree: edge {j} has invalid parent {p}")
    roots = [j for j, p in k.items() if p == 0]
    if len(roots) != 1:
        if not roots:
            raise TreeError("not a tree: no edge emanates from the root")
        raise TreeError(f"root must be a boundary vertex: edges {roots} all start at v0")
    for j in k:
        seen, v = set(), j
        while v != 0:
            if v in seen or len(seen) > m:
                raise TreeError(f"not a tree: cycle through edge {j}")
            seen.add(v)
            v = k[v]

    has_children = {p for p in k.values() if p != 0}
    root = roots[0]
    internal = [root] + sorted(j for j in has_children if j != root)
    if m == 1:
        internal = []
    leaves = sorted(j for j in k if j not in has_children and j != root)
    if m == 1:
        leaves = [root]
    order = internal + leaves
    new = {old: i + 1 for i, old in enumerate(order)}
    relabel = {} if all(o == n for o, n in new.items()) else new

    new_parent = {new[j]: (0 if p == 0 else new[p]) for j, p in k.items()}
    new_lengths = {new[j]: lengths[j - 1] for j in k}
    return RootedTree(
        parent=dict(sorted(new_parent.items())),
        lengths=dict(sorted(new_lengths.items())),
        d=len(internal),
        relabel=relabel,
    )
