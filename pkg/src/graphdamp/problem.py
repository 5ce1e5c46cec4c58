"""Problem files (JSON, ``schema: 1``).

Example::

    {
      "schema": 1,
      "unit": 1.0,
      "tau_units": 1,
      "edges": [
        {"parent": 0, "length_units": 3, "b": 0.0, "c": 0.0},
        {"parent": 1, "length_units": 3, "b": 0.0, "c": 0.0},
        {"parent": 1, "length_units": 3, "b": 0.0, "c": 0.0}
      ],
      "prehistory": {"kind": "polynomial", "coeffs": [1.0]}
    }

Entry ``i`` of ``edges`` is edge ``i + 1``; ``parent`` is the vertex the edge
starts from (0 is the root, ``p`` the end vertex of edge ``p``).  With
``"index_base": 0`` parents are instead 0-based edge positions and ``-1``
denotes the root.  Edge ``j`` has length ``length_units * unit`` and the
delay is ``tau_units * unit``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import pydantic
from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from .delay import DelaySystem, Prehistory
from .errors import ValidationError
from .mesh import Mesh, build_mesh
from .tree import RootedTree, build_tree


class EdgeSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    parent: int
    length_units: PositiveInt
    b: float = 0.0
    c: float = 0.0
    label: Optional[str] = None


class PolynomialPrehistory(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["polynomial"]
    coeffs: list[float] = Field(min_length=1)


class SampledPrehistory(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["samples"]
    values: list[float] = Field(min_length=2)


PrehistorySpec = Annotated[Union[PolynomialPrehistory, SampledPrehistory], Field(discriminator="kind")]


class ProblemSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal[1] = Field(1, alias="schema")
    unit: float = Field(1.0, gt=0)
    tau_units: PositiveInt
    edges: list[EdgeSpec] = Field(min_length=1)
    prehistory: PrehistorySpec
    index_base: Literal[0, 1] = 1
    labels: Optional[dict[str, str]] = None

    def parents(self) -> list[int]:
        if self.index_base == 1:
            return [e.parent for e in self.edges]
        return [e.parent + 1 for e in self.edges]

    def tree(self) -> RootedTree:
        unit = Fraction(self.unit)
        return build_tree(self.parents(), [unit * e.length_units for e in self.edges])

    def _by_new_edge(self, tree: RootedTree, attr: str) -> list:
        order = [None] * tree.m
        for old, e in enumerate(self.edges, start=1):
            order[tree.relabel.get(old, old) - 1] = getattr(e, attr)
        return order

    def phi(self) -> Prehistory:
        p = self.prehistory
        if isinstance(p, PolynomialPrehistory):
            return Prehistory.polynomial(*p.coeffs)
        return Prehistory.samples(p.values)

    def system(self, tree: RootedTree | None = None) -> DelaySystem:
        tree = tree or self.tree()
        tau = float(Fraction(self.unit) * self.tau_units)
        return DelaySystem.create(tree, tau, self._by_new_edge(tree, "b"), self._by_new_edge(tree, "c"), self.phi())

    def mesh(self, refine: int = 1, tree: RootedTree | None = None) -> Mesh:
        tree = tree or self.tree()
        return build_mesh(tree, self.tau_units, self._by_new_edge(tree, "length_units"), self.unit, refine)

    def build(self, refine: int = 1) -> tuple[DelaySystem, Mesh]:
        tree = self.tree()
        sys = self.system(tree)
        mesh = self.mesh(refine, tree)
        sys.phi.sample(mesh)  # validates sample count
        return sys, mesh

    def validate_semantics(self) -> None:
        for i, e in enumerate(self.edges):
            if e.length_units <= self.tau_units:
                raise ValidationError(
                    f"edges[{i}].length_units: delay must be shorter than every edge "
                    f"({e.length_units} <= tau_units={self.tau_units})")
        first = self.edges[0].parent
        if first != (0 if self.index_base == 1 else -1):
            raise ValidationError("edges[0].parent: the first edge must start at the root")
        self.tree()

    def to_json(self) -> str:
        return json.dumps(self.model_dump(by_alias=True, exclude_none=True), indent=2)


def _format_pydantic(err: pydantic.ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{path}: {e['msg']}")
    return "invalid problem file: " + "; ".join(lines)


def load_problem(data: dict) -> ProblemSpec:
    try:
        spec = ProblemSpec.model_validate(data)
    except pydantic.ValidationError as err:
        raise ValidationError(_format_pydantic(err)) from None
    spec.validate_semantics()
    return spec


def parse_problem(path: str | Path) -> ProblemSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read problem file {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be a JSON object")
    return load_problem(data)


def write_problem(spec: ProblemSpec, path: str | Path) -> None:
    Path(path).write_text(spec.to_json() + "\n")
