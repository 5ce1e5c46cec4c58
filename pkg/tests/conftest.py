from pathlib import Path

import pytest

from graphdamp import DelaySystem, Prehistory, build_mesh, build_tree
from graphdamp.problem import parse_problem

FIXTURES = Path(__file__).parent / "fixtures"
SUITE = ["interval", "star", "path_mixed", "branching_mixed", "star_classical", "path_jump"]
MIXED = ["path_mixed", "branching_mixed", "star_classical", "path_jump"]

ACCEPTANCE_LINES: list[str] = []


def load(name):
    return parse_problem(FIXTURES / f"{name}.json")


def star(refine=1, b=(0, 0, 0), c=(0, 0, 0), phi=None):
    tree = build_tree([0, 1, 1], [3, 3, 3])
    mesh = build_mesh(tree, 1, [3, 3, 3], 1.0, refine)
    return DelaySystem.create(tree, 1, b, c, phi or Prehistory.constant(1.0)), mesh


def interval(refine=1, b=0.0, c=0.0, phi=None):
    tree = build_tree([0], [3])
    mesh = build_mesh(tree, 1, [3], 1.0, refine)
    return DelaySystem.create(tree, 1, [b], [c], phi or Prehistory.constant(1.0)), mesh


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
