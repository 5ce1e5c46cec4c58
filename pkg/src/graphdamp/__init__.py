"""Minimum-energy damping of a linear control system with global delay on a rooted metric tree."""
from .checks import constraint_residuals, kirchhoff_residual, strong_residual, weak_residual
from .delay import DelaySystem, Prehistory, apply_ell, apply_ell_tilde, vertex_coupling
from .errors import (CoercivityError, GraphDampError, MeshError, NumericalError, OracleError,
                     SimulationDiverged, SolverStalled, TreeError, ValidationError)
from .mesh import BrokenLinear, Mesh, TreeFunction, build_mesh
from .oracle import oracle_energy, oracle_solve
from .problem import ProblemSpec, load_problem, parse_problem
from .simulate import simulate, verify_damping
from .solver import SolveResult, assemble, bilinear_apply, build_lift, solve_bvp
from .tree import RootedTree, build_tree

__version__ = "0.1.0"
