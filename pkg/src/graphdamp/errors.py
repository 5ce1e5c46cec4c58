"""Exception hierarchy. The CLI maps these onto exit codes."""


class GraphDampError(Exception):
    """Base class for all library errors."""


class ValidationError(GraphDampError, ValueError):
    """Malformed or semantically invalid input (exit code 1)."""


class TreeError(ValidationError):
    pass


class MeshError(ValidationError):
    pass


class NumericalError(GraphDampError, ArithmeticError):
    """Factorization failure, stalled solver or divergence (exit code 2)."""


class CoercivityError(NumericalError):
    pass


class SolverStalled(NumericalError):
    pass


class SimulationDiverged(NumericalError):
    pass


class OracleError(NumericalError):
    pass
