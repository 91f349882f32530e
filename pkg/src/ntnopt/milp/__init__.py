"""Joint flow-and-routing MILP: model construction, solving, export, verification."""
from .branch_bound import RouteExtractionError, Solution, SolveOptions, SolveStatus, solve
from .kernels import ACCELERATED
from .lp import (
    LpNumericalError,
    LpProblem,
    LpResult,
    LpStatus,
    SimplexCycleError,
    lp_solve,
)
from .model import (
    FLOW_UNIT_BPS,
    TIME_UNIT_S,
    MilpModel,
    ModelError,
    OptimizationWeights,
    build_model,
)
from .mps import export_mps
from .verify import verify_solution

__all__ = [
    "ACCELERATED",
    "FLOW_UNIT_BPS",
    "TIME_UNIT_S",
    "LpNumericalError",
    "LpProblem",
    "LpResult",
    "LpStatus",
    "MilpModel",
    "ModelError",
    "OptimizationWeights",
    "RouteExtractionError",
    "SimplexCycleError",
    "Solution",
    "SolveOptions",
    "SolveStatus",
    "build_model",
    "export_mps",
    "lp_solve",
    "solve",
    "verify_solution",
]
