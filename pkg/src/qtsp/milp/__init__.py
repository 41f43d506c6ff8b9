"""Linear and integer programming layer."""

from .backend import BackendKind, SolverBackend, solve_ilp, solve_lp
from .external import solve_external
from .lpfile import parse_lp_file, parse_solution, write_lp_file
from .model import (
    BackendError,
    ConfigurationError,
    MilpModel,
    MilpResult,
    SeparationLimitError,
    Sense,
    SolverError,
    Status,
)
from .separation import Subtour, edge_cycles, solve_with_integral_sec, subtours

__all__ = [
    "BackendError", "BackendKind", "ConfigurationError", "MilpModel", "MilpResult",
    "SeparationLimitError", "Sense", "SolverBackend", "SolverError", "Status", "Subtour",
    "edge_cycles", "parse_lp_file", "parse_solution", "solve_external", "solve_ilp",
    "solve_lp", "solve_with_integral_sec", "subtours", "write_lp_file",
]
