"""Solver selection: built-in engines or an external process."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .external import solve_external
from .highs import solve_highs
from .model import ConfigurationError, MilpModel, MilpResult
from .simplex import solve_simplex


class BackendKind(enum.Enum):
    BUILTIN = "builtin"
    EXTERNAL = "external"


ENGINES = ("highs", "simplex")


@dataclass(frozen=True)
class SolverBackend:
    """Which solver runs a model, and under which limits.

    The built-in kind has two engines: ``highs`` (default) and ``simplex``,
    the dense in-house simplex with branch-and-bound for small models.
    """

    kind: BackendKind = BackendKind.BUILTIN
    engine: str = "highs"
    time_limit: float | None = None
    node_limit: int | None = None
    command: str | None = None
    workdir: str | None = None

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigurationError(f"unknown engine {self.engine!r}; choose from {ENGINES}")

    @classmethod
    def from_name(cls, name: str, **kwargs) -> "SolverBackend":
        try:
            kind = BackendKind(name)
        except ValueError:
            raise ConfigurationError(f"unknown backend {name!r}") from None
        return cls(kind=kind, **kwargs)


DEFAULT_BACKEND = SolverBackend()


def _solve(model: MilpModel, backend: SolverBackend | None, integral: bool) -> MilpResult:
    b = backend or DEFAULT_BACKEND
    if b.kind is BackendKind.EXTERNAL:
        return solve_external(model, b.command, b.workdir, integral, b.time_limit)
    if b.engine == "simplex":
        return solve_simplex(model, integral, b.time_limit, b.node_limit)
    return solve_highs(model, integral, b.time_limit, b.node_limit)


def solve_lp(model: MilpModel, backend: SolverBackend | None = None) -> MilpResult:
    """Optimum of the model with integrality ignored."""
    return _solve(model, backend, integral=False)


def solve_ilp(model: MilpModel, backend: SolverBackend | None = None) -> MilpResult:
    return _solve(model, backend, integral=True)
