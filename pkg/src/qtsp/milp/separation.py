"""Integral subtour separation: solve, cut every cycle found, repeat."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .backend import SolverBackend, solve_ilp
from .model import MilpModel, MilpResult, SeparationLimitError, Sense

MAX_ROUNDS = 500


@dataclass(frozen=True)
class Subtour:
    """A cycle of the current solution: its vertices and the variables of edges inside them."""

    vertices: tuple
    edge_vars: tuple[int, ...]


def edge_cycles(x: np.ndarray, edge_vars: Mapping[tuple, int]) -> list[list]:
    """Vertex sets of the cycles formed by edges whose variable exceeds 1/2.

    Components that are not closed cycles (paths, isolated vertices) are ignored.
    """
    adj: dict = {}
    for (u, v), idx in edge_vars.items():
        if x[idx] > 0.5:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
    seen: set = set()
    cycles = []
    for start in sorted(adj, key=repr):
        if start in seen:
            continue
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if all(len(adj[u]) == 2 for u in comp):
            cycles.append(comp)
    return cycles


def subtours(x: np.ndarray, edge_vars: Mapping[tuple, int]) -> list[Subtour]:
    out = []
    for comp in edge_cycles(x, edge_vars):
        members = set(comp)
        inside = tuple(idx for (u, v), idx in edge_vars.items() if u in members and v in members)
        out.append(Subtour(tuple(comp), inside))
    return out


def solve_with_integral_sec(model: MilpModel,
                            cycle_extractor: Callable[[MilpResult], Sequence[Subtour]],
                            backend: SolverBackend | None = None,
                            max_rounds: int = MAX_ROUNDS) -> MilpResult:
    """Repeat ILP solves, adding ``sum x_e <= |S| - 1`` for every extracted cycle.

    Stops once the extractor reports at most one cycle. The input model is not
    modified. A non-optimal solve ends the loop and is returned as is.
    """
    work = model.copy()
    added = 0
    for rounds in range(1, max_rounds + 1):
        result = solve_ilp(work, backend)
        result.sec_added, result.rounds = added, rounds
        if not result.ok:
            return result
        found = list(cycle_extractor(result))
        if len(found) <= 1:
            return result
        for sub in found:
            work.add_constraint((sub.edge_vars, [1.0] * len(sub.edge_vars)), Sense.LE,
                                len(sub.vertices) - 1, f"sec{added}")
            added += 1
    raise SeparationLimitError(f"no single cycle after {max_rounds} separation rounds")
