"""Cubic linearization, LP relaxation, rounding and the LP-based heuristics.

Variables: ``x_uv`` per unordered pair and ``y[v; {u, t}]`` per transition
through v, stored once for u < t because the costs are symmetric. Rows:
``sum_u x_uv = 2`` per vertex and, per edge {u, v} and each endpoint m of it,
``x_uv = sum_t y[m; {other, t}]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .construct import cheapest_insertion, insert_isolated
from .core import Instance
from .errors import InvalidTourError, ParameterError
from .merge import MergeGraph, build_merge_graph, solve_merge
from .milp import (
    MilpModel,
    Sense,
    SolverBackend,
    SolverError,
    Status,
    solve_lp,
    solve_with_integral_sec,
    subtours,
)

Edge = tuple[int, int]
DEFAULT_THRESHOLD = 0.5
# x' must exceed the threshold by this much to count as a rounding candidate.
ROUND_TOL = 1e-6


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass
class QtspLinearization:
    model: MilpModel
    m: int
    edge_vars: dict[Edge, int]
    triples: np.ndarray  # rows (u, v, t), v the middle vertex, u < t
    y_start: int

    @property
    def edges(self) -> list[Edge]:
        return list(self.edge_vars)


def linearize(weights: np.ndarray, name: str = "qtsp") -> QtspLinearization:
    """Linearized QTSP over ``m`` vertices with transition weights ``W[u, v, t]``.

    Non-finite weights mark forbidden transitions; their y variables are left out.
    """
    W = np.asarray(weights, dtype=float)
    m = W.shape[0]
    if m < 3:
        raise InvalidTourError("a tour needs at least 3 vertices")
    model = MilpModel(name)
    eu, ev = np.triu_indices(m, 1)
    edges = list(zip(eu.tolist(), ev.tolist()))
    model.add_vars([f"x_{u}_{v}" for u, v in edges], 0.0, 1.0, True)
    edge_vars = {e: i for i, e in enumerate(edges)}
    parts = []
    for v in range(m):
        keep = (eu != v) & (ev != v)
        u, t = eu[keep], ev[keep]
        ok = np.isfinite(W[u, v, t])
        parts.append(np.stack([u[ok], np.full(ok.sum(), v), t[ok]], axis=1))
    triples = np.concatenate(parts) if parts else np.zeros((0, 3), np.int64)
    y_start = model.num_vars
    model.add_vars([f"y_{u}_{v}_{t}" for u, v, t in triples.tolist()], 0.0, 1.0, False,
                   W[triples[:, 0], triples[:, 1], triples[:, 2]].tolist())
    for v in range(m):
        model.add_constraint(([edge_vars[_edge(u, v)] for u in range(m) if u != v],
                              [1.0] * (m - 1)), Sense.EQ, 2.0, f"deg{v}")
    # coupling rows keyed by (edge id, middle vertex)
    rows: dict[tuple[int, int], list[int]] = {}
    for k, (u, v, t) in enumerate(triples.tolist()):
        rows.setdefault((edge_vars[_edge(u, v)], v), []).append(y_start + k)
        rows.setdefault((edge_vars[_edge(v, t)], v), []).append(y_start + k)
    for (a, b), eid in edge_vars.items():
        for mid in (a, b):
            ys = rows.get((eid, mid), [])
            model.add_constraint(([eid] + ys, [1.0] + [-1.0] * len(ys)), Sense.EQ, 0.0,
                                 f"cp{a}_{b}_{mid}")
    return QtspLinearization(model, m, edge_vars, triples, y_start)


def build_linearization(instance: Instance) -> QtspLinearization:
    if instance.n < 3:
        raise InvalidTourError("a tour needs at least 3 vertices")
    return linearize(instance.costs, name=instance.name or "qtsp")


def _with_fixings(lin: QtspLinearization, fixings: Iterable[Edge]) -> MilpModel:
    model = lin.model.copy()
    for u, v in fixings:
        e = _edge(int(u), int(v))
        if e not in lin.edge_vars:
            raise ParameterError(f"fixed edge {e} is not in the model")
        model.lb[lin.edge_vars[e]] = 1.0
    return model


@dataclass
class Relaxation:
    x: dict[Edge, float]
    objective: float


def solve_relaxation(lin: QtspLinearization, fixings: Iterable[Edge] = (),
                     backend: SolverBackend | None = None) -> Relaxation:
    """LP optimum without integrality or subtour constraints; ``fixings`` force x_e = 1."""
    result = solve_lp(_with_fixings(lin, fixings), backend)
    if result.status is not Status.OPTIMAL:
        raise SolverError(f"relaxation ended with status {result.status.value}")
    x = {e: float(result.x[i]) for e, i in lin.edge_vars.items()}
    return Relaxation(x, result.objective)


def cycle_from_edges(x: np.ndarray, edge_vars: Mapping[Edge, int]) -> list[int]:
    adj: dict[int, list[int]] = {}
    for (u, v), i in edge_vars.items():
        if x[i] > 0.5:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
    start = min(adj)
    order, prev, cur = [start], None, start
    while True:
        nb = adj[cur]
        nxt = nb[0] if nb[0] != prev else nb[1]
        if nxt == start:
            return order
        order.append(nxt)
        prev, cur = cur, nxt


def solve_qtsp_exact(lin: QtspLinearization, backend: SolverBackend | None = None,
                     fixings: Iterable[Edge] = ()) -> tuple[list[int], float]:
    """Optimal tour of the linearized model by integral subtour separation."""
    model = _with_fixings(lin, fixings)
    result = solve_with_integral_sec(model, lambda r: subtours(r.x, lin.edge_vars), backend)
    if result.status is not Status.OPTIMAL:
        raise SolverError(f"exact solve ended with status {result.status.value}")
    tour = cycle_from_edges(result.x, lin.edge_vars)
    if len(tour) != lin.m:
        raise SolverError("exact solve did not return a Hamiltonian cycle")
    return tour, result.objective


# ---------------------------------------------------------------- rounding

@dataclass
class PartialSolution:
    paths: list[list[int]] = field(default_factory=list)
    cycles: list[list[int]] = field(default_factory=list)
    isolated: list[int] = field(default_factory=list)

    def edges(self) -> list[Edge]:
        out = [_edge(p[k], p[k + 1]) for p in self.paths for k in range(len(p) - 1)]
        out += [_edge(c[k], c[(k + 1) % len(c)]) for c in self.cycles for k in range(len(c))]
        return sorted(out)


def _classify(n: int, chosen: list[Edge]) -> PartialSolution:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in chosen:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    out = PartialSolution()
    for s in range(n):
        if seen[s]:
            continue
        if not adj[s]:
            seen[s] = True
            out.isolated.append(s)
            continue
        comp, stack = [], [s]
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        ends = sorted(u for u in comp if len(adj[u]) == 1)
        start = ends[0] if ends else min(comp)
        order, prev, cur = [start], None, start
        while True:
            nxt = [w for w in adj[cur] if w != prev]
            if not nxt or nxt[0] == start:
                break
            prev, cur = cur, nxt[0]
            order.append(cur)
        (out.paths if ends else out.cycles).append(order)
    return out


def round_fractional(x: Mapping[Edge, float], threshold: float = DEFAULT_THRESHOLD,
                     allow_cycles: bool = False, n: int | None = None,
                     priority: Iterable[Edge] = ()) -> PartialSolution:
    """Greedy threshold rounding.

    Edges with ``x' > threshold`` are scanned by decreasing value (ties by
    edge) and accepted while every degree stays at most 2 and, unless
    ``allow_cycles``, no cycle closes. ``priority`` edges are scanned first.
    """
    if not 0.0 <= threshold < 1.0:
        raise ParameterError(f"threshold must lie in [0, 1), got {threshold}")
    if n is None:
        n = 1 + max((max(e) for e in x), default=-1)
    first = [_edge(*e) for e in priority]
    first_set = set(first)
    cand = sorted((e for e, v in x.items() if v > threshold + ROUND_TOL and _edge(*e) not in first_set),
                  key=lambda e: (-x[e], _edge(*e)))
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    deg = [0] * n
    chosen: list[Edge] = []
    for e in sorted(first) + [_edge(*e) for e in cand]:
        u, v = e
        if deg[u] >= 2 or deg[v] >= 2:
            continue
        ru, rv = find(u), find(v)
        if ru == rv and not allow_cycles:
            continue
        parent[ru] = rv
        deg[u] += 1
        deg[v] += 1
        chosen.append(e)
    return _classify(n, chosen)


# ---------------------------------------------------------------- merging

def build_path_merge_graph(instance: Instance, paths: Sequence[Sequence[int]]) -> MergeGraph:
    return build_merge_graph(instance, paths=paths)


def merge_paths_ilp(instance: Instance, paths: Sequence[Sequence[int]],
                    backend: SolverBackend | None = None) -> list[int]:
    """One cycle through all path vertices that keeps every path intact."""
    if len(paths) < 2:
        raise InvalidTourError("path merging needs at least two paths")
    return solve_merge(build_path_merge_graph(instance, paths), backend)


def merge_paths_and_cycles_ilp(instance: Instance, partial: PartialSolution,
                               backend: SolverBackend | None = None) -> list[int]:
    """Merge every path and cycle of ``partial`` at once."""
    if len(partial.paths) + len(partial.cycles) < 2:
        raise InvalidTourError("merging needs at least two components")
    return solve_merge(build_merge_graph(instance, partial.cycles, partial.paths), backend)


# ---------------------------------------------------------------- heuristics

class LpVariant(enum.Enum):
    LPP = "lpp"
    LPC1 = "lpc1"
    LPC2 = "lpc2"


@dataclass(frozen=True)
class LpConfig:
    variant: LpVariant = LpVariant.LPC2
    rerun: bool = True
    threshold: float = DEFAULT_THRESHOLD


def _rerun(lin, partial, config, n, backend) -> PartialSolution:
    allow = config.variant is not LpVariant.LPP
    while partial.isolated:
        fixed = partial.edges()
        try:
            relax = solve_relaxation(lin, fixed, backend)
        except SolverError:
            break
        nxt = round_fractional(relax.x, config.threshold, allow, n, priority=fixed)
        if len(nxt.isolated) >= len(partial.isolated):
            break
        partial = nxt
    return partial


def _close_single_path(instance: Instance, path: list[int], isolated: list[int]) -> list[int]:
    if len(path) >= 3:
        return insert_isolated(instance, path, isolated)
    return cheapest_insertion(instance, initial=path)


def lp_heuristic(instance: Instance, config: LpConfig | None = None,
                 backend: SolverBackend | None = None,
                 relaxation: Relaxation | None = None) -> list[int]:
    """LPP, LPC1 or LPC2, optionally with the rerun strategy.

    A precomputed root ``relaxation`` may be passed to skip the first LP.
    """
    config = config or LpConfig()
    n = instance.n
    if n < 3:
        raise InvalidTourError("need at least 3 vertices")
    lin = build_linearization(instance)
    relax = relaxation or solve_relaxation(lin, (), backend)
    allow = config.variant is not LpVariant.LPP
    partial = round_fractional(relax.x, config.threshold, allow, n)
    if config.rerun:
        partial = _rerun(lin, partial, config, n, backend)
    paths, cycles, isolated = partial.paths, partial.cycles, partial.isolated

    if not paths and not cycles:
        return cheapest_insertion(instance)
    if config.variant is LpVariant.LPP or not cycles:
        if len(paths) == 1 and not cycles:
            return _close_single_path(instance, paths[0], isolated)
        if len(paths) >= 2 and not cycles:
            return insert_isolated(instance, merge_paths_ilp(instance, paths, backend), isolated)
    if config.variant is LpVariant.LPC1 or (len(paths) == 1 and len(paths[0]) == 2):
        if len(paths) + len(cycles) == 1:
            return insert_isolated(instance, cycles[0], isolated)
        return insert_isolated(instance, merge_paths_and_cycles_ilp(instance, partial, backend), isolated)
    # LPC2: paths into one cycle first, then all cycles together
    pool = list(cycles)
    if len(paths) >= 2:
        pool.append(merge_paths_ilp(instance, paths, backend))
    elif len(paths) == 1:
        pool.append(paths[0])
    if len(pool) == 1:
        return insert_isolated(instance, pool[0], isolated)
    from .hull_heur import ilp_merge_cycles

    return insert_isolated(instance, ilp_merge_cycles(instance, pool, backend), isolated)
