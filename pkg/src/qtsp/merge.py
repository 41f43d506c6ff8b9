"""Auxiliary merge graphs that turn quadratic junction costs into edge weights.

Each component (a cycle or a path of the original graph) is represented by
auxiliary vertices. Every auxiliary vertex X carries ``real[X]``, the original
vertex it stands for, and ``inner[X]``, the original neighbour on the side
that stays inside the component when X is used as a junction. Joining X and Y
costs ``c(inner X, real X, real Y) + c(real X, real Y, inner Y)``.

Cycle (v_1..v_m): vertex v_j becomes a_j (inner v_{j-1}) and b_j (inner
v_{j+1}); the short edge {a_j, b_j} costs the turn at v_j, the long edge
{b_j, a_{j+1}} stands for the cycle edge and costs 0.
Path (v_1..v_m): a (real v_1, inner v_2) and b (real v_m, inner v_{m-1})
joined by a path edge of weight 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Instance
from .errors import InvalidTourError
from .milp import (
    MilpModel,
    Sense,
    SolverBackend,
    SolverError,
    Status,
    solve_with_integral_sec,
    subtours,
)

SHORT, LONG, PATH, CONN = "short", "long", "path", "conn"


@dataclass
class MergeGraph:
    real: list[int] = field(default_factory=list)
    inner: list[int] = field(default_factory=list)
    comp: list[int] = field(default_factory=list)
    edges: list[tuple[int, int]] = field(default_factory=list)
    weights: list[float] = field(default_factory=list)
    kinds: list[str] = field(default_factory=list)
    # component id -> ("cycle" | "path", original vertex order)
    components: list[tuple[str, list[int]]] = field(default_factory=list)
    # path component id -> (a, b) auxiliary vertices
    path_ends: dict[int, tuple[int, int]] = field(default_factory=dict)
    # cycle component id -> [(a_j, b_j)] per position j
    cycle_pairs: dict[int, list[tuple[int, int]]] = field(default_factory=dict)

    def _vertex(self, real: int, inner: int, comp: int) -> int:
        self.real.append(real)
        self.inner.append(inner)
        self.comp.append(comp)
        return len(self.real) - 1

    def _edge(self, u: int, v: int, w: float, kind: str):
        self.edges.append((min(u, v), max(u, v)))
        self.weights.append(float(w))
        self.kinds.append(kind)

    def edges_of(self, kind: str) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k == kind]

    @property
    def num_vertices(self) -> int:
        return len(self.real)


def _add_cycle(g: MergeGraph, C: np.ndarray, cycle: Sequence[int]):
    m = len(cycle)
    if m < 3:
        raise InvalidTourError(f"cycle of size {m} cannot be merged")
    cid = len(g.components)
    g.components.append(("cycle", list(cycle)))
    pairs = []
    for j in range(m):
        prv, v, nxt = cycle[j - 1], cycle[j], cycle[(j + 1) % m]
        a = g._vertex(v, prv, cid)
        b = g._vertex(v, nxt, cid)
        pairs.append((a, b))
    for j in range(m):
        a, b = pairs[j]
        g._edge(a, b, C[cycle[j - 1], cycle[j], cycle[(j + 1) % m]], SHORT)
    for j in range(m):
        g._edge(pairs[j][1], pairs[(j + 1) % m][0], 0.0, LONG)
    g.cycle_pairs[cid] = pairs


def _add_path(g: MergeGraph, path: Sequence[int]):
    if len(path) < 2:
        raise InvalidTourError("paths in a merge graph need at least 2 vertices")
    cid = len(g.components)
    g.components.append(("path", list(path)))
    a = g._vertex(path[0], path[1], cid)
    b = g._vertex(path[-1], path[-2], cid)
    g._edge(a, b, 0.0, PATH)
    g.path_ends[cid] = (a, b)


def _add_connecting(g: MergeGraph, C: np.ndarray):
    real = np.asarray(g.real)
    inner = np.asarray(g.inner)
    comp = np.asarray(g.comp)
    n = len(real)
    for u in range(n):
        vs = np.arange(u + 1, n)
        vs = vs[comp[vs] != comp[u]]
        if not len(vs):
            continue
        w = C[inner[u], real[u], real[vs]] + C[real[u], real[vs], inner[vs]]
        for v, wv in zip(vs.tolist(), w.tolist()):
            g._edge(u, v, wv, CONN)


def build_merge_graph(instance: Instance, cycles: Sequence[Sequence[int]] = (),
                      paths: Sequence[Sequence[int]] = ()) -> MergeGraph:
    C = instance.costs
    g = MergeGraph()
    seen: set[int] = set()
    for comp in list(cycles) + list(paths):
        if seen & set(comp):
            raise InvalidTourError("merge components must be vertex-disjoint")
        seen |= set(comp)
    for cyc in cycles:
        _add_cycle(g, C, cyc)
    for p in paths:
        _add_path(g, p)
    _add_connecting(g, C)
    return g


def merge_model(g: MergeGraph) -> tuple[MilpModel, dict[tuple[int, int], int]]:
    """ILP over the merge graph; SECs are left to the separation loop."""
    model = MilpModel("merge")
    names = [f"x_{k}_{u}_{v}" for k, (u, v) in zip(g.kinds, g.edges)]
    model.add_vars(names, 0.0, 1.0, True, g.weights)
    edge_vars = {e: i for i, e in enumerate(g.edges)}
    incident: list[list[int]] = [[] for _ in range(g.num_vertices)]
    for i, (u, v) in enumerate(g.edges):
        incident[u].append(i)
        incident[v].append(i)
    path_vertices = set()
    for cid, (a, b) in g.path_ends.items():
        path_vertices |= {a, b}
        model.add_constraint({edge_vars[(min(a, b), max(a, b))]: 1.0}, Sense.EQ, 1.0, f"fix{cid}")
    for v in range(g.num_vertices):
        sense = Sense.EQ if v in path_vertices else Sense.LE
        model.add_constraint({i: 1.0 for i in incident[v]}, sense, 2.0, f"deg{v}")
    kind_of = g.kinds
    for cid, pairs in g.cycle_pairs.items():
        m = len(pairs)
        shorts = [edge_vars[(min(a, b), max(a, b))] for a, b in pairs]
        longs = []
        for j in range(m):
            u, v = pairs[j][1], pairs[(j + 1) % m][0]
            longs.append(edge_vars[(min(u, v), max(u, v))])
        model.add_constraint({i: 1.0 for i in longs}, Sense.EQ, m - 1, f"long{cid}")
        model.add_constraint({i: 1.0 for i in shorts}, Sense.EQ, m - 2, f"short{cid}")
        for j in range(m):
            u, v = pairs[j][1], pairs[(j + 1) % m][0]
            lid = longs[j]
            coeffs: dict[int, float] = {}
            for end in (u, v):
                for i in incident[end]:
                    if kind_of[i] in (SHORT, CONN):
                        coeffs[i] = coeffs.get(i, 0.0) - 1.0
            coeffs[lid] = coeffs.get(lid, 0.0) + 2.0
            model.add_constraint(coeffs, Sense.GE, 0.0, f"lg{cid}_{j}")
            model.add_constraint({lid: 1.0, shorts[j]: -1.0, shorts[(j + 1) % m]: -1.0},
                                 Sense.LE, 0.0, f"ls{cid}_{j}")
        members = {x for ab in pairs for x in ab}
        cut = {i: 1.0 for x in members for i in incident[x] if kind_of[i] == CONN}
        model.add_constraint(cut, Sense.EQ, 2.0, f"cut{cid}")
    return model, edge_vars


def decode_merge(g: MergeGraph, x: np.ndarray) -> list[int]:
    """Original-vertex cycle described by the selected auxiliary edges."""
    adj: dict[int, list[int]] = {}
    path_edge: dict[tuple[int, int], int] = {}
    for cid, (a, b) in g.path_ends.items():
        path_edge[(a, b)] = cid
        path_edge[(b, a)] = cid
    for i, (u, v) in enumerate(g.edges):
        if x[i] > 0.5:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
    if not adj or any(len(nb) != 2 for nb in adj.values()):
        raise SolverError("merge solution is not a union of cycles")
    start = min(adj)
    walk = [start]
    prev, cur = None, start
    while True:
        nb = adj[cur]
        nxt = nb[0] if nb[0] != prev else nb[1]
        if nxt == start:
            break
        walk.append(nxt)
        prev, cur = cur, nxt
    if len(walk) != len(adj):
        raise SolverError("merge solution has more than one cycle")
    out: list[int] = []
    m = len(walk)
    for idx, X in enumerate(walk):
        Y = walk[(idx + 1) % m]
        out.append(g.real[X])
        cid = path_edge.get((X, Y))
        if cid is not None:
            path = g.components[cid][1]
            interior = path[1:-1]
            out.extend(interior if X == g.path_ends[cid][0] else interior[::-1])
    compressed = [v for k, v in enumerate(out) if v != out[k - 1]] if len(out) > 1 else out
    expected = sum(len(c[1]) for c in g.components)
    if len(compressed) != expected or len(set(compressed)) != expected:
        raise SolverError("decoded merge cycle does not cover every component vertex once")
    return compressed


def solve_merge(g: MergeGraph, backend: SolverBackend | None = None) -> list[int]:
    model, edge_vars = merge_model(g)
    result = solve_with_integral_sec(model, lambda r: subtours(r.x, edge_vars), backend)
    if result.status is not Status.OPTIMAL:
        raise SolverError(f"merge ILP ended with status {result.status.value}")
    return decode_merge(g, result.x)
