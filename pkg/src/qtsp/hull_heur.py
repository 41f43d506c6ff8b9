"""Convex-hull peeling heuristics with greedy or ILP merging of the rings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .construct import DEFAULT_LENS_GAMMA, cheapest_insertion, insert_isolated, lens_insert
from .core import Instance
from .errors import InvalidTourError, ParameterError
from .geometry import convex_hull
from .merge import MergeGraph, build_merge_graph, solve_merge
from .milp import SolverBackend

CycleMergeGraph = MergeGraph
MERGES = ("greedy", "ilp")


@dataclass(frozen=True)
class HullConfig:
    """``C``: peeling stops once at most C vertices remain; ``lens_gamma`` enables CH^L."""

    C: int = 20
    lens_gamma: float | None = None
    merge: str = "greedy"

    def __post_init__(self):
        if self.C < 2:
            raise ParameterError(f"C must be >= 2, got {self.C}")
        if self.merge not in MERGES:
            raise ParameterError(f"merge must be one of {MERGES}, got {self.merge!r}")
        if self.lens_gamma is not None and not 0 < self.lens_gamma < math.pi / 2:
            raise ParameterError(f"lens angle must lie in (0, pi/2), got {self.lens_gamma}")


def _check_cycles(cycles: Sequence[Sequence[int]]) -> list[list[int]]:
    out = [[int(v) for v in c] for c in cycles]
    if not out:
        raise InvalidTourError("no cycles to merge")
    for c in out:
        if len(c) < 3:
            raise InvalidTourError(f"cycle of size {len(c)} cannot be merged")
    flat = [v for c in out for v in c]
    if len(set(flat)) != len(flat):
        raise InvalidTourError("cycles must be vertex-disjoint")
    return out


def _pair_deltas(C: np.ndarray, A: list[int], B: list[int]) -> np.ndarray:
    """Objective change of every (edge of A, edge of B, pattern) reconnection."""
    a = np.asarray(A)
    b = np.asarray(B)
    ue, ve = a[:, None], np.roll(a, -1)[:, None]
    ap, an = np.roll(a, 1)[:, None], np.roll(a, -2)[:, None]
    uf, vf = b[None, :], np.roll(b, -1)[None, :]
    bp, bn = np.roll(b, 1)[None, :], np.roll(b, -2)[None, :]
    old = C[ap, ue, ve] + C[ue, ve, an] + C[bp, uf, vf] + C[uf, vf, bn]
    # pattern 0: {u_e, u_f} + {v_e, v_f}
    p0 = C[ap, ue, uf] + C[ue, uf, bp] + C[bn, vf, ve] + C[vf, ve, an]
    # pattern 1: {u_e, v_f} + {u_f, v_e}
    p1 = C[ap, ue, vf] + C[ue, vf, bn] + C[bp, uf, ve] + C[uf, ve, an]
    return np.stack([p0 - old, p1 - old], axis=2)


def _join(A: list[int], B: list[int], i: int, j: int, pattern: int) -> list[int]:
    p, q = len(A), len(B)
    a_rot = A[i + 1:] + A[:i + 1]  # v_e ... u_e
    if pattern == 0:
        b_part = [B[(j - t) % q] for t in range(q)]  # u_f, b_prev, ..., v_f
    else:
        b_part = [B[(j + 1 + t) % q] for t in range(q)]  # v_f, b_next, ..., u_f
    return a_rot + b_part


def greedy_merge(instance: Instance, cycles: Sequence[Sequence[int]]) -> list[int]:
    """Repeatedly apply the cheapest two-edge reconnection of two cycles."""
    pool = _check_cycles(cycles)
    C = instance.costs
    while len(pool) > 1:
        best = (math.inf, -1, -1, -1, -1, -1)
        for s in range(len(pool)):
            for t in range(s + 1, len(pool)):
                d = _pair_deltas(C, pool[s], pool[t])
                flat = int(np.argmin(d))
                if d.flat[flat] < best[0]:
                    i, rest = divmod(flat, d.shape[1] * 2)
                    j, pat = divmod(rest, 2)
                    best = (float(d.flat[flat]), s, t, i, j, pat)
        _, s, t, i, j, pat = best
        merged = _join(pool[s], pool[t], i, j, pat)
        pool = [c for k, c in enumerate(pool) if k not in (s, t)]
        pool.insert(s, merged)
    return pool[0]


def build_cycle_merge_graph(instance: Instance, cycles: Sequence[Sequence[int]]) -> CycleMergeGraph:
    return build_merge_graph(instance, cycles=_check_cycles(cycles))


def ilp_merge_cycles(instance: Instance, cycles: Sequence[Sequence[int]],
                     backend: SolverBackend | None = None) -> list[int]:
    """Merge all cycles at once through the auxiliary-graph ILP."""
    pool = _check_cycles(cycles)
    if len(pool) == 1:
        return pool[0]
    return solve_merge(build_merge_graph(instance, cycles=pool), backend)


def _exact_subtour(instance: Instance, vertices: Sequence[int],
                   backend: SolverBackend | None) -> list[int]:
    from .lp_heur import linearize, solve_qtsp_exact

    idx = np.asarray(vertices)
    lin = linearize(instance.costs[np.ix_(idx, idx, idx)])
    tour, _ = solve_qtsp_exact(lin, backend)
    return [int(idx[v]) for v in tour]


def _lens_ring(instance: Instance, ring: list[int], free: set[int], gamma: float) -> list[int]:
    pos = 0
    while pos < len(ring) and free:
        before = len(ring)
        ring = lens_insert(instance, ring, pos, free, gamma, closed=True)
        pos += len(ring) - before + 1
    return ring


def peel_rings(instance: Instance, C: int, lens_gamma: float | None = None) -> tuple[list[list[int]], list[int]]:
    """Hull rings outermost first, each optionally lens-extended right after peeling."""
    coords = instance.coords
    remaining = list(range(instance.n))
    rings: list[list[int]] = []
    while len(remaining) > C:
        local = convex_hull(coords[remaining])
        if len(local) < 3:
            break
        ring = [remaining[i] for i in local]
        free = set(remaining) - set(ring)
        if lens_gamma is not None:
            ring = _lens_ring(instance, ring, free, lens_gamma)
        rings.append(ring)
        remaining = [v for v in remaining if v in free]
    return rings, remaining


def convex_hull_heuristic(instance: Instance, config: HullConfig | None = None,
                          backend: SolverBackend | None = None) -> list[int]:
    """CH, CH_C, CH^L or CH_C^L depending on ``config``."""
    config = config or HullConfig()
    if instance.n < 3:
        raise InvalidTourError("need at least 3 vertices")
    rings, rest = peel_rings(instance, config.C, config.lens_gamma)
    if config.C > 2 and len(rest) >= 3:
        rings.append(_exact_subtour(instance, rest, backend))
        rest = []
    if not rings:
        return cheapest_insertion(instance)
    if rest:
        rings[-1] = insert_isolated(instance, rings[-1], rest)
    if config.merge == "ilp":
        return ilp_merge_cycles(instance, rings, backend)
    return greedy_merge(instance, rings)


__all__ = [
    "CycleMergeGraph", "DEFAULT_LENS_GAMMA", "HullConfig", "build_cycle_merge_graph",
    "convex_hull_heuristic", "greedy_merge", "ilp_merge_cycles", "peel_rings",
]
