"""Construction heuristics: lens insertion, nearest neighbour and cheapest insertion."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .core import Instance, check_tour, tour_objective
from .errors import InvalidTourError, ParameterError
from .geometry import lens_mask, lens_region

DEFAULT_LENS_GAMMA = math.radians(40.0)


@dataclass(frozen=True)
class NnConfig:
    """Nearest-neighbour variant.

    ``all_starts`` runs every start edge (NN_S); ``lens_gamma`` adds lens
    insertion after each append (NN^L); ``two_opt_per_start`` also improves
    the tours started at the pivot vertex by 2-opt (NN_S^2).
    """

    all_starts: bool = False
    lens_gamma: float | None = None
    two_opt_per_start: bool = False
    pivot: int = 0

    def __post_init__(self):
        if self.two_opt_per_start and not self.all_starts:
            raise ParameterError("two_opt_per_start requires all_starts")
        if self.lens_gamma is not None and not 0 < self.lens_gamma < math.pi / 2:
            raise ParameterError(f"lens angle must lie in (0, pi/2), got {self.lens_gamma}")


# ---------------------------------------------------------------- lens insertion

def _insertion_delta(C: np.ndarray, seq: Sequence[int], idx: int, cands: np.ndarray,
                     closed: bool) -> np.ndarray:
    """Objective change of inserting each candidate between seq[idx] and seq[idx+1]."""
    m = len(seq)
    a, b = seq[idx], seq[(idx + 1) % m]
    delta = C[a, cands, b].copy()
    has_pa = closed or idx > 0
    has_nb = closed or idx + 1 < m - 1
    if has_pa:
        pa = seq[idx - 1]
        if not (closed and m == 2):
            delta += C[pa, a, cands] - C[pa, a, b]
    if has_nb:
        nb = seq[(idx + 2) % m]
        if not (closed and m == 2):
            delta += C[cands, b, nb] - C[a, b, nb]
    if closed and m == 2:
        # 2-cycle (a, b): inserting w gives the triangle (a, w, b)
        delta = C[b, a, cands] + C[a, cands, b] + C[cands, b, a]
    return delta


def _lens_candidates(instance: Instance, p: int, q: int, free: Iterable[int], gamma: float) -> np.ndarray:
    cand = np.fromiter(sorted(free), dtype=np.int64)
    if not len(cand):
        return cand
    lens = lens_region(instance.points[p], instance.points[q], gamma)
    return cand[lens_mask(lens, instance.coords[cand])]


def lens_insert(instance: Instance, path: Sequence[int], edge_index: int, free_vertices: set[int],
                gamma: float, closed: bool = False) -> list[int]:
    """Grow ``path`` by recursive lens insertion on the edge at ``edge_index``.

    Inserted vertices are removed from ``free_vertices`` in place. With
    ``closed`` the sequence is treated as a cycle (the last edge wraps).
    """
    seq = list(path)
    m = len(seq)
    if not (0 <= edge_index < (m if closed else m - 1)):
        raise InvalidTourError(f"edge index {edge_index} out of range")
    if closed and edge_index == m - 1:
        # rotate so the wrap edge becomes the last open position
        seq = seq[1:] + seq[:1]
        edge_index = m - 2
        out = _lens_insert_seq(instance, seq, edge_index, free_vertices, gamma, True)
        return out[-1:] + out[:-1]
    return _lens_insert_seq(instance, seq, edge_index, free_vertices, gamma, closed)


def _lens_insert_seq(instance, seq, edge_index, free, gamma, closed):
    C = instance.costs

    def rec(idx: int) -> int:
        if not free:
            return 0
        cands = _lens_candidates(instance, seq[idx], seq[idx + 1], free, gamma)
        if not len(cands):
            return 0
        delta = _insertion_delta(C, seq, idx, cands, closed)
        best = int(cands[int(np.argmin(delta))])
        seq.insert(idx + 1, best)
        free.discard(best)
        left = rec(idx)
        right = rec(idx + 1 + left)
        return 1 + left + right

    rec(edge_index)
    return seq


# ---------------------------------------------------------------- nearest neighbour

def nearest_neighbour(instance: Instance, start_edge: tuple[int, int],
                      config: NnConfig | None = None) -> list[int]:
    """Two-directional nearest neighbour from ``start_edge``."""
    config = config or NnConfig()
    n = instance.n
    if n < 3:
        raise InvalidTourError("need at least 3 vertices")
    i, j = int(start_edge[0]), int(start_edge[1])
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise InvalidTourError(f"bad start edge {start_edge}")
    if config.lens_gamma is None:
        return _kernels.nn_kernel(instance.costs, i, j).tolist()
    return _nn_lens(instance, i, j, config.lens_gamma)


def _nn_lens(instance: Instance, i: int, j: int, gamma: float) -> list[int]:
    C = instance.costs
    path = [i, j]
    free = set(range(instance.n)) - {i, j}
    while free:
        cand = np.fromiter(sorted(free), dtype=np.int64)
        back = C[path[-2], path[-1], cand]
        front = C[cand, path[0], path[1]]
        kb, kf = int(np.argmin(back)), int(np.argmin(front))
        if back[kb] <= front[kf]:
            path.append(int(cand[kb]))
            free.discard(int(cand[kb]))
            path = lens_insert(instance, path, len(path) - 2, free, gamma)
        else:
            path.insert(0, int(cand[kf]))
            free.discard(int(cand[kf]))
            path = lens_insert(instance, path, 0, free, gamma)
    return path


def nn_best_over_starts(instance: Instance, config: NnConfig | None = None) -> list[int]:
    """Best tour over every undirected start edge (i, j), i < j.

    With ``two_opt_per_start`` the tours grown from edges at the pivot vertex
    are improved by 2-opt before the comparison. Ties keep the earliest start.
    """
    config = config or NnConfig(all_starts=True)
    n = instance.n
    if n < 3:
        raise InvalidTourError("need at least 3 vertices")
    if config.two_opt_per_start:
        from .improve import two_opt
    best_tour, best_val = None, math.inf
    for e in itertools.combinations(range(n), 2):
        tour = nearest_neighbour(instance, e, config)
        if config.two_opt_per_start and config.pivot in e:
            tour = two_opt(instance, tour)
        val = tour_objective(instance, tour)
        if val < best_val:
            best_tour, best_val = tour, val
    return best_tour


# ---------------------------------------------------------------- cheapest insertion

def cif_start_pair(instance: Instance) -> tuple[int, int]:
    """Ordered pair minimising ``min_x c_xuv + min_y c_uvy``; ties lexicographic."""
    C = instance.costs
    n = instance.n
    idx = np.arange(n)
    # exclude x in {u, v}: entries with x == u are NaN already, x == v needs masking
    front = C.copy()  # front[x, u, v]
    front[idx, :, idx] = np.nan
    m1 = np.nanmin(np.where(np.isnan(front), np.inf, front), axis=0)  # [u, v]
    back = C.copy()  # back[u, v, y]
    back[idx, :, idx] = np.nan
    m2 = np.min(np.where(np.isnan(back), np.inf, back), axis=2)  # [u, v]
    score = m1 + m2
    score[idx, idx] = np.inf
    flat = int(np.argmin(score))
    return flat // n, flat % n


def _best_insertion(C: np.ndarray, cycle: list[int], cand: np.ndarray) -> tuple[int, int]:
    """(candidate, position) of the cheapest insertion; ties lowest vertex then position."""
    cyc = np.asarray(cycle, dtype=np.int64)
    A = cyc
    B = np.roll(cyc, -1)
    PA = np.roll(cyc, 1)
    NB = np.roll(cyc, -2)
    W = cand[:, None]
    delta = (C[PA, A, W] + C[A, W, B] + C[W, B, NB]) - (C[PA, A, B] + C[A, B, NB])
    flat = int(np.argmin(delta))
    return int(cand[flat // len(cyc)]), flat % len(cyc)


def insert_isolated(instance: Instance, cycle: Sequence[int], isolated: Iterable[int]) -> list[int]:
    """Insert vertices one at a time at the cheapest (vertex, position) pair."""
    tour = [int(v) for v in cycle]
    rest = sorted(set(int(v) for v in isolated) - set(tour))
    if rest and len(tour) < 3:
        if len(tour) == 2:
            tour = _third_vertex(instance, tour, rest)
            rest = [v for v in rest if v not in tour]
        else:
            raise InvalidTourError("insertion needs a cycle of at least 2 vertices")
    C = instance.costs
    while rest:
        w, p = _best_insertion(C, tour, np.asarray(rest, dtype=np.int64))
        tour.insert(p + 1, w)
        rest.remove(w)
    return tour


def _third_vertex(instance: Instance, pair: list[int], cand: Sequence[int]) -> list[int]:
    u, v = pair
    C = instance.costs
    w = np.asarray(cand, dtype=np.int64)
    tri = C[w, u, v] + C[u, v, w] + C[v, w, u]
    return [u, v, int(w[int(np.argmin(tri))])]


def cheapest_insertion(instance: Instance, initial: Sequence[int] | None = None) -> list[int]:
    """CIF: start triangle from the pair rule, then cheapest insertion until Hamiltonian.

    ``initial`` may be a subtour (>= 3 vertices) or a 2-vertex start edge.
    """
    n = instance.n
    if n < 3:
        raise InvalidTourError("need at least 3 vertices")
    everyone = range(n)
    if initial is None:
        if n <= 4:
            return _best_small_tour(instance)
        u, v = cif_start_pair(instance)
        tour = _third_vertex(instance, [u, v], [w for w in everyone if w not in (u, v)])
    else:
        tour = [int(v) for v in initial]
        if len(set(tour)) != len(tour) or not tour:
            raise InvalidTourError("initial subtour repeats a vertex")
        if len(tour) == 2:
            tour = _third_vertex(instance, tour, [w for w in everyone if w not in tour])
        elif len(tour) < 2:
            raise InvalidTourError("initial subtour needs at least 2 vertices")
    return insert_isolated(instance, tour, [w for w in everyone if w not in tour])


def _best_small_tour(instance: Instance) -> list[int]:
    n = instance.n
    best, best_val = None, math.inf
    for rest in itertools.permutations(range(1, n)):
        if rest[0] > rest[-1]:
            continue
        tour = [0, *rest]
        val = tour_objective(instance, tour)
        if val < best_val:
            best, best_val = tour, val
    return best
