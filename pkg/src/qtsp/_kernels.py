"""Compiled inner loops over the dense cost tensor ``C[i, j, k]``."""

from __future__ import annotations

import numpy as np
from numba import njit

# Moves must gain more than this to be applied.
GAIN_EPS = 1e-9


@njit(cache=True)
def nn_kernel(C, i, j):
    """Two-directional nearest neighbour from the start edge (i, j).

    Each step appends the vertex with the smallest junction turn cost at
    either end. Ties: lower cost, then the back end, then lower vertex.
    """
    n = C.shape[0]
    buf = np.empty(2 * n, dtype=np.int64)
    head = n
    tail = n + 1
    buf[head] = i
    buf[tail] = j
    used = np.zeros(n, dtype=np.bool_)
    used[i] = True
    used[j] = True
    for _ in range(n - 2):
        f0, f1 = buf[head], buf[head + 1]
        b1, b0 = buf[tail - 1], buf[tail]
        best = np.inf
        best_end = 2
        best_k = -1
        for k in range(n):
            if used[k]:
                continue
            cb = C[b1, b0, k]
            if cb < best or (cb == best and (best_end > 0 or k < best_k)):
                best, best_end, best_k = cb, 0, k
            cf = C[k, f0, f1]
            if cf < best or (cf == best and best_end == 1 and k < best_k):
                best, best_end, best_k = cf, 1, k
        used[best_k] = True
        if best_end == 0:
            tail += 1
            buf[tail] = best_k
        else:
            head -= 1
            buf[head] = best_k
    return buf[head:tail + 1].copy()


@njit(cache=True)
def tour_cost(C, tour):
    n = tour.shape[0]
    s = 0.0
    for p in range(n):
        s += C[tour[p - 1], tour[p], tour[(p + 1) % n]]
    return s


@njit(cache=True)
def _segment_delta(C, tour, pos_lo, pos_hi, verts, nverts, rev, jl, jr, njunc):
    """Turn-cost change of a reconnection.

    ``verts`` holds the affected vertices (positions in the old tour).
    ``rev`` flags, per position range [pos_lo[s], pos_hi[s]], reversed segments.
    Junctions ``(jl[t], jr[t])`` become consecutive in the new tour.
    """
    n = tour.shape[0]
    old = 0.0
    new = 0.0
    for a in range(nverts):
        p = verts[a]
        v = tour[p]
        prv = tour[p - 1]
        nxt = tour[(p + 1) % n]
        old += C[prv, v, nxt]
        for s in range(rev.shape[0]):
            if rev[s] and pos_lo[s] <= p <= pos_hi[s]:
                prv, nxt = nxt, prv
        for t in range(njunc):
            if jl[t] == v:
                nxt = jr[t]
            if jr[t] == v:
                prv = jl[t]
        new += C[prv, v, nxt]
    return new - old


@njit(cache=True)
def _uniq_push(verts, count, p):
    for a in range(count):
        if verts[a] == p:
            return count
    verts[count] = p
    return count + 1


@njit(cache=True)
def two_opt_kernel(C, tour):
    """First-improvement 2-opt: reverse tour[i+1..j] while that gains."""
    n = tour.shape[0]
    tour = tour.copy()
    if n < 5:
        return tour
    verts = np.empty(4, dtype=np.int64)
    pos_lo = np.empty(1, dtype=np.int64)
    pos_hi = np.empty(1, dtype=np.int64)
    rev = np.ones(1, dtype=np.bool_)
    jl = np.empty(2, dtype=np.int64)
    jr = np.empty(2, dtype=np.int64)
    improved = True
    while improved:
        improved = False
        for i in range(n - 2):
            j = i + 2
            while j < n:
                # reversing all but one vertex only reverses orientation
                if i == 0 and j == n - 1:
                    break
                cnt = 0
                cnt = _uniq_push(verts, cnt, i)
                cnt = _uniq_push(verts, cnt, i + 1)
                cnt = _uniq_push(verts, cnt, j)
                cnt = _uniq_push(verts, cnt, (j + 1) % n)
                pos_lo[0] = i + 1
                pos_hi[0] = j
                jl[0] = tour[i]
                jr[0] = tour[j]
                jl[1] = tour[i + 1]
                jr[1] = tour[(j + 1) % n]
                d = _segment_delta(C, tour, pos_lo, pos_hi, verts, cnt, rev, jl, jr, 2)
                if d < -GAIN_EPS:
                    tour[i + 1:j + 1] = tour[i + 1:j + 1][::-1].copy()
                    improved = True
                j += 1
    return tour


# Reconnection patterns for segments S1 = tour[i+1..j], S2 = tour[j+1..k]:
# (swap order, reverse S1, reverse S2), in canonical order
#   [S1r S2], [S1 S2r], [S2r S1r], [S1r S2r], [S2 S1], [S2 S1r], [S2r S1]
PATTERNS = np.array([
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
    [1, 0, 0],
    [1, 1, 0],
    [1, 0, 1],
], dtype=np.int64)


@njit(cache=True)
def _three_opt_delta(C, tour, i, j, k, pat, verts, pos_lo, pos_hi, rev, jl, jr):
    n = tour.shape[0]
    swap, r1, r2 = pat[0], pat[1], pat[2]
    s1_first, s1_last = tour[i + 1], tour[j]
    s2_first, s2_last = tour[j + 1], tour[k]
    if r1:
        s1_first, s1_last = s1_last, s1_first
    if r2:
        s2_first, s2_last = s2_last, s2_first
    if swap:
        x_first, x_last, y_first, y_last = s2_first, s2_last, s1_first, s1_last
    else:
        x_first, x_last, y_first, y_last = s1_first, s1_last, s2_first, s2_last
    cnt = 0
    cnt = _uniq_push(verts, cnt, i)
    cnt = _uniq_push(verts, cnt, i + 1)
    cnt = _uniq_push(verts, cnt, j)
    cnt = _uniq_push(verts, cnt, j + 1)
    cnt = _uniq_push(verts, cnt, k)
    cnt = _uniq_push(verts, cnt, (k + 1) % n)
    pos_lo[0] = i + 1
    pos_hi[0] = j
    pos_lo[1] = j + 1
    pos_hi[1] = k
    rev[0] = r1 == 1
    rev[1] = r2 == 1
    jl[0] = tour[i]
    jr[0] = x_first
    jl[1] = x_last
    jr[1] = y_first
    jl[2] = y_last
    jr[2] = tour[(k + 1) % n]
    return _segment_delta(C, tour, pos_lo, pos_hi, verts, cnt, rev, jl, jr, 3)


@njit(cache=True)
def _apply_three_opt(tour, i, j, k, pat):
    s1 = tour[i + 1:j + 1].copy()
    s2 = tour[j + 1:k + 1].copy()
    if pat[1]:
        s1 = s1[::-1].copy()
    if pat[2]:
        s2 = s2[::-1].copy()
    if pat[0]:
        first, second = s2, s1
    else:
        first, second = s1, s2
    a = i + 1
    tour[a:a + first.shape[0]] = first
    b = a + first.shape[0]
    tour[b:b + second.shape[0]] = second


@njit(cache=True)
def three_opt_kernel(C, tour, patterns):
    """First-improvement 3-opt over all segment pairs and reconnection patterns."""
    n = tour.shape[0]
    tour = tour.copy()
    if n < 5:
        return tour
    verts = np.empty(6, dtype=np.int64)
    pos_lo = np.empty(2, dtype=np.int64)
    pos_hi = np.empty(2, dtype=np.int64)
    rev = np.zeros(2, dtype=np.bool_)
    jl = np.empty(3, dtype=np.int64)
    jr = np.empty(3, dtype=np.int64)
    improved = True
    while improved:
        improved = False
        for i in range(n - 2):
            for j in range(i + 1, n - 1):
                for k in range(j + 1, n):
                    for p in range(patterns.shape[0]):
                        d = _three_opt_delta(C, tour, i, j, k, patterns[p], verts,
                                             pos_lo, pos_hi, rev, jl, jr)
                        if d < -GAIN_EPS:
                            _apply_three_opt(tour, i, j, k, patterns[p])
                            improved = True
    return tour
