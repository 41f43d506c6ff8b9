"""In-house engine: bounded-variable primal simplex and depth-first branch-and-bound.

Intended for small models. Rows are turned into equalities with one bounded
slack each (``A x - s = 0``, ``rl <= s <= ru``), so every constraint kind
becomes a variable bound. Phase one starts from an artificial basis.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .model import INT_TOL, MilpModel, MilpResult, Status, finalize

OPT_TOL = 1e-9
PIV_TOL = 1e-9
FEAS_TOL = 1e-6
BLAND_AFTER = 1000
REFACTOR_EVERY = 50
RESTART_EVERY = 10_000


@dataclass
class _Lp:
    status: Status
    x: np.ndarray | None = None
    objective: float = math.nan
    pivots: int = 0


class _Simplex:
    def __init__(self, M: np.ndarray, lo: np.ndarray, hi: np.ndarray, x: np.ndarray,
                 basis: np.ndarray, max_pivots: int):
        self.M, self.lo, self.hi, self.x = M, lo, hi, x
        self.basis = basis
        self.Binv = np.linalg.inv(M[:, basis]) if len(basis) else np.zeros((0, 0))
        self.max_pivots = max_pivots
        self.pivots = 0
        self.degenerate = 0
        self.since_refactor = 0

    def _refactor(self):
        m = len(self.basis)
        if not m:
            return
        self.Binv = np.linalg.inv(self.M[:, self.basis])
        nonbasic = np.ones(self.M.shape[1], dtype=bool)
        nonbasic[self.basis] = False
        rhs = -(self.M[:, nonbasic] @ self.x[nonbasic])
        self.x[self.basis] = self.Binv @ rhs
        self.since_refactor = 0

    def run(self, cost: np.ndarray) -> Status:
        M, lo, hi, x = self.M, self.lo, self.hi, self.x
        n = M.shape[1]
        movable = hi > lo
        while True:
            if self.since_refactor >= REFACTOR_EVERY:
                self._refactor()
            basis = self.basis
            is_basic = np.zeros(n, dtype=bool)
            is_basic[basis] = True
            y = cost[basis] @ self.Binv if len(basis) else np.zeros(0)
            d = cost - y @ M if len(basis) else cost.copy()
            can_inc = ~is_basic & movable & (x < hi - FEAS_TOL * 1e-3)
            can_dec = ~is_basic & movable & (x > lo + FEAS_TOL * 1e-3)
            inc = can_inc & (d < -OPT_TOL)
            dec = can_dec & (d > OPT_TOL)
            eligible = inc | dec
            if not eligible.any():
                return Status.OPTIMAL
            if self.pivots >= self.max_pivots:
                return Status.ITERATION_LIMIT
            if self.degenerate >= BLAND_AFTER:
                j = int(np.flatnonzero(eligible)[0])
            else:
                j = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
            direction = 1.0 if inc[j] else -1.0
            alpha = self.Binv @ M[:, j] if len(basis) else np.zeros(0)
            delta = -direction * alpha
            xb = x[basis]
            ratios = np.full(len(basis), np.inf)
            down = delta < -PIV_TOL
            up = delta > PIV_TOL
            lb_b, ub_b = lo[basis], hi[basis]
            with np.errstate(invalid="ignore", divide="ignore"):
                ratios[down] = (xb[down] - lb_b[down]) / -delta[down]
                ratios[up] = (ub_b[up] - xb[up]) / delta[up]
            ratios = np.maximum(np.nan_to_num(ratios, nan=np.inf, posinf=np.inf), 0.0)
            theta_rows = ratios.min() if len(ratios) else np.inf
            own = hi[j] - lo[j]
            if not np.isfinite(theta_rows) and not np.isfinite(own):
                return Status.UNBOUNDED
            self.pivots += 1
            if own <= theta_rows:
                x[basis] = xb + own * delta
                x[j] = hi[j] if direction > 0 else lo[j]
                continue
            theta = theta_rows
            ties = np.flatnonzero(ratios <= theta + 1e-12)
            if self.degenerate >= BLAND_AFTER:
                r = int(ties[np.argmin(basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(delta[ties]))])
            if theta <= 1e-12:
                self.degenerate += 1
            leaving = basis[r]
            x[basis] = xb + theta * delta
            x[j] = x[j] + direction * theta
            x[leaving] = lo[leaving] if delta[r] < 0 else hi[leaving]
            piv_row = self.Binv[r] / alpha[r]
            self.Binv -= np.outer(alpha, piv_row)
            self.Binv[r] = piv_row
            basis[r] = j
            self.since_refactor += 1


def solve_lp_dense(c: np.ndarray, A: np.ndarray, rl: np.ndarray, ru: np.ndarray,
                   lb: np.ndarray, ub: np.ndarray, max_pivots: int = 200_000) -> _Lp:
    m, nv = A.shape
    M = np.hstack([A, -np.eye(m)])
    lo = np.concatenate([lb, rl]).astype(float)
    hi = np.concatenate([ub, ru]).astype(float)
    if np.any(lo > hi + FEAS_TOL):
        return _Lp(Status.INFEASIBLE)
    x = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    resid = -(M @ x)
    sign = np.where(resid >= 0, 1.0, -1.0)
    M1 = np.hstack([M, np.diag(sign)])
    lo1 = np.concatenate([lo, np.zeros(m)])
    hi1 = np.concatenate([hi, np.full(m, np.inf)])
    x1 = np.concatenate([x, np.abs(resid)])
    ntot = M1.shape[1]
    basis = np.arange(ntot - m, ntot)
    sx = _Simplex(M1, lo1, hi1, x1, basis, max_pivots)
    phase1 = np.concatenate([np.zeros(ntot - m), np.ones(m)])
    status = sx.run(phase1)
    if status is Status.ITERATION_LIMIT:
        return _Lp(status, pivots=sx.pivots)
    sx._refactor()
    if x1[ntot - m:].sum() > FEAS_TOL:
        return _Lp(Status.INFEASIBLE, pivots=sx.pivots)
    hi1[ntot - m:] = 0.0
    x1[ntot - m:] = np.minimum(x1[ntot - m:], 0.0)
    sx.since_refactor = REFACTOR_EVERY
    phase2 = np.concatenate([c, np.zeros(m), np.zeros(m)])
    status = sx.run(phase2)
    if status is not Status.OPTIMAL:
        return _Lp(status, pivots=sx.pivots)
    sx._refactor()
    xs = x1[:nv].copy()
    return _Lp(Status.OPTIMAL, xs, float(c @ xs), sx.pivots)


def solve_simplex(model: MilpModel, integral: bool, time_limit: float | None = None,
                  node_limit: int | None = None) -> MilpResult:
    c = np.asarray(model.obj, dtype=float)
    A = model.matrix().toarray()
    rl, ru = model.row_bounds()
    lb = np.asarray(model.lb, dtype=float)
    ub = np.asarray(model.ub, dtype=float)
    if not integral or not model.has_integers():
        lp = solve_lp_dense(c, A, rl, ru, lb, ub)
        return finalize(model, lp.status, lp.x, False) if lp.status is Status.OPTIMAL \
            else MilpResult(lp.status, names=model.names)
    return _branch_and_bound(model, c, A, rl, ru, lb, ub, time_limit, node_limit)


def _branch_and_bound(model, c, A, rl, ru, lb, ub, time_limit, node_limit) -> MilpResult:
    integer = np.asarray(model.integer, dtype=bool)
    start = time.monotonic()
    best_x: np.ndarray | None = None
    best = math.inf
    # (lower bound inherited from the parent, lb, ub)
    stack: list[tuple[float, np.ndarray, np.ndarray]] = [(-math.inf, lb.copy(), ub.copy())]
    nodes = 0
    while stack:
        if node_limit is not None and nodes >= node_limit:
            break
        if time_limit is not None and time.monotonic() - start > time_limit:
            break
        if nodes and nodes % RESTART_EVERY == 0:
            stack.sort(key=lambda item: -item[0])
        bound, nlb, nub = stack.pop()
        nodes += 1
        if bound >= best - 1e-9 * max(1.0, abs(best)):
            continue
        lp = solve_lp_dense(c, A, rl, ru, nlb, nub)
        if lp.status is Status.INFEASIBLE:
            continue
        if lp.status is Status.UNBOUNDED:
            if nodes == 1:
                # unbounded relaxation: the model is unbounded iff it has an integral point
                if np.any(c):
                    probe = _branch_and_bound(model, np.zeros_like(c), A, rl, ru, lb, ub,
                                              time_limit, node_limit)
                    if probe.status is Status.INFEASIBLE:
                        return probe
                return MilpResult(Status.UNBOUNDED, names=model.names, nodes=nodes)
            continue
        if lp.status is not Status.OPTIMAL:
            continue
        if lp.objective >= best - 1e-9 * max(1.0, abs(best)):
            continue
        xi = lp.x[integer]
        frac = np.abs(xi - np.round(xi))
        if not np.any(frac > INT_TOL):
            best, best_x = lp.objective, lp.x
            continue
        dist = np.minimum(xi - np.floor(xi), np.ceil(xi) - xi)
        pick = int(np.argmax(np.where(frac > INT_TOL, dist, -1.0)))
        j = int(np.flatnonzero(integer)[pick])
        v = lp.x[j]
        down_ub = nub.copy()
        down_ub[j] = math.floor(v)
        up_lb = nlb.copy()
        up_lb[j] = math.ceil(v)
        down = (lp.objective, nlb, down_ub)
        up = (lp.objective, up_lb, nub)
        # the child nearer the LP value is explored first
        if v - math.floor(v) >= 0.5:
            stack.extend([down, up])
        else:
            stack.extend([up, down])
    if stack:
        status = Status.ITERATION_LIMIT
    else:
        status = Status.OPTIMAL if best_x is not None else Status.INFEASIBLE
    if best_x is None:
        return MilpResult(status, names=model.names, nodes=nodes)
    return finalize(model, status, best_x, True, nodes)
