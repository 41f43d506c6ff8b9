"""HiGHS engine through :func:`scipy.optimize.milp`."""

from __future__ import annotations

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .model import BackendError, MilpModel, MilpResult, Status, finalize

# Relative MIP gap; tight enough that optima agree with enumeration to 1e-6.
MIP_GAP = 1e-9


def solve_highs(model: MilpModel, integral: bool, time_limit: float | None = None,
                node_limit: int | None = None) -> MilpResult:
    c = np.asarray(model.obj, dtype=float)
    if model.num_vars == 0:
        return MilpResult(Status.OPTIMAL, 0.0, np.zeros(0), model.names)
    constraints = []
    if model.num_constraints:
        lo, hi = model.row_bounds()
        constraints.append(LinearConstraint(model.matrix(), lo, hi))
    integrality = np.asarray(model.integer, dtype=np.uint8) if integral else np.zeros(len(c), np.uint8)
    options: dict = {"disp": False}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    if integral and integrality.any():
        options["mip_rel_gap"] = MIP_GAP
        if node_limit is not None:
            options["node_limit"] = int(node_limit)
    bounds = Bounds(np.asarray(model.lb), np.asarray(model.ub))
    res = milp(c, integrality=integrality, bounds=bounds, constraints=constraints, options=options)
    if res.status == 4 and "unbounded or infeasible" in str(res.message):
        # HiGHS could not tell the two apart; a zero objective decides feasibility
        probe = milp(np.zeros_like(c), integrality=integrality, bounds=bounds,
                     constraints=constraints, options=options)
        if probe.status == 2:
            return MilpResult(Status.INFEASIBLE, names=model.names)
        if probe.status == 0:
            return MilpResult(Status.UNBOUNDED, names=model.names)
    if res.status == 0:
        return finalize(model, Status.OPTIMAL, res.x, integral)
    if res.status == 1:
        return finalize(model, Status.ITERATION_LIMIT, res.x, integral)
    if res.status == 2:
        return MilpResult(Status.INFEASIBLE, names=model.names)
    if res.status == 3:
        return MilpResult(Status.UNBOUNDED, names=model.names)
    raise BackendError(f"HiGHS failed: {res.message}")
