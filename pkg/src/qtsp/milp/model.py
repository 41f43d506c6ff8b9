"""Backend-neutral linear model and solve result."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy import sparse

from ..errors import QtspError

FEAS_TOL = 1e-6
INT_TOL = 1e-6


class SolverError(QtspError):
    """A solve could not deliver the requested result."""


class BackendError(SolverError):
    """The solver backend itself failed."""


class ConfigurationError(BackendError):
    """The backend is not configured (for example, no external command)."""


class SeparationLimitError(SolverError):
    """The subtour separation loop hit its round cap."""


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


class Sense(enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="

    @classmethod
    def parse(cls, token: str) -> "Sense":
        token = token.strip()
        table = {"<=": cls.LE, "=<": cls.LE, "<": cls.LE, "=": cls.EQ, "==": cls.EQ,
                 ">=": cls.GE, "=>": cls.GE, ">": cls.GE}
        try:
            return table[token]
        except KeyError:
            raise ValueError(f"unknown relation {token!r}") from None


@dataclass(frozen=True)
class Constraint:
    index: np.ndarray  # variable indices, sorted, unique
    coef: np.ndarray
    sense: Sense
    rhs: float
    name: str


class MilpModel:
    """Minimisation model over named variables with sparse linear rows."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.integer: list[bool] = []
        self.obj: list[float] = []
        self.constraints: list[Constraint] = []
        self._index: dict[str, int] = {}

    # -- building
    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf,
                integer: bool = False, obj: float = 0.0) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable name {name!r}")
        if lb > ub:
            raise ValueError(f"variable {name!r} has empty bounds [{lb}, {ub}]")
        idx = len(self.names)
        self._index[name] = idx
        self.names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.integer.append(bool(integer))
        self.obj.append(float(obj))
        return idx

    def add_vars(self, names: list[str], lb: float = 0.0, ub: float = math.inf,
                 integer: bool = False, obj: Iterable[float] | None = None) -> range:
        """Declare several variables sharing bounds and integrality."""
        start = len(self.names)
        objs = [0.0] * len(names) if obj is None else [float(v) for v in obj]
        if len(objs) != len(names):
            raise ValueError("objective length does not match the names")
        for k, name in enumerate(names):
            if name in self._index:
                raise ValueError(f"duplicate variable name {name!r}")
            self._index[name] = start + k
        if lb > ub:
            raise ValueError(f"empty bounds [{lb}, {ub}]")
        self.names.extend(names)
        self.lb.extend([float(lb)] * len(names))
        self.ub.extend([float(ub)] * len(names))
        self.integer.extend([bool(integer)] * len(names))
        self.obj.extend(objs)
        return range(start, start + len(names))

    def add_constraint(self, coeffs: Mapping[int | str, float] | tuple[Iterable[int], Iterable[float]],
                       sense: Sense | str, rhs: float, name: str | None = None) -> int:
        if isinstance(coeffs, tuple):
            idx = np.asarray(list(coeffs[0]), dtype=np.int64)
            val = np.asarray(list(coeffs[1]), dtype=float)
        else:
            keys = [self._index[k] if isinstance(k, str) else int(k) for k in coeffs]
            idx = np.asarray(keys, dtype=np.int64)
            val = np.asarray(list(coeffs.values()), dtype=float)
        if len(idx) and (idx.min() < 0 or idx.max() >= len(self.names)):
            raise ValueError("constraint references an unknown variable")
        if len(idx):
            uniq, inv = np.unique(idx, return_inverse=True)
            summed = np.zeros(len(uniq))
            np.add.at(summed, inv, val)
            keep = summed != 0.0
            idx, val = uniq[keep], summed[keep]
        if not isinstance(sense, Sense):
            sense = Sense.parse(sense)
        row = len(self.constraints)
        self.constraints.append(Constraint(idx, val, sense, float(rhs), name or f"c{row}"))
        return row

    def copy(self) -> "MilpModel":
        other = MilpModel(self.name)
        other.names = list(self.names)
        other.lb = list(self.lb)
        other.ub = list(self.ub)
        other.integer = list(self.integer)
        other.obj = list(self.obj)
        other.constraints = list(self.constraints)
        other._index = dict(self._index)
        return other

    # -- queries
    @property
    def num_vars(self) -> int:
        return len(self.names)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def index(self, name: str) -> int:
        return self._index[name]

    def has_integers(self) -> bool:
        return any(self.integer)

    def matrix(self) -> sparse.csr_matrix:
        m, n = len(self.constraints), len(self.names)
        if m == 0:
            return sparse.csr_matrix((0, n))
        indptr = np.zeros(m + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(c.index) for c in self.constraints])
        indices = np.concatenate([c.index for c in self.constraints]) if indptr[-1] else np.zeros(0, np.int64)
        data = np.concatenate([c.coef for c in self.constraints]) if indptr[-1] else np.zeros(0)
        return sparse.csr_matrix((data, indices, indptr), shape=(m, n))

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.empty(len(self.constraints))
        hi = np.empty(len(self.constraints))
        for r, c in enumerate(self.constraints):
            lo[r] = c.rhs if c.sense in (Sense.EQ, Sense.GE) else -np.inf
            hi[r] = c.rhs if c.sense in (Sense.EQ, Sense.LE) else np.inf
        return lo, hi

    def objective_value(self, x: np.ndarray) -> float:
        return float(np.dot(np.asarray(self.obj), x))

    def max_violation(self, x: np.ndarray) -> float:
        """Largest bound or row violation of the point ``x``."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        if len(x):
            worst = max(float(np.max(np.asarray(self.lb) - x)), float(np.max(x - np.asarray(self.ub))), 0.0)
        if self.constraints:
            act = self.matrix() @ x
            lo, hi = self.row_bounds()
            worst = max(worst, float(np.max(lo - act)), float(np.max(act - hi)))
        return worst


@dataclass
class MilpResult:
    status: Status
    objective: float = math.nan
    x: np.ndarray | None = None
    names: list[str] | None = field(default=None, repr=False)
    nodes: int = 0
    sec_added: int = 0
    rounds: int = 0

    @property
    def values(self) -> dict[str, float]:
        if self.x is None or self.names is None:
            return {}
        return dict(zip(self.names, self.x.tolist()))

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


def finalize(model: MilpModel, status: Status, x: np.ndarray | None, integral: bool,
             nodes: int = 0) -> MilpResult:
    """Snap integer variables, verify feasibility and recompute the objective."""
    if x is None:
        return MilpResult(status, math.nan, None, model.names, nodes)
    x = np.array(x, dtype=float)
    if integral and model.has_integers():
        mask = np.asarray(model.integer)
        rounded = np.round(x[mask])
        if np.any(np.abs(rounded - x[mask]) > INT_TOL):
            raise BackendError("solution violates integrality beyond tolerance")
        x[mask] = rounded
    viol = model.max_violation(x)
    if viol > FEAS_TOL * 10:
        raise BackendError(f"solution violates constraints by {viol:.3g}")
    return MilpResult(status, model.objective_value(x), x, model.names, nodes)
