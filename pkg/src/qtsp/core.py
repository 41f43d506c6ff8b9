"""Instances, cost models and objective evaluation.

A tour is a sequence of vertex indices interpreted cyclically; a path is the
same sequence read without wrap-around. Both are plain ``list[int]`` values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DegenerateGeometryError,
    DuplicatePointError,
    InstanceFormatError,
    InvalidTourError,
    ParameterError,
)

#: Absolute tolerance for comparing objective values.
OBJ_TOL = 1e-6


class Point(NamedTuple):
    x: float
    y: float


class CostKind(enum.Enum):
    ANGLE = "angle"
    ANGLE_DISTANCE = "angle-distance"


@dataclass(frozen=True)
class CostModel:
    """Transition cost c_ijk of passing vertex j on the way from i to k.

    Angle: ``round(scale * alpha, decimals)``.
    AngleDistance: ``round(scale * (rho * alpha + (d_ij + d_jk) / 2), decimals)``.
    """

    kind: CostKind = CostKind.ANGLE
    rho: float = 40.0
    scale: float = 1000.0
    decimals: int = 12

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterError(f"scale must be positive, got {self.scale}")
        if self.decimals < 0:
            raise ParameterError(f"decimals must be >= 0, got {self.decimals}")
        if not self.rho >= 0:
            raise ParameterError(f"rho must be nonnegative, got {self.rho}")

    @classmethod
    def angle(cls, scale: float = 1000.0, decimals: int = 12) -> "CostModel":
        return cls(CostKind.ANGLE, rho=0.0, scale=scale, decimals=decimals)

    @classmethod
    def angle_distance(cls, rho: float = 40.0, scale: float = 100.0,
                       decimals: int = 12) -> "CostModel":
        return cls(CostKind.ANGLE_DISTANCE, rho=rho, scale=scale, decimals=decimals)

    @classmethod
    def from_name(cls, name: str, rho: float = 40.0) -> "CostModel":
        """Model by CLI name: ``angle`` or ``angle-distance`` (alias ``angledist``)."""
        key = name.strip().lower()
        if key == "angle":
            return cls.angle()
        if key in ("angle-distance", "angledist", "angle_distance", "angledistance"):
            return cls.angle_distance(rho=rho)
        raise ParameterError(f"unknown cost model {name!r}")


def _cost_tensor(coords: np.ndarray, model: CostModel) -> np.ndarray:
    n = len(coords)
    diff = coords[None, :, :] - coords[:, None, :]  # diff[i, j] = p_j - p_i
    dist = np.hypot(diff[..., 0], diff[..., 1])
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = diff / dist[..., None]
    # cos of the turn at j: direction i->j dotted with direction j->k
    cos = np.einsum("ijd,jkd->ijk", unit, unit)
    sin = np.abs(np.einsum("ij,jk->ijk", unit[..., 0], unit[..., 1])
                 - np.einsum("ij,jk->ijk", unit[..., 1], unit[..., 0]))
    # same angle as arccos(clip(cos, -1, 1)) but without its loss of precision near 0 and pi
    alpha = np.arctan2(sin, cos)
    if model.kind is CostKind.ANGLE:
        raw = model.scale * alpha
    else:
        half = (dist[:, :, None] + dist[None, :, :]) / 2.0
        raw = model.scale * (model.rho * alpha + half)
    costs = np.round(raw, model.decimals)
    idx = np.arange(n)
    costs[idx, idx, :] = np.nan
    costs[:, idx, idx] = np.nan
    return np.ascontiguousarray(costs)


@dataclass(frozen=True)
class Instance:
    """Distinct planar points plus the cost model that prices transitions."""

    points: tuple[Point, ...]
    model: CostModel = field(default_factory=CostModel.angle)
    name: str = ""
    seed: int | None = None

    def __post_init__(self):
        pts = tuple(Point(float(x), float(y)) for x, y in self.points)
        for p in pts:
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise InstanceFormatError(f"non-finite coordinate {p}")
        seen: dict[Point, int] = {}
        for i, p in enumerate(pts):
            if p in seen:
                raise DuplicatePointError(
                    f"points {seen[p]} and {i} coincide at ({p.x}, {p.y})")
            seen[p] = i
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def coords(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(-1, 2)

    @cached_property
    def dist(self) -> np.ndarray:
        c = self.coords
        return np.hypot(c[:, None, 0] - c[None, :, 0], c[:, None, 1] - c[None, :, 1])

    @cached_property
    def costs(self) -> np.ndarray:
        """Dense tensor ``C[i, j, k]``; entries with i == j or j == k are NaN."""
        return _cost_tensor(self.coords, self.model)

    def with_model(self, model: CostModel) -> "Instance":
        return Instance(self.points, model, self.name, self.seed)


def transition_cost(instance: Instance, i: int, j: int, k: int) -> float:
    n = instance.n
    for v in (i, j, k):
        if not 0 <= v < n:
            raise IndexError(f"vertex {v} out of range for n={n}")
    if i == j or j == k:
        raise DegenerateGeometryError(f"zero-length direction in triple ({i}, {j}, {k})")
    return float(instance.costs[i, j, k])


def check_tour(instance: Instance, tour: Sequence[int]) -> list[int]:
    """Validate a Hamiltonian tour and return it as a list."""
    order = [int(v) for v in tour]
    n = instance.n
    if n < 3 or len(order) != n:
        raise InvalidTourError(f"tour has {len(order)} vertices, instance has {n}")
    if sorted(order) != list(range(n)):
        raise InvalidTourError("tour is not a permutation of the vertices")
    return order


def check_path(instance: Instance, path: Sequence[int]) -> list[int]:
    order = [int(v) for v in path]
    if not order:
        raise InvalidTourError("empty path")
    if len(set(order)) != len(order):
        raise InvalidTourError("path repeats a vertex")
    if min(order) < 0 or max(order) >= instance.n:
        raise InvalidTourError("path vertex out of range")
    return order


def tour_objective(instance: Instance, tour: Sequence[int]) -> float:
    order = np.asarray(check_tour(instance, tour), dtype=np.intp)
    return math.fsum(instance.costs[np.roll(order, 1), order, np.roll(order, -1)].tolist())


def path_objective(instance: Instance, path: Sequence[int]) -> float:
    order = np.asarray(check_path(instance, path), dtype=np.intp)
    if len(order) <= 2:
        return 0.0
    return math.fsum(instance.costs[order[:-2], order[1:-1], order[2:]].tolist())


def tour_edges(tour: Sequence[int]) -> set[tuple[int, int]]:
    """Undirected edge set of a closed tour, each edge as (min, max)."""
    m = len(tour)
    return {(min(tour[i], tour[(i + 1) % m]), max(tour[i], tour[(i + 1) % m]))
            for i in range(m)}


def canonical_tour(tour: Sequence[int]) -> list[int]:
    """Rotate to start at the smallest vertex, oriented toward the smaller neighbour."""
    t = list(tour)
    s = t.index(min(t))
    t = t[s:] + t[:s]
    if len(t) > 2 and t[-1] < t[1]:
        t = [t[0]] + t[:0:-1]
    return t


# ---------------------------------------------------------------- file format

def _format_number(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def parse_instance(text: str, model: CostModel | None = None, name: str = "") -> Instance:
    """Read the ``qtsp 1`` text format; ``#`` lines and blank lines are ignored."""
    rows: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s and not s.startswith("#"):
            rows.append((lineno, s))
    if not rows:
        raise InstanceFormatError("empty instance text", 1)
    lineno, head = rows[0]
    if head.split() != ["qtsp", "1"]:
        raise InstanceFormatError(f"expected header 'qtsp 1', got {head!r}", lineno)
    if len(rows) < 2:
        raise InstanceFormatError("missing point count", lineno + 1)
    lineno, count = rows[1]
    try:
        n = int(count)
    except ValueError:
        raise InstanceFormatError(f"point count must be an integer, got {count!r}", lineno) from None
    if n < 1:
        raise InstanceFormatError(f"point count must be positive, got {n}", lineno)
    body = rows[2:]
    if len(body) != n:
        where = body[n][0] if len(body) > n else (body[-1][0] + 1 if body else lineno + 1)
        raise InstanceFormatError(f"expected {n} coordinate lines, found {len(body)}", where)
    points = []
    seen: dict[tuple[float, float], int] = {}
    for lineno, s in body:
        parts = s.split()
        if len(parts) != 2:
            raise InstanceFormatError(f"expected 'x y', got {s!r}", lineno)
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise InstanceFormatError(f"bad number in {s!r}", lineno) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InstanceFormatError(f"non-finite coordinate in {s!r}", lineno)
        if (x, y) in seen:
            raise DuplicatePointError(
                f"line {lineno}: point ({x}, {y}) repeats line {seen[(x, y)]}")
        seen[(x, y)] = lineno
        points.append(Point(x, y))
    return Instance(tuple(points), model or CostModel.angle(), name)


def write_instance(instance: Instance) -> str:
    lines = ["qtsp 1", str(instance.n)]
    lines += [f"{_format_number(p.x)} {_format_number(p.y)}" for p in instance.points]
    return "\n".join(lines) + "\n"


def parse_tour(text: str) -> list[int]:
    """Whitespace-separated vertex indices; ``#`` comment lines ignored."""
    tokens = []
    for raw in text.splitlines():
        s = raw.strip()
        if s and not s.startswith("#"):
            tokens.extend(s.split())
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise InvalidTourError(f"bad tour token: {exc}") from None


def write_tour(tour: Sequence[int]) -> str:
    return "\n".join(str(int(v)) for v in tour) + "\n"
