"""Convex hulls, hull peeling and the lens region around an edge."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Instance, Point
from .errors import ParameterError

# Relative slack on the disk test so that points on the boundary arcs count as inside.
LENS_EPS = 1e-9


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Sequence[Sequence[float]]) -> list[int]:
    """Indices of the strict convex hull in counter-clockwise order.

    Monotone chain over lexicographically sorted points. Collinear boundary
    points are dropped. One- and two-point inputs are returned unchanged.
    """
    pts = [(float(p[0]), float(p[1])) for p in points]
    if len(pts) <= 2:
        return list(range(len(pts)))
    order = sorted(range(len(pts)), key=lambda i: (pts[i], i))

    def chain(seq):
        out: list[int] = []
        for i in seq:
            while len(out) >= 2 and _cross(pts[out[-2]], pts[out[-1]], pts[i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(reversed(order))
    ring = lower[:-1] + upper[:-1]
    return ring


@dataclass(frozen=True)
class HullLayering:
    layers: list[list[int]]
    remainder: list[int] = field(default_factory=list)


def peel_hulls(instance: Instance, stop_at: int) -> HullLayering:
    """Remove hull rings, outermost first, until at most ``stop_at`` vertices remain.

    A hull with fewer than three vertices (collinear leftovers) ends the peeling
    and its vertices stay in the remainder.
    """
    if stop_at < 2:
        raise ParameterError(f"stop_at must be >= 2, got {stop_at}")
    coords = instance.coords
    remaining = list(range(instance.n))
    layers: list[list[int]] = []
    while len(remaining) > stop_at:
        local = convex_hull(coords[remaining])
        if len(local) < 3:
            break
        ring = [remaining[i] for i in local]
        layers.append(ring)
        taken = set(ring)
        remaining = [v for v in remaining if v not in taken]
    return HullLayering(layers, remaining)


@dataclass(frozen=True)
class Lens:
    """Intersection of two congruent disks whose boundary circles pass through p and q.

    ``gamma`` is the angle between the chord pq and either boundary arc.
    """

    p: Point
    q: Point
    gamma: float
    radius: float
    centers: tuple[Point, Point]


def lens_region(p: Sequence[float], q: Sequence[float], gamma: float) -> Lens:
    if not 0.0 < gamma < math.pi / 2:
        raise ParameterError(f"lens angle must lie in (0, pi/2), got {gamma}")
    px, py = float(p[0]), float(p[1])
    qx, qy = float(q[0]), float(q[1])
    dx, dy = qx - px, qy - py
    d = math.hypot(dx, dy)
    if d == 0.0:
        raise ParameterError("lens endpoints coincide")
    radius = d / (2.0 * math.sin(gamma))
    offset = d / (2.0 * math.tan(gamma))
    mx, my = (px + qx) / 2.0, (py + qy) / 2.0
    nx, ny = -dy / d, dx / d
    centers = (Point(mx + offset * nx, my + offset * ny), Point(mx - offset * nx, my - offset * ny))
    return Lens(Point(px, py), Point(qx, qy), float(gamma), radius, centers)


def lens_mask(lens: Lens, coords: np.ndarray) -> np.ndarray:
    """Vectorised membership for an ``(m, 2)`` coordinate array."""
    coords = np.asarray(coords, dtype=float).reshape(-1, 2)
    limit = lens.radius * (1.0 + LENS_EPS)
    inside = np.ones(len(coords), dtype=bool)
    for c in lens.centers:
        inside &= np.hypot(coords[:, 0] - c.x, coords[:, 1] - c.y) <= limit
    for e in (lens.p, lens.q):
        inside &= ~((coords[:, 0] == e.x) & (coords[:, 1] == e.y))
    return inside


def lens_contains(lens: Lens, r: Sequence[float]) -> bool:
    return bool(lens_mask(lens, np.array([r], dtype=float))[0])


def detour_bound(d: float, gamma: float) -> float:
    """Upper bound on |pr| + |rq| - |pq| for r inside the lens on pq."""
    if not d > 0:
        raise ParameterError(f"edge length must be positive, got {d}")
    if not 0.0 < gamma < math.pi / 2:
        raise ParameterError(f"lens angle must lie in (0, pi/2), got {gamma}")
    return d * (math.sqrt(2.0 / (1.0 - math.cos(math.pi - 2.0 * gamma))) - 1.0)
