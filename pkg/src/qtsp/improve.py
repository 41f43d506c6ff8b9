"""Tour improvement: 2-opt, 3-opt, the magnifying glass and lens simulated annealing."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .core import Instance, check_tour, tour_objective
from .errors import ParameterError, QtspError
from .geometry import LENS_EPS
from .lp_heur import linearize, solve_qtsp_exact
from .milp import SolverBackend

log = logging.getLogger(__name__)

DEFAULT_SA_GAMMA = math.radians(20.0)
DEFAULT_SA_ITERATIONS = 2000
# Shortest path that survives window reoptimization; shorter ones are dissolved.
MIN_KEPT_PATH = 4


def _keep_better(instance: Instance, old: list[int], new: Sequence[int]) -> list[int]:
    new = [int(v) for v in new]
    if tour_objective(instance, new) < tour_objective(instance, old):
        return new
    return old


def two_opt(instance: Instance, tour: Sequence[int]) -> list[int]:
    """First-improvement 2-opt until no segment reversal gains."""
    tour = check_tour(instance, tour)
    out = _kernels.two_opt_kernel(instance.costs, np.asarray(tour, dtype=np.int64))
    return _keep_better(instance, tour, out.tolist())


def three_opt(instance: Instance, tour: Sequence[int]) -> list[int]:
    """First-improvement 3-opt over the seven reconnections, 2-opt moves included."""
    tour = check_tour(instance, tour)
    out = _kernels.three_opt_kernel(instance.costs, np.asarray(tour, dtype=np.int64), _kernels.PATTERNS)
    return _keep_better(instance, tour, out.tolist())


# ---------------------------------------------------------------- magnifying glass

@dataclass(frozen=True)
class WindowModel:
    """Reduced QTSP of one window: auxiliary vertices and their original meaning."""

    isolated: list[int]
    paths: list[list[int]]
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.isolated) + 2 * len(self.paths)


def _split_tour(tour: list[int], S: set[int]) -> list[list[int]]:
    """Pieces left after removing every tour edge with an endpoint in S."""
    n = len(tour)
    cut = [tour[p] in S or tour[(p + 1) % n] in S for p in range(n)]
    start = cut.index(True)
    pieces, cur = [], []
    for off in range(1, n + 1):
        p = (start + off) % n
        cur.append(tour[p])
        if cut[p]:
            pieces.append(cur)
            cur = []
    return pieces


def build_window_model(instance: Instance, tour: Sequence[int], S: Iterable[int]) -> WindowModel:
    """Isolated vertices and surviving paths of a window, with the reduced weights.

    Auxiliary order: the isolated vertices, then (a^i, b^i) per path. A path
    endpoint may only be the middle of a transition that uses its partner on
    one side; such a transition costs the turn at that endpoint.
    """
    tour = [int(v) for v in tour]
    pieces = _split_tour(tour, set(int(v) for v in S))
    paths = [p for p in pieces if len(p) >= MIN_KEPT_PATH]
    isolated = sorted(v for p in pieces if len(p) < MIN_KEPT_PATH for v in p)
    k = len(isolated)
    real = list(isolated)
    inner = list(isolated)
    partner = [-1] * k
    for i, p in enumerate(paths):
        a, b = k + 2 * i, k + 2 * i + 1
        real += [p[0], p[-1]]
        inner += [p[1], p[-2]]
        partner += [b, a]
    m = len(real)
    C = instance.costs
    R = np.asarray(real)
    W = C[np.ix_(R, R, R)].copy()
    idx = np.arange(m)
    W[idx, :, idx] = np.nan  # u == t
    for v in range(k, m):
        inn, pv = inner[v], partner[v]
        W[:, v, :] = np.nan
        others = np.array([u for u in range(m) if u not in (v, pv)], dtype=np.int64)
        W[pv, v, others] = C[inn, real[v], R[others]]
        W[others, v, pv] = C[R[others], real[v], inn]
    return WindowModel(isolated, paths, W)


def _decode_window(model: WindowModel, aux_tour: list[int]) -> list[int]:
    k = len(model.isolated)
    m = len(aux_tour)

    def partner(x):
        return -1 if x < k else (x + 1 if (x - k) % 2 == 0 else x - 1)

    # rotate so the sequence does not start inside a fixed pair
    if partner(aux_tour[0]) == aux_tour[-1]:
        aux_tour = aux_tour[-1:] + aux_tour[:-1]
    out: list[int] = []
    pos = 0
    while pos < m:
        x = aux_tour[pos]
        if x < k:
            out.append(model.isolated[x])
            pos += 1
            continue
        path = model.paths[(x - k) // 2]
        out.extend(path if (x - k) % 2 == 0 else path[::-1])
        pos += 2
    return out


def reoptimize_window(instance: Instance, tour: Sequence[int], S: Iterable[int],
                      backend: SolverBackend | None = None) -> list[int]:
    """Rewire the tour optimally around the vertex set S, keeping the long paths intact.

    Never returns a worse tour: on solver failure the input comes back and a
    warning is logged.
    """
    tour = check_tour(instance, tour)
    S = set(int(v) for v in S)
    if not S:
        return tour
    model = build_window_model(instance, tour, S)
    if model.size <= 3:
        return tour
    k = len(model.isolated)
    fixings = [(k + 2 * i, k + 2 * i + 1) for i in range(len(model.paths))]
    try:
        aux, _ = solve_qtsp_exact(linearize(model.weights), backend, fixings)
        new = _decode_window(model, aux)
        check_tour(instance, new)
    except QtspError as exc:
        log.warning("window reoptimization failed, keeping the tour: %s", exc)
        return tour
    return _keep_better(instance, tour, new)


@dataclass(frozen=True)
class GlassConfig:
    """``k``: expected vertices per window; ``domain`` overrides the side L of the point field."""

    k: int = 15
    domain: float | None = None

    def __post_init__(self):
        if self.k < 4:
            raise ParameterError(f"k must be >= 4, got {self.k}")
        if self.domain is not None and not self.domain > 0:
            raise ParameterError(f"domain must be positive, got {self.domain}")


def glass_geometry(instance: Instance, config: GlassConfig) -> tuple[float, float]:
    """Window side s and stride; both rounded to integers on integral coordinates."""
    c = instance.coords
    span = c.max(axis=0) - c.min(axis=0)
    L = config.domain if config.domain is not None else float(span.max())
    s = L * math.sqrt(config.k / instance.n)
    stride = 2.0 * s / 3.0
    if np.all(c == np.round(c)):
        s = max(float(round(s)), 1.0)
        stride = max(float(round(2.0 * s / 3.0)), 1.0)
    if not s > 0:
        raise ParameterError("window side must be positive")
    return s, stride


def glass_windows(instance: Instance, config: GlassConfig) -> list[list[int]]:
    """Vertex sets of the sweep, rows top to bottom, windows left to right (closed squares)."""
    s, stride = glass_geometry(instance, config)
    c = instance.coords
    x0, x1 = float(c[:, 0].min()), float(c[:, 0].max())
    y1, y0 = float(c[:, 1].max()), float(c[:, 1].min())

    def starts(lo, hi):
        out = [lo]
        while out[-1] + s < hi:
            out.append(out[-1] + stride)
        return out

    windows = []
    for top in starts(-y1, -y0):
        for left in starts(x0, x1):
            inside = ((c[:, 0] >= left) & (c[:, 0] <= left + s)
                      & (c[:, 1] <= -top) & (c[:, 1] >= -top - s))
            windows.append(np.flatnonzero(inside).tolist())
    return windows


def magnifying_glass(instance: Instance, tour: Sequence[int], config: GlassConfig | None = None,
                     backend: SolverBackend | None = None) -> list[int]:
    """Sweep the square window over the plane and reoptimize each window in turn."""
    config = config or GlassConfig()
    tour = check_tour(instance, tour)
    for S in glass_windows(instance, config):
        if S:
            tour = reoptimize_window(instance, tour, S, backend)
    return tour


# ---------------------------------------------------------------- lens neighbourhood

def _lens_moves(instance: Instance, tour: Sequence[int], gamma: float):
    """All relocation moves (edge position i, vertex position l) with their objective deltas."""
    if not 0.0 < gamma < math.pi / 2:
        raise ParameterError(f"lens angle must lie in (0, pi/2), got {gamma}")
    T = np.asarray(tour, dtype=np.int64)
    n = len(T)
    empty = np.zeros(0, dtype=np.int64)
    if n < 5:
        return empty, empty, np.zeros(0)
    xy = instance.coords[T]
    P, Q = xy, np.roll(xy, -1, axis=0)
    dvec = Q - P
    d = np.hypot(dvec[:, 0], dvec[:, 1])
    radius = d / (2.0 * math.sin(gamma))
    offset = d / (2.0 * math.tan(gamma))
    normal = np.stack([-dvec[:, 1], dvec[:, 0]], axis=1) / d[:, None]
    mid = (P + Q) / 2.0
    limit = (radius * (1.0 + LENS_EPS))[:, None]
    inside = np.ones((n, n), dtype=bool)
    for sign in (1.0, -1.0):
        center = mid + sign * offset[:, None] * normal
        dist = np.hypot(xy[None, :, 0] - center[:, None, 0], xy[None, :, 1] - center[:, None, 1])
        inside &= dist <= limit
    pos = np.arange(n)
    for shift in (-1, 0, 1, 2):
        inside[pos, (pos + shift) % n] = False
    I, Lp = np.nonzero(inside)
    C = instance.costs
    t = lambda off, base: T[(base + off) % n]  # noqa: E731
    tim, ti, ti1, ti2 = t(-1, I), t(0, I), t(1, I), t(2, I)
    tlm2, tlm, tl, tlp, tlp2 = t(-2, Lp), t(-1, Lp), t(0, Lp), t(1, Lp), t(2, Lp)
    old = C[tim, ti, ti1] + C[ti, ti1, ti2] + C[tlm, tl, tlp] + C[tlm2, tlm, tl] + C[tl, tlp, tlp2]
    new = C[tim, ti, tl] + C[tl, ti1, ti2] + C[ti, tl, ti1] + C[tlm2, tlm, tlp] + C[tlm, tlp, tlp2]
    return I, Lp, new - old


def _relocate(tour: list[int], i: int, l: int) -> list[int]:
    n = len(tour)
    v, after = tour[l], tour[(i + 1) % n]
    out = tour[:l] + tour[l + 1:]
    out.insert(out.index(after), v)
    return out


def lens_neighbourhood(instance: Instance, tour: Sequence[int], gamma: float) -> list[list[int]]:
    """Tours obtained by moving a vertex that lies in the lens of a tour edge onto that edge."""
    tour = check_tour(instance, tour)
    I, Lp, _ = _lens_moves(instance, tour, gamma)
    return [_relocate(tour, int(i), int(l)) for i, l in zip(I, Lp)]


@dataclass(frozen=True)
class SaConfig:
    gamma: float = DEFAULT_SA_GAMMA
    max_iterations: int = DEFAULT_SA_ITERATIONS
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ParameterError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0.0 < self.gamma < math.pi / 2:
            raise ParameterError(f"lens angle must lie in (0, pi/2), got {self.gamma}")


def temperature(ell: int, max_iterations: int) -> float:
    return (max_iterations - ell) / max_iterations


def acceptance_probability(z_cur: float, z_new: float, n: int, t: float) -> float:
    """Chance of moving to a tour that is not better; 0 when t = 0 or z = 0."""
    if t <= 0.0 or z_cur <= 0.0:
        return 0.0
    return math.exp(((z_cur - z_new) / z_cur) * n / t)


def lens_sa(instance: Instance, tour: Sequence[int], config: SaConfig | None = None) -> list[int]:
    """Simulated annealing over the lens neighbourhood with least-cost choice.

    Returns the best tour seen.
    """
    config = config or SaConfig()
    cur = check_tour(instance, tour)
    n = len(cur)
    rng = np.random.default_rng(config.rng_seed)
    z_cur = tour_objective(instance, cur)
    best, z_best = cur, z_cur
    for ell in range(config.max_iterations):
        I, Lp, delta = _lens_moves(instance, cur, config.gamma)
        if not len(delta):
            break
        k = int(np.argmin(delta))
        cand = _relocate(cur, int(I[k]), int(Lp[k]))
        z_new = tour_objective(instance, cand)
        if z_new < z_cur:
            accept = True
        else:
            p = acceptance_probability(z_cur, z_new, n, temperature(ell, config.max_iterations))
            accept = rng.random() < p
        if accept:
            cur, z_cur = cand, z_new
            if z_cur < z_best:
                best, z_best = cur, z_cur
    return best
