"""Instance generation, bounds, exact baselines, metrics and reports."""

from __future__ import annotations

import csv
import io
import itertools
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np

from .algorithms import Params, make_algorithm, make_improver
from .core import CostModel, Instance, check_tour, tour_objective
from .errors import ParameterError, QtspError
from .lp_heur import build_linearization, solve_qtsp_exact, solve_relaxation
from .milp import SolverBackend

GRID = 500
BRUTE_FORCE_MAX_N = 10
CSV_COLUMNS = ("instance", "n", "model", "algorithm", "improver", "objective",
               "lower_bound", "ratio", "time_ms", "seed", "status")
NO_IMPROVER = "none"


def generate_instance(n: int, seed: int, model: CostModel | str = "angle") -> Instance:
    """n distinct points drawn uniformly from the integer grid {0..500}^2.

    The PCG64 stream is seeded with (seed, n), so each (n, seed) pair is
    reproducible and different sizes do not share point prefixes.
    """
    if n < 3:
        raise ParameterError(f"n must be >= 3, got {n}")
    if n > (GRID + 1) ** 2:
        raise ParameterError("more points requested than grid cells")
    if isinstance(model, str):
        model = CostModel.from_name(model)
    rng = np.random.default_rng([int(seed), int(n)])
    seen: set[tuple[int, int]] = set()
    pts: list[tuple[int, int]] = []
    while len(pts) < n:
        x, y = rng.integers(0, GRID + 1, size=2).tolist()
        if (x, y) not in seen:
            seen.add((x, y))
            pts.append((x, y))
    return Instance(tuple(pts), model, name=f"n{n}_s{seed}_{model.kind.value}", seed=int(seed))


def lower_bound(instance: Instance, backend: SolverBackend | None = None) -> float:
    """LP relaxation value without subtour constraints or integrality."""
    return solve_relaxation(build_linearization(instance), (), backend).objective


def exact_optimum(instance: Instance, backend: SolverBackend | None = None) -> tuple[list[int], float]:
    """Global optimum by integral subtour separation; the value is recomputed from the tour."""
    tour, _ = solve_qtsp_exact(build_linearization(instance), backend)
    return tour, tour_objective(instance, tour)


def brute_force(instance: Instance) -> tuple[list[int], float]:
    """Optimal tour by enumerating the (n-1)!/2 distinct tours (n <= 10)."""
    n = instance.n
    if n > BRUTE_FORCE_MAX_N:
        raise ParameterError(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    if n < 3:
        raise ParameterError("need at least 3 vertices")
    perms = np.array([p for p in itertools.permutations(range(1, n)) if p[0] < p[-1]]
                     if n > 3 else [(1, 2)], dtype=np.int64)
    tours = np.hstack([np.zeros((len(perms), 1), dtype=np.int64), perms])
    C = instance.costs
    vals = C[np.roll(tours, 1, axis=1), tours, np.roll(tours, -1, axis=1)].sum(axis=1)
    # re-score near-ties exactly so summation order cannot pick a worse tour
    near = np.flatnonzero(vals <= vals.min() + 1e-6)
    exact = [(tour_objective(instance, tours[k]), k) for k in near]
    val, k = min(exact)
    return tours[k].tolist(), val


def brute_force_optimum(instance: Instance) -> float:
    return brute_force(instance)[1]


@dataclass
class RunRecord:
    instance: str
    n: int
    model: str
    algorithm: str
    improver: str
    objective: float
    lower_bound: float
    ratio: float
    time_ms: float
    seed: int
    status: str = "ok"

    @property
    def label(self) -> str:
        return self.algorithm if self.improver == NO_IMPROVER else f"{self.algorithm}+{self.improver}"


@dataclass(frozen=True)
class Summary:
    count: int
    geo_mean_ratio: float
    mean_time_ms: float


def summarize(records: Iterable[RunRecord]) -> dict[tuple[int, str, str], Summary]:
    """Geometric mean ratio and arithmetic mean time per (n, model, algorithm label)."""
    groups: dict[tuple[int, str, str], list[RunRecord]] = {}
    for r in records:
        if r.status == "ok":
            groups.setdefault((r.n, r.model, r.label), []).append(r)
    return {k: Summary(len(v), statistics.geometric_mean([r.ratio for r in v]),
                       statistics.fmean([r.time_ms for r in v]))
            for k, v in groups.items()}


@dataclass(frozen=True)
class BenchPlan:
    sizes: Sequence[int]
    seeds: Sequence[int]
    models: Sequence[str] = ("angle",)
    algorithms: Sequence[str] = ("cif",)
    improvers: Sequence[str] = ()
    backend: SolverBackend | None = None
    params: Params = field(default_factory=Params)
    workers: int = 1

    def tasks(self) -> list[tuple[int, int, str]]:
        return [(n, s, m) for m in self.models for n in self.sizes for s in self.seeds]


def _run_instance(plan: BenchPlan, n: int, seed: int, model: str) -> list[RunRecord]:
    inst = generate_instance(n, seed, model)
    kind = inst.model.kind.value
    try:
        lb = lower_bound(inst, plan.backend)
    except QtspError:
        lb = math.nan

    def record(algo, imp, tour, ms, status):
        obj = tour_objective(inst, tour) if tour is not None else math.nan
        ok = status == "ok" and math.isfinite(lb) and lb > 0
        ratio = obj / lb if ok else math.nan
        return RunRecord(inst.name, n, kind, algo, imp, obj, lb, ratio, ms, seed,
                         status if math.isfinite(lb) else "failed")

    out = []
    for algo in plan.algorithms:
        params = Params(plan.params.lens_gamma, plan.params.hull_c, plan.params.threshold,
                        plan.params.domain, seed)
        t0 = time.perf_counter()
        try:
            tour = check_tour(inst, make_algorithm(algo, params)(inst, plan.backend))
            status = "ok"
        except QtspError:
            tour, status = None, "failed"
        base_ms = (time.perf_counter() - t0) * 1000.0
        out.append(record(algo, NO_IMPROVER, tour, base_ms, status))
        for imp in plan.improvers:
            if tour is None:
                out.append(record(algo, imp, None, 0.0, "skipped"))
                continue
            t1 = time.perf_counter()
            try:
                better = check_tour(inst, make_improver(imp, params)(inst, tour, plan.backend))
                st = "ok"
            except QtspError:
                better, st = None, "failed"
            out.append(record(algo, imp, better, base_ms + (time.perf_counter() - t1) * 1000.0, st))
    return out


def _run_task(args):
    return _run_instance(*args)


def run_benchmark(plan: BenchPlan) -> tuple[list[RunRecord], str]:
    """Run every (model, n, seed) instance of the plan; rows keep plan order."""
    for a in plan.algorithms:
        make_algorithm(a)
    for i in plan.improvers:
        make_improver(i)
    jobs = [(plan, n, s, m) for n, s, m in plan.tasks()]
    if plan.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            chunks = list(pool.map(_run_task, jobs))
    else:
        chunks = [_run_task(j) for j in jobs]
    records = [r for chunk in chunks for r in chunk]
    return records, records_to_csv(records)


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6f}"
    return str(v)


def records_to_csv(records: Iterable[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, f.name)) for f in fields(RunRecord)])
    return buf.getvalue()


def parse_csv(text: str) -> list[RunRecord]:
    rows = csv.DictReader(io.StringIO(text))
    out = []
    for row in rows:
        out.append(RunRecord(row["instance"], int(row["n"]), row["model"], row["algorithm"],
                             row["improver"], float(row["objective"]), float(row["lower_bound"]),
                             float(row["ratio"]), float(row["time_ms"]), int(row["seed"]), row["status"]))
    return out


def render_svg(instance: Instance, tour: Sequence[int] | None = None, size: int = 600) -> str:
    """SVG drawing of the points and, when given, the closed tour."""
    c = instance.coords
    lo, hi = c.min(axis=0), c.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    margin = 0.05 * span
    x0, y0 = lo - margin
    w, h = span + 2 * margin
    r = 0.006 * max(w, h)

    def pt(v):
        return f"{c[v, 0]:.6g},{(hi[1] + lo[1] - c[v, 1]):.6g}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{x0:.6g} {y0:.6g} {w:.6g} {h:.6g}">',
    ]
    if tour is not None:
        tour = check_tour(instance, tour)
        lines.append(f'<polyline points="{" ".join(pt(v) for v in tour + tour[:1])}" fill="none" '
                     f'stroke="black" stroke-width="{r / 2:.6g}"/>')
    for v in range(instance.n):
        x, y = pt(v).split(",")
        lines.append(f'<circle cx="{x}" cy="{y}" r="{r:.6g}" fill="red"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
