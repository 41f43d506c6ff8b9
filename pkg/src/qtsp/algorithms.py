"""Registry of construction algorithms and improvers by their short ids."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .construct import DEFAULT_LENS_GAMMA, NnConfig, cheapest_insertion, nearest_neighbour, nn_best_over_starts
from .core import Instance
from .errors import ParameterError
from .hull_heur import HullConfig, convex_hull_heuristic
from .improve import DEFAULT_SA_GAMMA, DEFAULT_SA_ITERATIONS, GlassConfig, SaConfig, lens_sa, magnifying_glass, three_opt, two_opt
from .lp_heur import DEFAULT_THRESHOLD, LpConfig, LpVariant, lp_heuristic
from .milp import SolverBackend

Constructor = Callable[[Instance, "SolverBackend | None"], list[int]]
Improver = Callable[[Instance, list[int], "SolverBackend | None"], list[int]]

ALGORITHM_IDS = ("nn", "nns", "nns2", "nnl", "nnsl", "cif", "ch", "chc", "chl", "chcl",
                 "lpp", "lppr", "lpc1", "lpc1r", "lpc2", "lpc2r")
NN_START = (0, 1)


@dataclass(frozen=True)
class Params:
    """Tunable parameters shared by the registry entries."""

    lens_gamma: float = DEFAULT_LENS_GAMMA
    hull_c: int = 20
    threshold: float = DEFAULT_THRESHOLD
    domain: float | None = None
    seed: int = 0


def make_algorithm(algo_id: str, params: Params | None = None) -> Constructor:
    p = params or Params()
    g = p.lens_gamma
    nn = {
        "nn": lambda: NnConfig(),
        "nnl": lambda: NnConfig(lens_gamma=g),
        "nns": lambda: NnConfig(all_starts=True),
        "nns2": lambda: NnConfig(all_starts=True, two_opt_per_start=True),
        "nnsl": lambda: NnConfig(all_starts=True, lens_gamma=g),
    }
    if algo_id in ("nn", "nnl"):
        cfg = nn[algo_id]()
        return lambda inst, backend=None: nearest_neighbour(inst, NN_START, cfg)
    if algo_id in nn:
        cfg = nn[algo_id]()
        return lambda inst, backend=None: nn_best_over_starts(inst, cfg)
    if algo_id == "cif":
        return lambda inst, backend=None: cheapest_insertion(inst)
    hulls = {"ch": (2, None), "chc": (p.hull_c, None), "chl": (2, g), "chcl": (p.hull_c, g)}
    if algo_id in hulls:
        C, lens = hulls[algo_id]
        hcfg = HullConfig(C=C, lens_gamma=lens, merge="greedy")
        return lambda inst, backend=None: convex_hull_heuristic(inst, hcfg, backend)
    if algo_id in ("lpp", "lppr", "lpc1", "lpc1r", "lpc2", "lpc2r"):
        rerun = algo_id.endswith("r")
        variant = LpVariant(algo_id[:-1] if rerun else algo_id)
        lcfg = LpConfig(variant, rerun, p.threshold)
        return lambda inst, backend=None: lp_heuristic(inst, lcfg, backend)
    raise ParameterError(f"unknown algorithm {algo_id!r}; choose from {', '.join(ALGORITHM_IDS)}")


def make_improver(spec: str, params: Params | None = None) -> Improver:
    """Parse ``2opt``, ``3opt``, ``glass:k`` or ``lenssa[:gamma_degrees:iterations]``."""
    p = params or Params()
    parts = spec.split(":")
    name, args = parts[0], parts[1:]
    try:
        if name == "2opt" and not args:
            return lambda inst, tour, backend=None: two_opt(inst, tour)
        if name == "3opt" and not args:
            return lambda inst, tour, backend=None: three_opt(inst, tour)
        if name == "glass" and len(args) == 1:
            gcfg = GlassConfig(k=int(args[0]), domain=p.domain)
            return lambda inst, tour, backend=None: magnifying_glass(inst, tour, gcfg, backend)
        if name == "lenssa" and len(args) in (0, 2):
            gamma = math.radians(float(args[0])) if args else DEFAULT_SA_GAMMA
            iters = int(args[1]) if args else DEFAULT_SA_ITERATIONS
            scfg = SaConfig(gamma, iters, p.seed)
            return lambda inst, tour, backend=None: lens_sa(inst, tour, scfg)
    except ValueError as exc:
        raise ParameterError(f"bad improver {spec!r}: {exc}") from None
    raise ParameterError(f"unknown improver {spec!r}; use 2opt, 3opt, glass:k or lenssa[:gamma:iters]")
