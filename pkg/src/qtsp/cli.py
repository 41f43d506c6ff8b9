"""Command-line front end: ``qtsp <subcommand> ...``."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence

from .algorithms import ALGORITHM_IDS, Params, make_algorithm, make_improver
from .bench import BenchPlan, generate_instance, lower_bound, exact_optimum, render_svg, run_benchmark, summarize
from .construct import DEFAULT_LENS_GAMMA
from .core import CostModel, Instance, parse_instance, parse_tour, tour_objective, write_instance, write_tour
from .errors import InstanceFormatError, ParameterError, QtspError
from .lp_heur import DEFAULT_THRESHOLD
from .milp import ConfigurationError, SolverBackend

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _global_flags(parser: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--backend", choices=("builtin", "external"), default=d if suppress else "builtin",
                        help="MILP backend (external runs the command in QTSP_MILP_CMD)")
    parser.add_argument("--engine", choices=("highs", "simplex"), default=d if suppress else "highs",
                        help="built-in engine")
    parser.add_argument("--time-limit", type=float, default=d, metavar="SECONDS",
                        help="time limit per MILP/LP solve")
    parser.add_argument("--domain", type=float, default=d, metavar="L",
                        help="side of the point field used by the glass sweep (e.g. 500)")


def _model_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--model", default="angle", choices=("angle", "angle-distance"))
    parser.add_argument("--rho", type=float, default=40.0, help="angle weight of angle-distance")


def _param_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--lens-gamma", type=float, default=math.degrees(DEFAULT_LENS_GAMMA),
                        metavar="DEG", help="lens angle for constructors and hull rings")
    parser.add_argument("--hull-c", type=int, default=20, metavar="C", help="peeling stop size")
    parser.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="LP rounding threshold")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomised improvers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtsp", description="Angle and angle-distance QTSP solver.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        return p

    p = add("gen", "generate a random instance on the 501x501 grid")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", default="angle", choices=("angle", "angle-distance"))
    p.add_argument("-o", "--output", type=Path)

    p = add("solve", "construct a tour, optionally improve it")
    p.add_argument("instance", type=Path)
    p.add_argument("--algo", required=True, choices=ALGORITHM_IDS)
    p.add_argument("--improve", action="append", default=[], metavar="ID",
                   help="2opt, 3opt, glass:k or lenssa[:gamma:iters]; repeatable, applied in order")
    _model_flags(p)
    _param_flags(p)
    p.add_argument("-o", "--output", type=Path, help="tour file")

    p = add("improve", "improve an existing tour")
    p.add_argument("instance", type=Path)
    p.add_argument("tour", type=Path)
    p.add_argument("--improve", action="append", required=True, metavar="ID")
    _model_flags(p)
    _param_flags(p)
    p.add_argument("-o", "--output", type=Path)

    p = add("exact", "optimal tour by integral subtour separation")
    p.add_argument("instance", type=Path)
    _model_flags(p)
    p.add_argument("-o", "--output", type=Path)

    p = add("bound", "LP relaxation lower bound")
    p.add_argument("instance", type=Path)
    _model_flags(p)

    p = add("bench", "run a benchmark plan and write CSV")
    p.add_argument("--sizes", required=True, help="comma-separated n values")
    p.add_argument("--seeds", required=True,
                   help="a count N (seeds 0..N-1) or a comma-separated list")
    p.add_argument("--algos", required=True, help="comma-separated algorithm ids")
    p.add_argument("--improvers", default="", help="comma-separated improver ids")
    p.add_argument("--models", default="angle", help="comma-separated: angle, angle-distance")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--lens-gamma", type=float, default=math.degrees(DEFAULT_LENS_GAMMA), metavar="DEG")
    p.add_argument("--hull-c", type=int, default=20, metavar="C")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--out", type=Path, help="CSV path (stdout if omitted)")
    p.add_argument("--summary", action="store_true", help="print per-group means to stderr")

    p = add("render", "draw an instance and tour as SVG")
    p.add_argument("instance", type=Path)
    p.add_argument("tour", type=Path, nargs="?")
    p.add_argument("-o", "--output", type=Path)
    return parser


def _backend(args) -> SolverBackend:
    return SolverBackend.from_name(args.backend, engine=args.engine, time_limit=args.time_limit)


def _load(args) -> Instance:
    model = CostModel.from_name(getattr(args, "model", "angle"), rho=getattr(args, "rho", 40.0))
    try:
        text = args.instance.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.instance}: {exc}") from None
    return parse_instance(text, model, name=args.instance.stem)


def _params(args) -> Params:
    gamma = math.radians(args.lens_gamma)
    if not 0 < gamma < math.pi / 2:
        raise ParameterError("--lens-gamma must lie strictly between 0 and 90 degrees")
    return Params(gamma, args.hull_c, args.threshold, args.domain, getattr(args, "seed", 0))


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _report(inst: Instance, tour: list[int], path: Path | None):
    print(f"objective {tour_objective(inst, tour):.6f}")
    if path is None:
        sys.stdout.write(write_tour(tour))
    else:
        path.write_text(write_tour(tour))


def _improve_all(inst, tour, specs, params, backend):
    for spec in specs:
        tour = make_improver(spec, params)(inst, tour, backend)
    return tour


def dispatch(args) -> int:
    cmd = args.command
    if cmd == "gen":
        inst = generate_instance(args.n, args.seed, args.model)
        _emit(write_instance(inst), args.output)
        return EXIT_OK
    if cmd == "bench":
        seeds = _ints(args.seeds)
        if len(seeds) == 1 and "," not in args.seeds:
            seeds = list(range(seeds[0]))
        models = [m.strip() for m in args.models.split(",") if m.strip()]
        for m in models:
            CostModel.from_name(m)
        plan = BenchPlan(_ints(args.sizes), seeds, models,
                         [a.strip() for a in args.algos.split(",") if a.strip()],
                         [i.strip() for i in args.improvers.split(",") if i.strip()],
                         _backend(args), _params(args), args.workers)
        records, text = run_benchmark(plan)
        _emit(text, args.out)
        if args.summary:
            for (n, model, label), s in sorted(summarize(records).items()):
                print(f"{n}\t{model}\t{label}\tratio {s.geo_mean_ratio:.4f}\ttime_ms {s.mean_time_ms:.1f}",
                      file=sys.stderr)
        return EXIT_OK if all(r.status == "ok" for r in records) else EXIT_FAILURE
    inst = _load(args)
    backend = _backend(args)
    if cmd == "solve":
        params = _params(args)
        tour = make_algorithm(args.algo, params)(inst, backend)
        tour = _improve_all(inst, tour, args.improve, params, backend)
        _report(inst, tour, args.output)
    elif cmd == "improve":
        tour = parse_tour(args.tour.read_text())
        tour = _improve_all(inst, tour, args.improve, _params(args), backend)
        _report(inst, tour, args.output)
    elif cmd == "exact":
        tour, _ = exact_optimum(inst, backend)
        _report(inst, tour, args.output)
    elif cmd == "bound":
        print(f"lower_bound {lower_bound(inst, backend):.6f}")
    elif cmd == "render":
        tour = parse_tour(args.tour.read_text()) if args.tour else None
        _emit(render_svg(inst, tour), args.output)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return dispatch(args)
    except (UsageError, ParameterError, InstanceFormatError, ConfigurationError) as exc:
        print(f"qtsp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QtspError, OSError) as exc:
        print(f"qtsp: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
