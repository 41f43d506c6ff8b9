import math

import numpy as np
import pytest

from oracles import ref_brute_force, ref_cost, ref_tour_value
from qtsp.core import CostModel, Instance, tour_edges, tour_objective
from qtsp.errors import ParameterError
from qtsp.lp_heur import (
    LpConfig, LpVariant, PartialSolution, build_linearization, build_path_merge_graph, lp_heuristic,
    merge_paths_and_cycles_ilp, merge_paths_ilp, round_fractional, solve_qtsp_exact, solve_relaxation,
)
from qtsp.merge import CONN, PATH
from qtsp.milp import SolverError


def _random(n, seed, kind="angle"):
    rng = np.random.default_rng(seed)
    pts = [tuple(p) for p in rng.uniform(0, 100, (n, 2))]
    return Instance(pts, CostModel.from_name(kind)), pts


def test_linearization_counts():
    lin = build_linearization(Instance([(0, 0), (1, 0), (1, 1), (0, 1)]))
    assert len(lin.edge_vars) == 6
    assert len(lin.triples) == 12
    assert lin.model.num_vars == 18
    assert lin.model.num_constraints == 4 + 2 * 6


def test_triples_are_canonical_and_costed():
    inst, pts = _random(5, 0)
    lin = build_linearization(inst)
    assert len(lin.triples) == 5 * 6
    for k, (u, v, t) in enumerate(lin.triples.tolist()):
        assert u < t and v not in (u, t)
        assert lin.model.obj[lin.y_start + k] == pytest.approx(ref_cost(pts, u, v, t), abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_exact_n5_matches_brute_force(seed):
    inst, pts = _random(5, seed, "angle-distance")
    tour, obj = solve_qtsp_exact(build_linearization(inst))
    assert obj == pytest.approx(ref_brute_force(pts, "angle-distance"), abs=1e-5)
    assert tour_objective(inst, tour) == pytest.approx(obj, abs=1e-5)


def test_relaxation_triangle_is_integral():
    relax = solve_relaxation(build_linearization(Instance([(0, 0), (3, 1), (1, 4)])))
    assert all(v == pytest.approx(1.0) for v in relax.x.values())


@pytest.mark.parametrize("seed", range(3))
def test_relaxation_is_lower_bound_and_fixings_monotone(seed):
    inst, pts = _random(8, seed)
    lin = build_linearization(inst)
    base = solve_relaxation(lin)
    assert base.objective <= ref_brute_force(pts) + 1e-6
    fixed = solve_relaxation(lin, [(0, 1)])
    assert fixed.x[(0, 1)] == pytest.approx(1.0)
    assert fixed.objective >= base.objective - 1e-7
    more = solve_relaxation(lin, [(0, 1), (2, 5)])
    assert more.objective >= fixed.objective - 1e-7


def test_infeasible_fixings_raise():
    inst, _ = _random(6, 1)
    with pytest.raises(SolverError):
        solve_relaxation(build_linearization(inst), [(0, 1), (0, 2), (0, 3)])


def test_round_threshold_rule():
    part = round_fractional({(0, 1): 0.9, (1, 2): 0.6, (2, 3): 0.4}, 0.5, n=4)
    assert part.edges() == [(0, 1), (1, 2)]
    assert part.paths == [[0, 1, 2]] and part.isolated == [3]


def test_round_rejects_cycle_closing_edge():
    part = round_fractional({(0, 1): 0.9, (1, 2): 0.9, (0, 2): 0.9}, 0.5, n=3)
    assert part.edges() == [(0, 1), (0, 2)] and not part.cycles


def test_round_allows_cycle_on_integral_tour():
    tour = [0, 3, 1, 4, 2]
    x = {e: 1.0 for e in tour_edges(tour)}
    part = round_fractional(x, 0.5, allow_cycles=True, n=5)
    assert len(part.cycles) == 1 and not part.paths and not part.isolated
    assert tour_edges(part.cycles[0]) == tour_edges(tour)


def test_round_degree_rule_and_bad_threshold():
    part = round_fractional({(0, 1): 0.9, (0, 2): 0.8, (0, 3): 0.7}, 0.5, n=4)
    assert part.edges() == [(0, 1), (0, 2)]
    with pytest.raises(ParameterError):
        round_fractional({}, 1.0)


def test_three_path_merge_graph():
    inst, pts = _random(9, 3)
    paths = [[0, 1, 2], [3, 4, 5], [6, 7, 8]]
    g = build_path_merge_graph(inst, paths)
    assert g.num_vertices == 6
    assert len(g.edges_of(PATH)) == 3
    assert len(g.edges_of(CONN)) == 12
    a1, a2 = g.path_ends[0][0], g.path_ends[1][0]
    w = g.weights[g.edges.index((a1, a2))]
    assert w == pytest.approx(ref_cost(pts, 1, 0, 3) + ref_cost(pts, 0, 3, 4), abs=1e-9)


def test_two_short_paths_best_joining():
    inst, pts = _random(4, 4)
    tour = merge_paths_ilp(inst, [[0, 1], [2, 3]])
    options = [[0, 1, 2, 3], [0, 1, 3, 2]]
    assert tour_objective(inst, tour) == pytest.approx(min(ref_tour_value(pts, o) for o in options), abs=1e-6)


def test_merged_paths_stay_intact():
    inst, _ = _random(9, 5)
    paths = [[0, 1, 2], [3, 4, 5], [6, 7, 8]]
    tour = merge_paths_ilp(inst, paths)
    assert sorted(tour) == list(range(9))
    te = tour_edges(tour)
    for p in paths:
        assert tour_edges(p) - {(min(p[0], p[-1]), max(p[0], p[-1]))} <= te


def test_mixed_merge_without_cycles_equals_path_merge():
    inst, _ = _random(9, 6)
    paths = [[0, 1, 2], [3, 4, 5], [6, 7, 8]]
    a = tour_objective(inst, merge_paths_ilp(inst, paths))
    b = tour_objective(inst, merge_paths_and_cycles_ilp(inst, PartialSolution(paths=paths)))
    assert a == pytest.approx(b, abs=1e-6)


def test_mixed_merge_keeps_cycle_structure():
    inst, _ = _random(9, 7)
    tour = merge_paths_and_cycles_ilp(inst, PartialSolution(paths=[[6, 7, 8]], cycles=[[0, 1, 2], [3, 4, 5]]))
    assert sorted(tour) == list(range(9))
    te = tour_edges(tour)
    assert {(6, 7), (7, 8)} <= te
    for c in ([0, 1, 2], [3, 4, 5]):
        assert len(te & tour_edges(c)) == 2


@pytest.mark.parametrize("variant", list(LpVariant))
@pytest.mark.parametrize("rerun", [False, True])
def test_every_variant_gives_valid_bounded_tour(variant, rerun):
    for seed in range(2):
        inst, pts = _random(8, seed + 10, "angle-distance")
        tour = lp_heuristic(inst, LpConfig(variant, rerun))
        assert sorted(tour) == list(range(8))
        assert tour_objective(inst, tour) >= ref_brute_force(pts, "angle-distance") - 1e-6


def test_variants_on_larger_instance():
    inst, _ = _random(20, 11)
    relax = solve_relaxation(build_linearization(inst))
    for variant in LpVariant:
        for rerun in (False, True):
            assert sorted(lp_heuristic(inst, LpConfig(variant, rerun), relaxation=relax)) == list(range(20))
