import itertools
import math

import numpy as np
import pytest

from oracles import all_tours, edge_set, ref_brute_force, ref_cost, ref_tour_value
from qtsp.core import CostModel, Instance, tour_edges, tour_objective
from qtsp.errors import InvalidTourError, ParameterError
from qtsp.hull_heur import (
    HullConfig, build_cycle_merge_graph, convex_hull_heuristic, greedy_merge, ilp_merge_cycles, peel_rings,
)
from qtsp.merge import CONN, LONG, SHORT, decode_merge, merge_model


def _cyc_edges(c):
    return edge_set(c)


def _merge_oracle(points, cycles, kind="angle"):
    """Best tour that keeps all but one edge of every cycle (exhaustive)."""
    verts = sorted(v for c in cycles for v in c)
    best = math.inf
    for t in all_tours(len(verts)):
        te = edge_set(t)
        if all(len(te & _cyc_edges(c)) == len(c) - 1 for c in cycles):
            best = min(best, ref_tour_value(points, t, kind))
    return best


def _two_squares():
    # v1..v4 counter-clockwise on the left square, w1..w4 on the right one
    pts = [(0, 0), (1, 0), (1, 1), (0, 1), (2, 0.1), (3, 0), (3, 1), (2, 1.1)]
    return Instance(pts, CostModel.angle_distance()), [[0, 1, 2, 3], [4, 5, 6, 7]]


def test_two_square_merge_graph_counts():
    inst, cycles = _two_squares()
    g = build_cycle_merge_graph(inst, cycles)
    assert g.num_vertices == 16
    assert len(g.edges_of(SHORT)) == 8 and len(g.edges_of(LONG)) == 8
    assert len(g.edges_of(CONN)) == 64


def test_cycle_merge_weights():
    inst, cycles = _two_squares()
    g = build_cycle_merge_graph(inst, cycles)
    a2, b2 = g.cycle_pairs[0][1]
    k = g.edges.index((min(a2, b2), max(a2, b2)))
    assert g.weights[k] == pytest.approx(ref_cost(inst.points, 0, 1, 2, "angle-distance"), abs=1e-9)
    assert all(g.weights[i] == 0.0 for i in g.edges_of(LONG))
    # connecting weight is the pair of turns the new edge creates
    b1w = g.cycle_pairs[1][0][1]
    k = g.edges.index((a2, b1w))
    expect = ref_cost(inst.points, 0, 1, 4, "angle-distance") + ref_cost(inst.points, 1, 4, 5, "angle-distance")
    assert g.weights[k] == pytest.approx(expect, abs=1e-9)


def test_hand_set_merge_decode():
    inst, cycles = _two_squares()
    g = build_cycle_merge_graph(inst, cycles)
    P, Q = g.cycle_pairs[0], g.cycle_pairs[1]
    chosen = []
    for j in range(4):
        if j != 1:  # drop long {b2, a3} of the first cycle
            chosen.append((P[j][1], P[(j + 1) % 4][0]))
        if j != 3:  # drop long {b4, a1} of the second cycle
            chosen.append((Q[j][1], Q[(j + 1) % 4][0]))
    chosen += [P[0], P[3], Q[1], Q[2]]  # shorts that stay
    chosen += [(P[1][0], Q[0][1]), (Q[3][0], P[2][1])]  # {a2, b1'} and {a4', b3}
    x = np.zeros(len(g.edges))
    for u, v in chosen:
        x[g.edges.index((min(u, v), max(u, v)))] = 1.0
    tour = decode_merge(g, x)
    expected = [0, 1, 4, 5, 6, 7, 2, 3]
    assert tour_edges(tour) == tour_edges(expected)
    assert math.fsum(np.asarray(g.weights)[x > 0.5]) == pytest.approx(tour_objective(inst, tour), abs=1e-6)


def test_merge_model_row_count():
    inst, cycles = _two_squares()
    g = build_cycle_merge_graph(inst, cycles)
    model, _ = merge_model(g)
    assert model.num_constraints == 16 + 2 * (2 + 2 * 4 + 1)


def test_greedy_two_squares_matches_exhaustive():
    inst, cycles = _two_squares()
    got = tour_objective(inst, greedy_merge(inst, cycles))
    assert got == pytest.approx(_merge_oracle(inst.points, cycles, "angle-distance"), abs=1e-6)


def test_two_triangles_ilp_and_greedy_match_exhaustive():
    pts = [(0, 0), (4, 1), (1, 5), (10, 0), (14, 3), (9, 6)]
    inst = Instance(pts)
    cycles = [[0, 1, 2], [3, 4, 5]]
    best = _merge_oracle(pts, cycles)
    assert tour_objective(inst, ilp_merge_cycles(inst, cycles)) == pytest.approx(best, abs=1e-6)
    assert tour_objective(inst, greedy_merge(inst, cycles)) == pytest.approx(best, abs=1e-6)


def test_three_cycles_ilp_matches_exhaustive():
    pts = [(0, 0), (4, 1), (1, 5), (10, 0), (14, 3), (9, 6), (5, 10), (8, 12), (3, 13)]
    inst = Instance(pts)
    cycles = [[0, 1, 2], [3, 4, 5], [6, 7, 8]]
    tour = ilp_merge_cycles(inst, cycles)
    assert sorted(tour) == list(range(9))
    te = tour_edges(tour)
    for c in cycles:
        assert len(te & tour_edges(c)) == 2
    assert tour_objective(inst, tour) == pytest.approx(_merge_oracle(pts, cycles), abs=1e-6)


def test_greedy_three_cycles_valid_and_single_unchanged():
    pts = [(0, 0), (4, 1), (1, 5), (10, 0), (14, 3), (9, 6), (5, 10), (8, 12), (3, 13)]
    inst = Instance(pts)
    assert sorted(greedy_merge(inst, [[0, 1, 2], [3, 4, 5], [6, 7, 8]])) == list(range(9))
    assert greedy_merge(inst, [[2, 0, 1, 3, 4, 5, 6, 7, 8]]) == [2, 0, 1, 3, 4, 5, 6, 7, 8]
    assert ilp_merge_cycles(inst, [[2, 0, 1, 3, 4, 5, 6, 7, 8]]) == [2, 0, 1, 3, 4, 5, 6, 7, 8]


def test_merge_rejects_bad_cycles():
    inst = Instance([(0, 0), (1, 0), (0, 1), (5, 5), (6, 5)])
    with pytest.raises(InvalidTourError):
        greedy_merge(inst, [[0, 1, 2], [3, 4]])
    with pytest.raises(InvalidTourError):
        build_cycle_merge_graph(inst, [[0, 1, 2], [2, 3, 4]])


def test_peel_rings_nested_squares():
    pts = [(0, 0), (10, 0), (10, 10), (0, 10), (3, 3), (7, 3), (7, 7), (3, 7), (5, 5)]
    rings, rest = peel_rings(Instance(pts), 2)
    assert [sorted(r) for r in rings] == [[0, 1, 2, 3], [4, 5, 6, 7]]
    assert rest == [8]


def test_convex_ring_is_returned_and_optimal():
    pts = [(math.cos(2 * math.pi * k / 7), math.sin(2 * math.pi * k / 7)) for k in range(7)]
    inst = Instance(pts)
    tour = convex_hull_heuristic(inst, HullConfig(C=2))
    assert tour_objective(inst, tour) == pytest.approx(2000 * math.pi, abs=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_hull_c_covering_instance_is_exact(seed):
    rng = np.random.default_rng(seed)
    pts = [tuple(p) for p in rng.uniform(0, 100, (8, 2))]
    inst = Instance(pts)
    tour = convex_hull_heuristic(inst, HullConfig(C=20))
    assert tour_objective(inst, tour) == pytest.approx(ref_brute_force(pts), abs=1e-6)


@pytest.mark.parametrize("cfg", [HullConfig(C=2), HullConfig(C=6), HullConfig(C=2, lens_gamma=0.7),
                                 HullConfig(C=6, lens_gamma=0.7), HullConfig(C=2, merge="ilp")])
def test_hull_variants_valid_and_bounded(cfg):
    rng = np.random.default_rng(7)
    pts = [tuple(p) for p in rng.uniform(0, 100, (9, 2))]
    inst = Instance(pts, CostModel.angle_distance())
    tour = convex_hull_heuristic(inst, cfg)
    assert sorted(tour) == list(range(9))
    assert tour_objective(inst, tour) >= ref_brute_force(pts, "angle-distance") - 1e-6


def test_hull_config_validation():
    with pytest.raises(ParameterError):
        HullConfig(C=1)
    with pytest.raises(ParameterError):
        HullConfig(merge="best")
