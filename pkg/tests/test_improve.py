import logging
import math

import numpy as np
import pytest

from conftest import TOUR_POINTS, RAW_ANGLE
from oracles import ref_brute_force, ref_tour_value
from qtsp.core import CostModel, Instance, tour_objective
from qtsp.errors import ParameterError
from qtsp.improve import (
    GlassConfig, SaConfig, acceptance_probability, build_window_model, glass_geometry, glass_windows,
    lens_neighbourhood, lens_sa, magnifying_glass, reoptimize_window, temperature, three_opt, two_opt,
)
from qtsp.milp import SolverBackend


def _random(n, seed, kind="angle", grid=False):
    rng = np.random.default_rng(seed)
    if grid:
        flat = rng.choice(501 * 501, n, replace=False)
        pts = [(int(p) // 501, int(p) % 501) for p in flat]
    else:
        pts = [tuple(p) for p in rng.uniform(0, 100, (n, 2))]
    return Instance(pts, CostModel.from_name(kind)), pts


def _reversals(tour):
    n = len(tour)
    for i in range(1, n - 1):
        for j in range(i + 1, n):
            yield tour[:i] + tour[i:j + 1][::-1] + tour[j + 1:]


@pytest.mark.parametrize("seed", range(4))
def test_two_and_three_opt_monotone_and_bounded(seed):
    inst, pts = _random(8, seed, "angle-distance")
    start = list(np.random.default_rng(seed).permutation(8))
    opt = ref_brute_force(pts, "angle-distance")
    z0 = ref_tour_value(pts, start, "angle-distance")
    for improver in (two_opt, three_opt):
        t = improver(inst, start)
        assert sorted(t) == list(range(8))
        z = ref_tour_value(pts, t, "angle-distance")
        assert opt - 1e-6 <= z <= z0 + 1e-9


@pytest.mark.parametrize("improver", [two_opt, three_opt])
def test_result_is_two_opt_stable(improver):
    inst, pts = _random(12, 5)
    t = improver(inst, list(range(12)))
    z = ref_tour_value(pts, t)
    assert all(ref_tour_value(pts, r) >= z - 1e-6 for r in _reversals(t))


def test_three_opt_not_worse_than_start_of_two_opt_optimum():
    inst, _ = _random(15, 6)
    t2 = two_opt(inst, list(range(15)))
    t3 = three_opt(inst, t2)
    assert tour_objective(inst, t3) <= tour_objective(inst, t2) + 1e-9


def test_window_model_two_paths_eight_isolated():
    inst, _ = _random(20, 7)
    model = build_window_model(inst, list(range(20)), {0, 1, 2, 3, 10, 11, 12, 13})
    assert model.isolated == [0, 1, 2, 3, 10, 11, 12, 13]
    assert model.paths == [[4, 5, 6, 7, 8, 9], [14, 15, 16, 17, 18, 19]]
    assert model.size == 12
    # an endpoint turn needs its partner: a^1 in the middle without b^1 is forbidden
    a1, b1 = 8, 9
    assert np.isnan(model.weights[0, a1, 1])
    assert model.weights[b1, a1, 0] == pytest.approx(inst.costs[5, 4, 0])


def test_window_short_pieces_are_dissolved():
    inst, _ = _random(12, 8)
    model = build_window_model(inst, list(range(12)), {0, 4})
    # pieces [1,2,3] (too short) and [5..11]
    assert model.isolated == [0, 1, 2, 3, 4]
    assert model.paths == [[5, 6, 7, 8, 9, 10, 11]]


@pytest.mark.parametrize("seed", range(3))
def test_window_over_all_vertices_is_exact(seed):
    inst, pts = _random(8, seed + 20)
    t = reoptimize_window(inst, list(range(8)), range(8))
    assert tour_objective(inst, t) == pytest.approx(ref_brute_force(pts), abs=1e-6)


def test_window_never_worsens_and_keeps_outside_paths():
    inst, _ = _random(25, 9, "angle-distance")
    tour = list(range(25))
    S = {3, 4, 5, 6, 7}
    out = reoptimize_window(inst, tour, S)
    assert sorted(out) == list(range(25))
    assert tour_objective(inst, out) <= tour_objective(inst, tour) + 1e-9
    pos = {v: p for p, v in enumerate(out)}
    for v in range(9, 24):
        assert abs(pos[v] - pos[v + 1]) in (1, 24)


def test_window_solver_failure_keeps_tour(tmp_path, caplog, monkeypatch):
    inst, _ = _random(10, 10)
    monkeypatch.setenv("QTSP_MILP_CMD", "false {lp} {sol}")
    backend = SolverBackend.from_name("external")
    with caplog.at_level(logging.WARNING):
        out = reoptimize_window(inst, list(range(10)), range(10), backend)
    assert out == list(range(10))
    assert "keeping the tour" in caplog.text


def test_glass_geometry_on_grid():
    inst, _ = _random(60, 11, grid=True)
    s, stride = glass_geometry(inst, GlassConfig(k=15, domain=500))
    assert (s, stride) == (250.0, 167.0)
    with pytest.raises(ParameterError):
        GlassConfig(k=3)


def test_glass_windows_cover_every_vertex():
    for seed in range(3):
        inst, _ = _random(80, seed, grid=True)
        covered = set().union(*map(set, glass_windows(inst, GlassConfig(k=10))))
        assert covered == set(range(80))


def test_magnifying_glass_monotone():
    inst, _ = _random(24, 12, "angle-distance", grid=True)
    tour = list(range(24))
    out = magnifying_glass(inst, tour, GlassConfig(k=8))
    assert sorted(out) == list(range(24))
    assert tour_objective(inst, out) <= tour_objective(inst, tour) + 1e-9


def test_lens_tour_lens_neighbour():
    inst = Instance(TOUR_POINTS, RAW_ANGLE)
    nb = lens_neighbourhood(inst, list(range(11)), math.radians(30))
    target = [0, 7, 1, 2, 3, 4, 5, 6, 8, 9, 10]
    assert target in nb
    assert tour_objective(inst, target) == pytest.approx(12.5664, abs=5e-4)


def test_lens_move_deltas_match_recomputation():
    from qtsp.improve import _lens_moves, _relocate

    inst, pts = _random(30, 13)
    tour = list(np.random.default_rng(1).permutation(30))
    I, L, delta = _lens_moves(inst, tour, math.radians(35))
    assert len(I) > 0
    z = ref_tour_value(pts, tour)
    for i, l, d in zip(I, L, delta):
        assert ref_tour_value(pts, _relocate(tour, int(i), int(l))) - z == pytest.approx(d, abs=1e-6)


def test_acceptance_rules():
    assert acceptance_probability(10.0, 12.0, 5, 0.0) == 0.0
    assert acceptance_probability(0.0, 1.0, 5, 0.5) == 0.0
    assert acceptance_probability(10.0, 10.0, 5, 0.5) == 1.0
    assert acceptance_probability(10.0, 11.0, 5, 0.5) == pytest.approx(math.exp(-1.0))
    assert temperature(0, 100) == 1.0 and temperature(100, 100) == 0.0


def test_lens_sa_deterministic_and_monotone():
    inst, _ = _random(30, 14, "angle-distance")
    tour = list(range(30))
    a = lens_sa(inst, tour, SaConfig(max_iterations=200, rng_seed=3))
    b = lens_sa(inst, tour, SaConfig(max_iterations=200, rng_seed=3))
    assert a == b
    assert tour_objective(inst, a) <= tour_objective(inst, tour) + 1e-9


def test_lens_sa_empty_neighbourhood_returns_input():
    pts = [(math.cos(2 * math.pi * k / 9), math.sin(2 * math.pi * k / 9)) for k in range(9)]
    inst = Instance(pts)
    assert lens_neighbourhood(inst, list(range(9)), math.radians(20)) == []
    assert lens_sa(inst, list(range(9))) == list(range(9))


def test_sa_config_validation():
    with pytest.raises(ParameterError):
        SaConfig(max_iterations=0)
    with pytest.raises(ParameterError):
        SaConfig(gamma=2.0)
