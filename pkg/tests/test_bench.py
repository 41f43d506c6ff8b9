import math
import xml.etree.ElementTree as ET

import pytest

from oracles import ref_brute_force
from qtsp.bench import (
    CSV_COLUMNS, BenchPlan, RunRecord, brute_force, exact_optimum, generate_instance, lower_bound, parse_csv,
    records_to_csv, render_svg, run_benchmark, summarize,
)
from qtsp.core import CostKind
from qtsp.errors import ParameterError


def test_generator_deterministic_distinct_on_grid():
    a = generate_instance(50, 3)
    b = generate_instance(50, 3)
    assert a.points == b.points
    assert len(set(a.points)) == 50
    assert all(0 <= x <= 500 and 0 <= y <= 500 and x == int(x) and y == int(y) for x, y in a.points)
    assert generate_instance(50, 4).points != a.points
    assert generate_instance(50, 3, "angle-distance").model.kind is CostKind.ANGLE_DISTANCE
    with pytest.raises(ParameterError):
        generate_instance(2, 0)


@pytest.mark.parametrize("seed", range(3))
def test_bound_exact_brute_force_agree(seed):
    inst = generate_instance(8, seed, "angle-distance")
    opt = ref_brute_force(inst.points, "angle-distance")
    assert brute_force(inst)[1] == pytest.approx(opt, abs=1e-6)
    assert exact_optimum(inst)[1] == pytest.approx(opt, abs=1e-5)
    assert lower_bound(inst) <= opt + 1e-6


def test_brute_force_limit():
    with pytest.raises(ParameterError):
        brute_force(generate_instance(11, 0))


def _rec(n, label, ratio, ms, improver="none", status="ok"):
    return RunRecord("i", n, "angle", label, improver, 1.0, 1.0, ratio, ms, 0, status)


def test_summarize_geometric_mean_and_skip_failures():
    recs = [_rec(10, "cif", 1.0, 2.0), _rec(10, "cif", 4.0, 4.0), _rec(10, "cif", math.nan, 9.0, status="failed"),
            _rec(10, "cif", 9.0, 6.0, improver="2opt")]
    s = summarize(recs)
    assert s[(10, "angle", "cif")].geo_mean_ratio == pytest.approx(2.0)
    assert s[(10, "angle", "cif")].mean_time_ms == pytest.approx(3.0)
    assert s[(10, "angle", "cif")].count == 2
    assert s[(10, "angle", "cif+2opt")].count == 1


def test_benchmark_rows_and_csv_roundtrip():
    plan = BenchPlan([8, 10], [0, 1], ("angle", "angle-distance"), ("nn", "cif"), ("2opt",))
    records, text = run_benchmark(plan)
    assert len(records) == 2 * 2 * 2 * 2 * 2
    lines = text.strip().split("\n")
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 1 + len(records)
    back = parse_csv(text)
    assert [(r.instance, r.algorithm, r.improver) for r in back] == [(r.instance, r.algorithm, r.improver) for r in records]
    for r in records:
        assert r.status == "ok" and r.ratio >= 1.0 - 1e-9
        assert r.ratio == pytest.approx(r.objective / r.lower_bound)
    base = {(r.instance, r.algorithm): r for r in records if r.improver == "none"}
    for r in records:
        if r.improver == "2opt":
            b = base[(r.instance, r.algorithm)]
            assert r.objective <= b.objective + 1e-9 and r.time_ms >= b.time_ms
    assert records_to_csv(records) == text


def test_benchmark_parallel_matches_serial():
    plan = BenchPlan([8], [0, 1, 2], ("angle",), ("cif",))
    serial, _ = run_benchmark(plan)
    par, _ = run_benchmark(BenchPlan([8], [0, 1, 2], ("angle",), ("cif",), workers=2))
    assert [r.objective for r in serial] == [r.objective for r in par]


def test_benchmark_rejects_unknown_ids():
    with pytest.raises(ParameterError):
        run_benchmark(BenchPlan([8], [0], algorithms=("nope",)))


def test_svg_is_wellformed():
    inst = generate_instance(12, 1)
    root = ET.fromstring(render_svg(inst, list(range(12))))
    tags = [el.tag.split("}")[1] for el in root]
    assert tags.count("circle") == 12 and tags.count("polyline") == 1
    pts = root.find("{http://www.w3.org/2000/svg}polyline").get("points").split()
    assert len(pts) == 13 and pts[0] == pts[-1]
    assert "polyline" not in render_svg(inst)
