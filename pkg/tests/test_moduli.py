import logging
import math

import numpy as np
import pytest

from graph_pressure.catalog import EXAMPLES, closed_forms, sample_points
from graph_pressure.errors import GraphError, InfeasiblePointError
from graph_pressure.moduli import (chart_path, coordinate_tangents, feasible, make_chart, metric_tensor,
                                   normalize_entropy, parse_kind, random_directions, solve_dependent_edge,
                                   tangent_from_direction, volume_term)
from graph_pressure.thermo import entropy, pressure

LOG2, LOG3 = math.log(2), math.log(3)


def test_parse_kind_aliases():
    assert parse_kind("P") == parse_kind("pressure") == "P"
    assert parse_kind("WP") == parse_kind("weil-petersson") == "WP"
    with pytest.raises(ValueError, match="unknown metric"):
        parse_kind("L2")


def test_normalize_entropy(catalog):
    sys = catalog["figure8"][1]
    out = normalize_entropy(sys, {"e1": 1.0, "e2": 1.0})
    assert list(out) == ["e1", "e2"]
    assert out["e1"] == pytest.approx(LOG3, abs=1e-12)
    assert entropy(sys, out) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(GraphError):
        normalize_entropy(sys, {"e1": 1.0, "e2": -1.0})


def test_make_chart_defaults(catalog):
    sys = catalog["belt-buckle"][1]
    chart = make_chart(sys)
    assert chart.dependent == "e3"
    assert chart.free_edges == ("e1", "e2")
    assert chart.dim == 2 and chart.dep_index == 2
    other = make_chart(sys, "e1")
    assert other.free_edges == ("e2", "e3") and other.free_indices == (1, 2)
    with pytest.raises(GraphError, match="unknown edge"):
        make_chart(sys, "e7")


@pytest.mark.parametrize(
    "example, free, want",
    [
        ("figure8", (LOG3,), LOG3),
        ("belt-buckle", (LOG2, LOG2), LOG2),
        ("dumbbell", (LOG2, LOG2), LOG2),
    ],
)
def test_solve_known_points(charts, example, free, want):
    assert solve_dependent_edge(charts[example], free) == pytest.approx(want, abs=1e-12)


def test_solve_matches_closed_forms(catalog, charts, rng):
    for eid in EXAMPLES:
        forms = catalog[eid][2]
        chart = charts[eid]
        for i, p in enumerate(sample_points(eid, 200, rng)):
            s = chart.solve(p)
            assert s == pytest.approx(forms("surface", p), rel=1e-9), (eid, p)
            lv = chart.assemble(p, s)
            assert abs(pressure(chart.system, -lv)) <= 1e-12
            if i % 20:
                continue
            assert chart.solve(p, guess=1.3 * s) == pytest.approx(s, rel=1e-12)
            assert chart.solve(p, guess=0.7 * s) == pytest.approx(s, rel=1e-12)


def test_infeasible_points(charts):
    # e^4 > 3 + 2e^2
    ok, margin = feasible(charts["belt-buckle"], (2.0, 2.0))
    assert not ok and margin == 0.0
    assert feasible(charts["belt-buckle"], (LOG2, LOG2))[0]
    with pytest.raises(InfeasiblePointError):
        charts["dumbbell"].solve((2.0, 2.0))
    with pytest.raises(InfeasiblePointError):
        charts["rose"].solve((0.5, 0.5))
    with pytest.raises(InfeasiblePointError):
        charts["figure8"].solve((0.0,))
    with pytest.raises(InfeasiblePointError):
        charts["belt-buckle"].solve((-1.0, 1.0))
    with pytest.raises(GraphError, match="expects 2"):
        charts["belt-buckle"].solve((1.0,))


def test_feasibility_agrees_with_inequalities(catalog, charts, rng):
    for eid in ("belt-buckle", "dumbbell", "rose"):
        forms = catalog[eid][2]
        for p in rng.uniform(0.1, 4.0, size=(30, 2)):
            want = forms.feasible(*p)
            # skip a thin band around the boundary curve
            if want and forms.forms["surface"].fn(*p) < 1e-6:
                continue
            assert charts[eid].feasible(p)[0] == want, (eid, p)


def test_figure8_derivatives(catalog, charts):
    forms = catalog["figure8"][2]
    chart = charts["figure8"]
    for x in (0.2, 0.9, LOG3, 3.0):
        assert chart.gradient((x,))[0] == pytest.approx(forms("dS", x), rel=1e-10)
        assert chart.gradient((x,), method="difference")[0] == pytest.approx(forms("dS", x), rel=1e-7)
        assert chart.hessian((x,))[0, 0] == pytest.approx(forms("d2S", x), rel=1e-9)
        assert chart.hessian((x,), method="difference")[0, 0] == pytest.approx(forms("d2S", x), rel=1e-5)
    with pytest.raises(ValueError):
        chart.gradient((1.0,), method="spline")
    with pytest.raises(ValueError):
        chart.hessian((1.0,), method="spline")


def test_implicit_and_difference_hessians_agree(charts, rng):
    for eid in ("belt-buckle", "dumbbell", "rose"):
        chart = charts[eid]
        for p in sample_points(eid, 3, rng, margin=0.1):
            a = chart.hessian(p)
            b = chart.hessian(p, method="difference")
            assert np.allclose(a, a.T)
            assert np.allclose(a, b, rtol=1e-5, atol=1e-7 * np.abs(a).max()), eid


def test_tangents_are_tangent(charts, rng):
    for eid in EXAMPLES:
        chart = charts[eid]
        p = sample_points(eid, 1, rng)[0]
        pt = chart.point(p)
        rows = coordinate_tangents(chart, p)
        assert rows.shape == (chart.dim, chart.system.size)
        assert np.abs(rows @ pt.perron.p).max() <= 1e-8
        for d in random_directions(rng, chart.dim, 5):
            phi = tangent_from_direction(chart, p, d, point=pt)
            assert abs(phi @ pt.perron.p) <= 1e-12
            assert np.allclose(phi[: chart.system.k], phi[chart.system.k:])


def test_random_directions_are_unit(rng):
    d = random_directions(rng, 2, 10)
    assert d.shape == (10, 2)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0)


def test_chart_path_stays_on_surface(charts):
    chart = charts["dumbbell"]
    path = chart_path(chart, (0.5, 0.8), (1.0, -0.3))
    assert np.allclose(path(0.0), chart.assemble((0.5, 0.8), chart.solve((0.5, 0.8))))
    for t in (-0.05, 0.02, 0.1):
        lv = path(t)
        assert lv[0] == pytest.approx(0.5 + t)
        assert abs(pressure(chart.system, -lv)) <= 1e-12


def test_figure8_tensor_at_symmetric_point(charts):
    chart = charts["figure8"]
    p = metric_tensor(chart, (LOG3,), "P")
    assert p.E == pytest.approx(0.5, rel=1e-9)
    assert p.F is None and p.G is None
    assert p.volume == pytest.approx(LOG3, rel=1e-12)
    wp = metric_tensor(chart, (LOG3,), "WP")
    assert wp.E == pytest.approx(1 / (2 * LOG3), rel=1e-9)
    assert not wp.degraded


def test_belt_buckle_tensor_at_log2(charts):
    s = metric_tensor(charts["belt-buckle"], (LOG2, LOG2), "P")
    assert s.E == pytest.approx(2 / 9, rel=1e-8)
    assert s.F == pytest.approx(1 / 9, rel=1e-8)
    assert s.G == pytest.approx(2 / 9, rel=1e-8)
    assert s.norm2((1.0, 1.0)) == pytest.approx(2 / 3, rel=1e-8)
    assert s.volume == pytest.approx(LOG2, rel=1e-12)
    with pytest.raises(ValueError):
        s.matrix[0, 0] = 1.0


def test_dumbbell_tensor_is_diagonal(charts, rng):
    forms = closed_forms("dumbbell")
    for p in sample_points("dumbbell", 5, rng):
        s = metric_tensor(charts["dumbbell"], p, "P")
        assert abs(s.F) <= 1e-10
        assert s.E == pytest.approx(forms("E_P", p), rel=1e-7)
        assert s.G == pytest.approx(forms("G_P", p), rel=1e-7)


def test_wp_is_p_over_volume(charts, rng):
    for eid in ("rose", "belt-buckle"):
        p = sample_points(eid, 1, rng)[0]
        sp = metric_tensor(charts[eid], p, "P")
        swp = metric_tensor(charts[eid], p, "WP")
        assert np.allclose(swp.matrix * sp.volume, sp.matrix, rtol=1e-12)
        pt = charts[eid].point(p)
        assert volume_term(pt.perron, pt.lengths) == pytest.approx(sp.volume)
        assert volume_term(pt.perron, pt.lengths) == pytest.approx(closed_forms(eid)("V", p), rel=1e-9)


def test_volume_term_shape(charts):
    pt = charts["figure8"].point((1.0,))
    with pytest.raises(GraphError):
        volume_term(pt.perron, [1.0, 2.0])


def test_tensor_near_boundary_is_flagged(charts, caplog):
    chart = charts["figure8"]
    # S(x) -> 0 as x -> inf; S(20) ~ 4 e^-20
    with caplog.at_level(logging.WARNING, logger="graph_pressure.moduli"):
        s = metric_tensor(chart, (20.0,), "P")
    assert s.degraded
    assert "near-boundary" in caplog.text
