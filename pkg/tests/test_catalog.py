import math

import numpy as np
import pytest

from graph_pressure.catalog import (EXAMPLES, Report, catalog_graph, closed_form_eval, closed_forms, graph_text,
                                    printed_adjacency, sample_points, verify)
from graph_pressure.errors import InfeasiblePointError, UnknownQuantityError
from graph_pressure.moduli import metric_tensor

LOG2, LOG3 = math.log(2), math.log(3)


def test_packaged_graphs_load():
    for eid in EXAMPLES:
        assert "edge" in graph_text(eid)
        g, sys, forms = catalog_graph(eid)
        assert g.name == eid
        assert forms.example == eid
        assert forms.dependent == sys.edge_ids[-1]
    with pytest.raises(KeyError):
        catalog_graph("theta")
    with pytest.raises(KeyError):
        printed_adjacency("theta")


@pytest.mark.parametrize(
    "example, quantity, point, want",
    [
        ("figure8", "surface", LOG3, LOG3),
        ("figure8", "speed2_P", LOG3, 0.5),
        ("figure8", "speed2_WP", LOG3, 1 / (2 * LOG3)),
        ("figure8", "V", LOG3, LOG3),
        ("belt-buckle", "surface", (LOG2, LOG2), LOG2),
        ("belt-buckle", "E_P", (LOG2, LOG2), 2 / 9),
        ("belt-buckle", "K_P", (LOG2, LOG2), 0.75),
        ("belt-buckle", "V", (LOG2, LOG2), LOG2),
        ("dumbbell", "K_P", (LOG2, LOG2), 7 / 6),
        ("dumbbell", "V", (LOG2, LOG2), LOG2),
        ("dumbbell", "diag_speed2_P", LOG2, 2 / 3),
    ],
)
def test_closed_form_values(example, quantity, point, want):
    assert closed_form_eval(example, quantity, point) == pytest.approx(want, rel=1e-12)


def test_closed_form_errors():
    forms = closed_forms("rose")
    with pytest.raises(UnknownQuantityError, match="no closed form"):
        forms("K_P", (5.0, 5.0))
    with pytest.raises(KeyError):
        forms("K_P", (5.0, 5.0))
    with pytest.raises(ValueError, match="coordinate"):
        forms("surface", 5.0)
    with pytest.raises(InfeasiblePointError):
        forms("surface", (0.5, 0.5))
    with pytest.raises(InfeasiblePointError):
        closed_form_eval("belt-buckle", "diag_speed2_P", 1.2)
    with pytest.raises(InfeasiblePointError):
        closed_form_eval("figure8", "surface", -1.0)


def test_stationary_forms_sum_to_half(rng):
    for eid in ("belt-buckle", "dumbbell", "rose"):
        forms = closed_forms(eid)
        for p in sample_points(eid, 5, rng):
            total = sum(forms(f"p{i}", p) for i in (1, 2, 3))
            assert total == pytest.approx(0.5, rel=1e-12)
    forms = closed_forms("figure8")
    assert forms("p1", 1.3) + forms("p2", 1.3) == pytest.approx(0.5, rel=1e-12)


def test_rose_volume_at_symmetric_point(charts):
    pt = charts["rose"].point((4.0, 4.0))
    assert closed_form_eval("rose", "V", (4.0, 4.0)) == pytest.approx(float(pt.lengths @ pt.perron.p), rel=1e-9)


def test_sample_points_are_feasible(rng):
    for eid in EXAMPLES:
        forms = closed_forms(eid)
        pts = sample_points(eid, 8, rng, margin=0.05)
        assert pts.shape == (8, forms.dim)
        for p in pts:
            assert forms.feasible(*p)
            assert forms("surface", p) > 0.05


def test_report_text_and_csv(tmp_path):
    report = Report("demo")
    assert not report.passed
    report.rel("surface", 1e-12, 1e-9)
    report.add("spot", "[0, 1]", math.nan, "interval", False)
    assert not report.passed
    text = report.text()
    assert text.splitlines()[0] == "demo: FAIL"
    assert "PASS" in text and "NA" in text
    path = report.to_csv(tmp_path / "r.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "example,check,expected,got,tolerance,status"
    assert lines[2].startswith("demo,spot,") and lines[2].endswith(",NA,interval,FAIL")


def test_verify_figure8():
    report = verify("figure8", points=6)
    names = [c.check for c in report.checks]
    assert "speed2 P" in names and "P length toward 0" in names and "WP length toward inf" in names
    failed = [c for c in report.checks if not c.passed]
    assert not failed, failed
    assert report.passed


def test_verify_dumbbell():
    report = verify("dumbbell", points=6)
    failed = [c for c in report.checks if not c.passed]
    assert not failed, failed
    names = {c.check for c in report.checks}
    assert {"adjacency", "surface", "tensor P", "tensor WP", "F_P", "K_P closed form",
            "diagonal P length toward 0", "K_P unbounded toward (0,0)", "K_WP(0.06,2.9) > 0",
            "K_WP(0.06,0.06) < 0"} <= names


def test_verify_belt_buckle_and_rose():
    reports = {eid: verify(eid, points=4) for eid in ("belt-buckle", "rose")}
    for eid, report in reports.items():
        failed = [c for c in report.checks if not c.passed]
        assert not failed, (eid, failed)
    belt = {c.check for c in reports["belt-buckle"].checks}
    assert {"K_P closed form", "diagonal P length toward 0", "K_WP grid minimum", "K_WP grid maximum",
            "K_WP corner"} <= belt
    rose = reports["rose"].checks
    assert "diagonal P length toward (log 3, log 3)" in {c.check for c in rose}
    spots = [c for c in rose if c.check.startswith("K_WP")]
    assert len(spots) == 2


def test_verify_unknown_example():
    with pytest.raises(KeyError):
        verify("theta")


def test_diagonal_speed_coincides(charts):
    xs = np.linspace(0.1, 1.0, 4)
    for eid in ("belt-buckle", "dumbbell"):
        for x in xs:
            got = metric_tensor(charts[eid], (x, x), "P").norm2((1.0, 1.0))
            assert got == pytest.approx(closed_form_eval(eid, "diag_speed2_P", x), rel=1e-8)
