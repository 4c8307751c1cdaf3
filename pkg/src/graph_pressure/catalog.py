"""The four worked example graphs, their closed forms, and a verification harness.

Closed forms are written in ``a = e^x``, ``b = e^y`` with ``x, y`` the free
lengths of the first two edges and the last edge dependent. ``F`` is the
off-diagonal entry of the first fundamental form (polarization of the
variance).
"""

from __future__ import annotations
import csv
import logging
import math
import time
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy import integrate

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import GraphPressureError, InfeasiblePointError, UnknownQuantityError
from .geometry import (DIVERGENT, FINITE, Axis, brioschi_curvature, curvature_grid, line_path, metric_field,
                       path_length, speed_along)
from .graph import DirectedEdgeSystem, UndirectedGraph, build_directed_system, parse_graph
from .moduli import coordinate_tangents, make_chart, metric_tensor
from .utils import fmt_num, progress

log = logging.getLogger(__name__)

EXAMPLES = ("figure8", "belt-buckle", "dumbbell", "rose")

PRINTED_ADJACENCY: Dict[str, Tuple[str, ...]] = {
    "figure8": ("1101", "1110", "0111", "1011"),
    "belt-buckle": ("000011", "000101", "000110", "011000", "101000", "110000"),
    "dumbbell": ("101000", "010001", "010010", "001100", "000011", "100100"),
    "rose": ("111011", "111101", "111110", "011111", "101111", "110111"),
}


def printed_adjacency(example: str) -> np.ndarray:
    rows = PRINTED_ADJACENCY[_check_id(example)]
    return np.array([[int(c) for c in r] for r in rows], dtype=np.int8)


def _check_id(example: str) -> str:
    if example not in EXAMPLES:
        raise KeyError(f"unknown example {example!r} (choose from {', '.join(EXAMPLES)})")
    return example


# ---------------------------------------------------
# figure 8: free x = l(e1), dependent l(e2)

def _f8_surface(x):
    return -math.log((1 - math.exp(-x)) / (1 + 3 * math.exp(-x)))


def _f8_p1(x):
    a = math.exp(x)
    return 2 * a / (6 * a + a * a - 3)


def _f8_p2(x):
    a = math.exp(x)
    return (2 * a + a * a - 3) / (2 * (6 * a + a * a - 3))


def _f8_dS(x):
    a = math.exp(x)
    return -4 * a / ((a - 1) * (a + 3))


def _f8_d2S(x):
    a = math.exp(x)
    return 4 * a * (a * a + 3) / ((a - 1) ** 2 * (a + 3) ** 2)


def _f8_speed2_P(x):
    a = math.exp(x)
    return 4 * a * (a * a + 3) / (-24 * a + 6 * a ** 2 + 8 * a ** 3 + a ** 4 + 9)


def _f8_speed2_WP(x):
    a = math.exp(x)
    den = (a - 1) * (a + 3) * ((2 * a + a * a - 3) * math.log((a - 1) / (a + 3)) - 4 * a * x)
    return -4 * a * (a * a + 3) / den


def _f8_volume(x):
    return 2 * (x * _f8_p1(x) + _f8_surface(x) * _f8_p2(x))


# ---------------------------------------------------
# belt buckle: three parallel edges, dependent l(e3)

def _bb_D(a, b):
    return 3 * a * b + a * a * b + a * b * b - 1


def _bb_surface(x, y):
    a, b = math.exp(x), math.exp(y)
    return -math.log((a * b - 1) / (a + b + 2))


def _bb_p(x, y):
    a, b = math.exp(x), math.exp(y)
    d = 4 * _bb_D(a, b)
    return a * (b + 1) ** 2 / d, (a + 1) ** 2 * b / d, (a + b + 2) * (a * b - 1) / d


def _bb_tensor_P(x, y):
    a, b = math.exp(x), math.exp(y)
    n = 2 * (a + b + 2) * (a * b - 1) * _bb_D(a, b)
    E = a * (b + 1) ** 2 * (a * a * b + b + 2) / n
    F = (a + 1) * (b + 1) * a * b * (-a * b + a + b + 3) / n
    G = (a + 1) ** 2 * b * (a * b * b + a + 2) / n
    return E, F, G


def _bb_f(x, y):
    a, b = math.exp(x), math.exp(y)
    return (x * a * b * b + y * a * a * b + 2 * a * b * (x + y)
            + (-2 * a * b - a * a * b - a * b * b + a + b + 2) * math.log((a * b - 1) / (a + b + 2))
            + a * x + b * y)


def _bb_volume(x, y):
    return _bb_f(x, y) / (2 * _bb_D(math.exp(x), math.exp(y)))


def _bb_K_P(x, y):
    a, b = math.exp(x), math.exp(y)
    num = (5 + 6 * a + 3 * a ** 2 + 6 * b + 3 * b ** 2 + 3 * a * b + 45 * (a * b) ** 2
           + 19 * (a * b) ** 3 + 11 * a ** 2 * b + 9 * a ** 3 * b + 3 * a ** 4 * b
           + 11 * a * b ** 2 + 33 * a ** 3 * b ** 2 + 8 * a ** 4 * b ** 2 + 9 * a * b ** 3
           + 33 * a ** 2 * b ** 3 + 3 * a ** 4 * b ** 3 + 3 * a * b ** 4 + 8 * a ** 2 * b ** 4
           + 3 * a ** 3 * b ** 4)
    return num / (4 * (a + 1) ** 2 * (b + 1) ** 2 * _bb_D(a, b))


def _diag_speed2(x):
    a = math.exp(x)
    return a / (2 * a * a - 3 * a + 1)


# ---------------------------------------------------
# dumbbell: loops e1, e2 joined by the bridge e3

def _db_W(a, b):
    return 4 * a * b - 3 * a - 3 * b + 2


def _db_surface(x, y):
    return math.log(2) - 0.5 * math.log((math.exp(x) - 1) * (math.exp(y) - 1))


def _db_p(x, y):
    a, b = math.exp(x), math.exp(y)
    w = _db_W(a, b)
    return a * (b - 1) / (2 * w), b * (a - 1) / (2 * w), (a - 1) * (b - 1) / w


def _db_tensor_P(x, y):
    a, b = math.exp(x), math.exp(y)
    w = _db_W(a, b)
    return a * (b - 1) / ((a - 1) * w), 0.0, (a - 1) * b / ((b - 1) * w)


def _db_f(x, y):
    a, b = math.exp(x), math.exp(y)
    g = (a - 1) * (b - 1)
    return (x * a * b + y * a * b - math.log(g) + 2 * (-a * b + a + b) * math.log(0.5 * math.sqrt(g))
            - a * x - b * y + math.log(4))


def _db_volume(x, y):
    return _db_f(x, y) / _db_W(math.exp(x), math.exp(y))


def _db_K_P(x, y):
    a, b = math.exp(x), math.exp(y)
    return (2 * a * b - 1) / _db_W(a, b)


# ---------------------------------------------------
# three-petal rose: three loops, dependent l(e3)

def _rose_parts(x, y):
    a, b = math.exp(x), math.exp(y)
    n = a * b - a - b - 3
    m = a * b + 3 * a + 3 * b + 5
    w = (12 * a * b + (a * b) ** 2 + 6 * a * a * b + 6 * a * b * b
         - 10 * a - 3 * a * a - 10 * b - 3 * b * b - 15)
    return a, b, n, m, w


def _rose_surface(x, y):
    _, _, n, m, _ = _rose_parts(x, y)
    return -math.log(n / m)


def _rose_p(x, y):
    a, b, n, m, w = _rose_parts(x, y)
    return 2 * a * (b + 1) ** 2 / w, 2 * (a + 1) ** 2 * b / w, n * m / (2 * w)


def _rose_tensor_P(x, y):
    a, b, n, m, w = _rose_parts(x, y)
    d = m * n * w
    E = 4 * a * (b + 1) ** 2 * (b + 3) * (a * a * b - a * a + 3 * b + 5) / d
    F = 32 * a * b * (a + 1) * (b + 1) * (a + b + 2) / d
    G = 4 * b * (a + 1) ** 2 * (a + 3) * (a * b * b + 3 * a - b * b + 5) / d
    return E, F, G


def _rose_f3(x, y):
    a, b, n, m, _ = _rose_parts(x, y)
    return (-4 * (x * a * b * b + y * a * a * b + 2 * a * b * (x + y) + a * x + b * y)
            + (-4 * a * b + (a * b) ** 2 + 2 * a * a * b + 2 * a * b * b - 14 * a - 3 * a * a
               - 14 * b - 3 * b * b - 15) * math.log(n / m))


def _rose_volume(x, y):
    return -_rose_f3(x, y) / _rose_parts(x, y)[4]


# ---------------------------------------------------
# closed-form sets

@dataclass(frozen=True)
class ClosedForm:
    fn: Callable[..., float]
    arity: int
    note: str = ""


@dataclass(frozen=True)
class SpotValue:
    check: str
    point: Tuple[float, float]
    metric: str
    lo: float
    hi: float
    note: str = ""
    # sign checks far out in the chart tolerate a looser step agreement
    step: Optional[float] = None
    agreement: Optional[float] = None


@dataclass(frozen=True)
class ClosedFormSet:
    example: str
    dependent: str
    feasible: Callable[..., bool]
    forms: Mapping[str, ClosedForm]
    spots: Tuple[SpotValue, ...] = ()

    @property
    def dim(self) -> int:
        return self.forms["surface"].arity

    def names(self) -> List[str]:
        return sorted(self.forms)

    def __call__(self, quantity: str, point) -> float:
        try:
            form = self.forms[quantity]
        except KeyError:
            raise UnknownQuantityError(
                f"{self.example} has no closed form {quantity!r} (known: {', '.join(self.names())})") from None
        pt = tuple(float(v) for v in np.atleast_1d(point))
        if len(pt) != form.arity:
            raise ValueError(f"{quantity} takes {form.arity} coordinate(s), got {len(pt)}")
        check = pt * self.dim if form.arity == 1 and self.dim == 2 else pt
        if not all(v > 0 for v in check) or not self.feasible(*check):
            raise InfeasiblePointError(f"{self.example}: {pt} is outside the feasible region")
        return float(form.fn(*pt))


def _with_wp(forms: Dict[str, ClosedForm], tensor: Callable, volume: Callable) -> Dict[str, ClosedForm]:
    for i, name in enumerate("EFG"):
        forms[f"{name}_P"] = ClosedForm(lambda x, y, i=i: tensor(x, y)[i], 2)
        forms[f"{name}_WP"] = ClosedForm(lambda x, y, i=i: tensor(x, y)[i] / volume(x, y), 2)
    forms["V"] = ClosedForm(volume, 2)
    return forms


def _p_forms(p: Callable) -> Dict[str, ClosedForm]:
    return {f"p{i + 1}": ClosedForm(lambda x, y, i=i: p(x, y)[i], 2) for i in range(3)}


def _figure8() -> ClosedFormSet:
    forms = {
        "surface": ClosedForm(_f8_surface, 1, "e^-y = (1 - e^-x)/(1 + 3e^-x)"),
        "p1": ClosedForm(_f8_p1, 1),
        "p2": ClosedForm(_f8_p2, 1),
        "dS": ClosedForm(_f8_dS, 1),
        "d2S": ClosedForm(_f8_d2S, 1),
        "speed2_P": ClosedForm(_f8_speed2_P, 1),
        "speed2_WP": ClosedForm(_f8_speed2_WP, 1),
        "V": ClosedForm(_f8_volume, 1),
    }
    return ClosedFormSet("figure8", "e2", lambda x: x > 0, forms)


def _belt_buckle() -> ClosedFormSet:
    forms = {"surface": ClosedForm(_bb_surface, 2), "K_P": ClosedForm(_bb_K_P, 2),
             "diag_speed2_P": ClosedForm(_diag_speed2, 1)}
    forms.update(_p_forms(_bb_p))
    _with_wp(forms, _bb_tensor_P, _bb_volume)
    spots = (
        SpotValue("K_WP corner", (math.log(3) - 1e-3, math.log(3) - 1e-3), "WP", -0.495, -0.475,
                  "maximum approached at the boundary corner, about -0.485025"),
    )

    def feasible(x, y):
        a, b = math.exp(x), math.exp(y)
        return a * b < 3 + a + b
    return ClosedFormSet("belt-buckle", "e3", feasible, forms, spots)


def _dumbbell() -> ClosedFormSet:
    forms = {"surface": ClosedForm(_db_surface, 2), "K_P": ClosedForm(_db_K_P, 2),
             "diag_speed2_P": ClosedForm(_diag_speed2, 1)}
    forms.update(_p_forms(_db_p))
    _with_wp(forms, _db_tensor_P, _db_volume)
    spots = (
        SpotValue("K_WP(0.06,2.9) > 0", (0.06, 2.9), "WP", 0.0, math.inf, "sign change, positive side"),
        SpotValue("K_WP(0.06,0.06) < 0", (0.06, 0.06), "WP", -math.inf, 0.0, "sign change, negative side"),
    )

    def feasible(x, y):
        return (math.exp(x) - 1) * (math.exp(y) - 1) < 4
    return ClosedFormSet("dumbbell", "e3", feasible, forms, spots)


def _rose() -> ClosedFormSet:
    forms = {"surface": ClosedForm(_rose_surface, 2)}
    forms.update(_p_forms(_rose_p))
    _with_wp(forms, _rose_tensor_P, _rose_volume)
    spots = (
        SpotValue("K_WP(5,15) > 0", (5.0, 15.0), "WP", 0.0, math.inf, step=2e-2, agreement=1e-2),
        SpotValue("K_WP(19,19) < 0", (19.0, 19.0), "WP", -math.inf, 0.0, step=2e-2, agreement=1e-2),
    )

    def feasible(x, y):
        a, b = math.exp(x), math.exp(y)
        return a * b - a - b - 3 > 0
    return ClosedFormSet("rose", "e3", feasible, forms, spots)


_BUILDERS = {"figure8": _figure8, "belt-buckle": _belt_buckle, "dumbbell": _dumbbell, "rose": _rose}

# sampling boxes for random feasible points
_BOXES = {
    "figure8": ((0.05, 6.0),),
    "belt-buckle": ((0.05, 3.0), (0.05, 3.0)),
    "dumbbell": ((0.05, 3.0), (0.05, 3.0)),
    "rose": ((0.5, 8.0), (0.5, 8.0)),
}


def graph_text(example: str) -> str:
    stem = _check_id(example).replace("-", "_")
    return importlib_resources.files("graph_pressure").joinpath("data", f"{stem}.graph").read_text(encoding="utf-8")


def closed_forms(example: str) -> ClosedFormSet:
    return _BUILDERS[_check_id(example)]()


def catalog_graph(example: str) -> Tuple[UndirectedGraph, DirectedEdgeSystem, ClosedFormSet]:
    g = parse_graph(graph_text(example), name=example)
    return g, build_directed_system(g), closed_forms(example)


def closed_form_eval(example: str, quantity: str, point) -> float:
    return closed_forms(example)(quantity, point)


def sample_points(example: str, n: int, rng: np.random.Generator, *, margin: float = 1e-2) -> np.ndarray:
    """``n`` random feasible points whose dependent length exceeds ``margin``."""
    forms = closed_forms(example)
    box = np.array(_BOXES[example])
    out: List[np.ndarray] = []
    while len(out) < n:
        pt = rng.uniform(box[:, 0], box[:, 1])
        if forms.feasible(*pt) and forms.forms["surface"].fn(*pt) > margin:
            out.append(pt)
    return np.array(out)


# ---------------------------------------------------
# verification report

@dataclass(frozen=True)
class CheckResult:
    check: str
    expected: str
    got: float
    tolerance: str
    passed: bool


@dataclass
class Report:
    example: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, check: str, expected: str, got: float, tolerance: str, passed: bool) -> None:
        self.checks.append(CheckResult(check, expected, got, tolerance, bool(passed)))
        log.info("%s %s: got %s", "PASS" if passed else "FAIL", check, fmt_num(got))

    def rel(self, check: str, worst: float, tol: float) -> None:
        self.add(check, "max rel err", worst, f"<= {tol:g}", worst <= tol)

    def text(self) -> str:
        header = ("check", "expected", "got", "tolerance", "status")
        rows = [(c.check, c.expected, fmt_num(c.got), c.tolerance, "PASS" if c.passed else "FAIL")
                for c in self.checks]
        widths = [max(len(r[i]) for r in [header, *rows]) for i in range(5)]
        lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in [header, *rows]]
        verdict = "PASS" if self.passed else "FAIL"
        return "\n".join([f"{self.example}: {verdict}", *lines]) + "\n"

    def to_csv(self, path: Path | str) -> Path:
        p = Path(path)
        with p.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["example", "check", "expected", "got", "tolerance", "status"])
            for c in self.checks:
                w.writerow([self.example, c.check, c.expected, fmt_num(c.got), c.tolerance,
                            "PASS" if c.passed else "FAIL"])
        return p


def _rel(got: float, want: float) -> float:
    return abs(got - want) / max(abs(want), 1e-300)


def _max_rel(pairs) -> float:
    return max((_rel(g, w) for g, w in pairs), default=0.0)


def verify(example: str, tol: Tolerances = DEFAULT_TOLERANCES, *, points: int = 20, seed: int = 0,
           progress_bar: bool = False) -> Report:
    """Compare the engine against the closed forms and spot values of ``example``."""
    g, sys, forms = catalog_graph(example)
    chart = make_chart(sys, forms.dependent, tol=tol)
    rng = np.random.default_rng(seed)
    pts = sample_points(example, points, rng)
    report = Report(example)
    steps = _figure8_checks if example == "figure8" else _surface_checks
    start = time.time()
    jobs = list(steps(chart, forms, pts, tol))
    for done, job in enumerate(jobs, start=1):
        try:
            job(report)
        except GraphPressureError as exc:
            report.add(getattr(job, "__name__", "check"), "no error", math.nan, "-", False)
            log.error("%s: %s", example, exc)
        if progress_bar:
            progress(f"Verify {example}", done, len(jobs), start)
    return report


def _common_checks(chart, forms, pts, tol):
    sys = chart.system
    example = forms.example

    def adjacency(report):
        diff = int(np.abs(sys.adjacency.astype(int) - printed_adjacency(example)).sum())
        report.add("adjacency", "printed matrix", diff, "== 0", diff == 0)

    def surface(report):
        report.rel("surface", _max_rel((chart.solve(p), forms("surface", p)) for p in pts), 1e-9)

    def stationary(report):
        worst = 0.0
        for p in pts:
            got = chart.point(p).perron.p
            names = ["p1", "p2"] if forms.dim == 1 else ["p1", "p2", "p3"]
            k = sys.k
            for i, name in enumerate(names):
                want = forms(name, p)
                worst = max(worst, _rel(got[i], want), _rel(got[i + k], want))
        report.rel("stationary p", worst, 1e-9)

    return [adjacency, surface, stationary]


def _figure8_checks(chart, forms, pts, tol):
    yield from _common_checks(chart, forms, pts, tol)
    xs = np.linspace(0.05, 6.0, 25)

    def speed_P(report):
        pairs = ((metric_tensor(chart, (x,), "P").E, forms("speed2_P", x)) for x in xs)
        report.rel("speed2 P", _max_rel(pairs), 1e-6)

    def speed_WP(report):
        pairs = ((metric_tensor(chart, (x,), "WP").E, forms("speed2_WP", x)) for x in xs)
        report.rel("speed2 WP", _max_rel(pairs), 1e-6)

    def tangent(report):
        worst = max(abs(coordinate_tangents(chart, p)[0, 1] - forms("dS", p)) for p in pts)
        report.add("dS/dx", "abs err", worst, "<= 1e-8", worst <= 1e-8)

    def expansion(report):
        x = 1e-4
        s2 = metric_tensor(chart, (x,), "P").E
        report.add("x*speed2 at 1e-4", "1", x * s2, "+/- 1%", abs(x * s2 - 1) <= 0.01)
        report.add("speed2-1/x at 1e-4", "-1.25", s2 - 1 / x, "+/- 1%", abs((s2 - 1 / x) / -1.25 - 1) <= 0.01)

    def completeness(report):
        path, vel = line_path(chart, (0.0,), (1.0,))
        for kind, toward, window, want in (("P", 0.0, None, FINITE), ("WP", 0.0, None, DIVERGENT),
                                          ("WP", math.inf, (2.0, 20.0), DIVERGENT)):
            res = path_length(speed_along(chart, kind, path, vel), 0.0 if toward == 0 else 1.0,
                              1.0 if toward == 0 else math.inf, toward=toward, window=window, tol=tol)
            end = "0" if toward == 0 else "inf"
            report.add(f"{kind} length toward {end}", want, res.exponent, f"kind {want}", res.kind == want)

    yield from (speed_P, speed_WP, tangent, expansion, completeness)


def _surface_checks(chart, forms, pts, tol):
    yield from _common_checks(chart, forms, pts, tol)
    example = forms.example

    def tensors(report):
        for kind in ("P", "WP"):
            worst = 0.0
            for p in pts:
                s = metric_tensor(chart, p, kind)
                want = [forms(f"{n}_{kind}", p) for n in "EFG"]
                scale = max(abs(want[0]), abs(want[2]))
                worst = max(worst, _rel(s.E, want[0]), _rel(s.G, want[2]), abs(s.F - want[1]) / scale)
            report.rel(f"tensor {kind}", worst, 1e-6)

    def volume(report):
        pairs = ((metric_tensor(chart, p, "WP").volume, forms("V", p)) for p in pts)
        report.rel("volume V", _max_rel(pairs), 1e-9)

    yield tensors
    yield volume

    if example == "dumbbell":
        def off_diagonal(report):
            worst = max(abs(metric_tensor(chart, p, "P").F) for p in pts)
            report.add("F_P", "0", worst, "<= 1e-10", worst <= 1e-10)
        yield off_diagonal

    if "K_P" in forms.forms:
        def curvature(report):
            fld = metric_field(chart, "P")
            worst, low = 0.0, math.inf
            for p in _interior_grid(forms):
                k = brioschi_curvature(fld, *p, tol=tol)
                worst = max(worst, _rel(k, forms("K_P", p)))
                low = min(low, k)
            report.rel("K_P closed form", worst, 1e-5)
            report.add("K_P positive", "> 0", low, "> 0", low > 0)
        yield curvature

        def diagonal(report):
            xs = np.linspace(0.05, 1.05, 11)
            pairs = ((metric_tensor(chart, (x, x), "P").norm2((1.0, 1.0)), forms("diag_speed2_P", x))
                     for x in xs)
            report.rel("diagonal speed2 P", _max_rel(pairs), 1e-8)
        yield diagonal

        def diagonal_length(report):
            x1 = math.log(2)
            path, vel = line_path(chart, (0.0, 0.0), (1.0, 1.0))
            res = path_length(speed_along(chart, "P", path, vel), 0.0, x1, tol=tol)
            # x = s^2 removes the endpoint singularity
            want, _ = integrate.quad(lambda s: 2 * s * math.sqrt(_diag_speed2(s * s)), 0.0, math.sqrt(x1),
                                     epsabs=1e-13, epsrel=1e-12)
            err = abs(res.length - want) if res.finite else math.inf
            report.add("diagonal P length toward 0", fmt_num(want), res.length, "+/- 1e-6", err <= 1e-6)
        yield diagonal_length

    if example == "dumbbell":
        def unbounded(report):
            fld = metric_field(chart, "P")
            ks = [brioschi_curvature(fld, t, t, tol=tol) for t in (0.2, 0.05, 0.01)]
            rising = all(b > a for a, b in zip(ks, ks[1:]))
            report.add("K_P unbounded toward (0,0)", "> 40 at (0.01,0.01)", ks[-1], "increasing",
                       rising and ks[-1] > 40)
        yield unbounded

    if example == "belt-buckle":
        def wp_grid(report):
            axis = Axis(0.01, 2.5, 50)
            grid = curvature_grid(metric_field(chart, "WP"), (axis, axis), tol=tol)
            low, _, _ = grid.minimum()
            high, _, _ = grid.maximum()
            report.add("K_WP grid minimum", "[-0.575, -0.555]", low, "about -0.564958", -0.575 <= low <= -0.555)
            report.add("K_WP grid maximum", "<= -0.475", high, "negative and bounded", high <= -0.475)
        yield wp_grid

    if example == "rose":
        def curvature_band(report):
            fld = metric_field(chart, "P")
            ks = [brioschi_curvature(fld, *p, tol=tol) for p in pts[:10]]
            report.add("K_P min", "> 0.15", min(ks), "(0.15, 1.05)", min(ks) > 0.15)
            report.add("K_P max", "< 1.05", max(ks), "(0.15, 1.05)", max(ks) < 1.05)
        yield curvature_band

        def boundary_length(report):
            # S -> inf along the diagonal as x = y decreases to log 3
            start = math.log(3)
            path, vel = line_path(chart, (start, start), (1.0, 1.0))
            res = path_length(speed_along(chart, "P", path, vel), 0.0, 1.0, window=(1e-4, 1e-1), tol=tol)
            report.add("diagonal P length toward (log 3, log 3)", FINITE, res.exponent, f"kind {FINITE}",
                       res.kind == FINITE)
        yield boundary_length

    for spot in forms.spots:
        def spot_check(report, spot=spot):
            spot_tol = tol if spot.agreement is None else tol.override(brioschi_agreement=spot.agreement)
            k = brioschi_curvature(metric_field(chart, spot.metric), *spot.point, spot.step, tol=spot_tol)
            report.add(spot.check, f"[{spot.lo:g}, {spot.hi:g}]", k, spot.note or "interval",
                       spot.lo <= k <= spot.hi)
        yield spot_check


def _interior_grid(forms: ClosedFormSet, count: int = 10) -> List[Tuple[float, float]]:
    """``count`` x ``count`` grid on [0.1, 1.0]^2, feasible points only."""
    xs = np.linspace(0.1, 1.0, count)
    return [(float(x), float(y)) for x in xs for y in xs if forms.feasible(x, y)]
