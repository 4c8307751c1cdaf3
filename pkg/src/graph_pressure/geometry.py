"""Gaussian curvature of 2-D charts, curvature grids and completeness probes."""

from __future__ import annotations
import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import CurvatureError, GraphPressureError, InfeasiblePointError
from .moduli import EntropyChart, metric_tensor, parse_kind
from .numerics import loglog_fit, richardson
from .utils import fmt_num, parse_float, progress

log = logging.getLogger(__name__)


# ---------------------------------------------------
# tensor fields

class TensorField:
    """``(x, y) -> (E, F, G)``; raises ``InfeasiblePointError`` outside its domain."""

    def __call__(self, x: float, y: float) -> Tuple[float, float, float]:
        raise NotImplementedError

    def contains(self, x: float, y: float) -> bool:
        try:
            self(x, y)
        except InfeasiblePointError:
            return False
        return True

    def boundary_distance(self, x: float, y: float) -> float:
        """Length scale on which the field varies near (x, y); ``inf`` when unknown."""
        return math.inf


@dataclass(frozen=True)
class FunctionField(TensorField):
    """Field from a plain sampler and optional domain predicate.

    Pass module-level functions if the field has to cross a process pool.
    """

    sampler: Callable[[float, float], Tuple[float, float, float]]
    domain: Optional[Callable[[float, float], bool]] = None

    def __call__(self, x, y):
        if self.domain is not None and not self.domain(x, y):
            raise InfeasiblePointError(f"({x}, {y}) is outside the field's domain")
        return self.sampler(x, y)


@dataclass(frozen=True)
class MetricField(TensorField):
    """P or WP first fundamental form of a 2-D entropy chart."""

    chart: EntropyChart
    kind: str = "P"
    method: str = "implicit"

    def __post_init__(self):
        if self.chart.dim != 2:
            raise CurvatureError(f"curvature needs a 2-D chart, this one has {self.chart.dim} free edges")
        object.__setattr__(self, "kind", parse_kind(self.kind))

    def __call__(self, x, y):
        s = metric_tensor(self.chart, (x, y), self.kind, method=self.method)
        return s.E, s.F, s.G

    def contains(self, x, y):
        if x <= 0 or y <= 0:
            return False
        return self.chart.feasible((x, y))[0]

    def boundary_distance(self, x, y):
        # first-order reach of S = 0, or of S -> inf on the scale where S moves by 1
        if x <= 0 or y <= 0:
            return 0.0
        try:
            pt = self.chart.point((x, y))
        except InfeasiblePointError:
            return 0.0
        slope = float(np.linalg.norm(self.chart.gradient((x, y), point=pt)))
        reach = min(pt.dependent, 1.0) / slope if slope > 0 else math.inf
        return min(x, y, reach)


def metric_field(chart: EntropyChart, kind: str = "P", *, method: str = "implicit") -> MetricField:
    return MetricField(chart, kind, method)


# ---------------------------------------------------
# Brioschi

def brioschi_from_partials(E, F, G, Ex, Ey, Fx, Fy, Gx, Gy, Eyy, Fxy, Gxx) -> float:
    """Gaussian curvature of ``E dx^2 + 2F dx dy + G dy^2`` from its partials."""
    d1 = np.linalg.det(np.array([
        [-0.5 * Eyy + Fxy - 0.5 * Gxx, 0.5 * Ex, Fx - 0.5 * Ey],
        [Fy - 0.5 * Gx, E, F],
        [0.5 * Gy, F, G],
    ]))
    d2 = np.linalg.det(np.array([
        [0.0, 0.5 * Ey, 0.5 * Gx],
        [0.5 * Ey, E, F],
        [0.5 * Gx, F, G],
    ]))
    disc = E * G - F * F
    if not disc > 0:
        raise CurvatureError(f"metric is not positive definite (EG - F^2 = {disc:.3e})")
    return float((d1 - d2) / disc ** 2)


def brioschi_curvature(field: TensorField, x: float, y: float, h: Optional[float] = None, *,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Brioschi curvature with partials from central differences at ``h`` and ``h/2``.

    The stencil is the 3x3 block at each step (17 distinct samples). The
    default ``h`` is ``brioschi_step * max(1, |x|, |y|)``, capped at
    ``brioschi_boundary_fraction`` of the field's boundary distance. The
    curvatures from the ``h`` and ``h/2`` stencils alone must agree to
    ``brioschi_agreement`` (relative, floored at ``curvature_floor``);
    otherwise the point is ill-conditioned and ``CurvatureError`` is raised.
    The returned value uses Richardson-extrapolated partials.
    """
    if h is None:
        h = tol.brioschi_step * max(1.0, abs(x), abs(y))
        dist = field.boundary_distance(x, y)
        if not dist > 0:
            raise CurvatureError(f"({x:.6g}, {y:.6g}) is outside the field's domain")
        h = min(h, tol.brioschi_boundary_fraction * dist)
    cache: Dict[Tuple[float, float], np.ndarray] = {}

    def at(dx: float, dy: float) -> np.ndarray:
        key = (dx, dy)
        if key not in cache:
            try:
                vals = field(x + dx, y + dy)
            except GraphPressureError as exc:
                raise CurvatureError(f"stencil at ({x:.6g}, {y:.6g}) with h={h:.3g} failed: {exc}") from exc
            cache[key] = np.asarray(vals, dtype=float)
        return cache[key]

    def partials(s: float):
        c = at(0.0, 0.0)
        xp, xm, yp, ym = at(s, 0.0), at(-s, 0.0), at(0.0, s), at(0.0, -s)
        dx = (xp - xm) / (2 * s)
        dy = (yp - ym) / (2 * s)
        dxx = (xp - 2 * c + xm) / (s * s)
        dyy = (yp - 2 * c + ym) / (s * s)
        dxy = (at(s, s) - at(s, -s) - at(-s, s) + at(-s, -s)) / (4 * s * s)
        return dx, dy, dxx, dyy, dxy

    E, F, G = at(0.0, 0.0)

    def curvature(dx, dy, dxx, dyy, dxy) -> float:
        return brioschi_from_partials(E, F, G, dx[0], dy[0], dx[1], dy[1], dx[2], dy[2],
                                      dyy[0], dxy[1], dxx[2])

    coarse = partials(h)
    fine = partials(0.5 * h)
    k = curvature(*(richardson(a, b) for a, b in zip(coarse, fine)))
    k_coarse, k_fine = curvature(*coarse), curvature(*fine)
    if abs(k_coarse - k_fine) > tol.brioschi_agreement * max(abs(k), tol.curvature_floor):
        raise CurvatureError(f"ill-conditioned at ({x:.6g}, {y:.6g}): K = {k_coarse:.8g} at h={h:.3g}, "
                             f"{k_fine:.8g} at h/2")
    return k


# ---------------------------------------------------
# curvature grids

@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    count: int

    @classmethod
    def parse(cls, text: str) -> "Axis":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"axis must be min:max:count, got {text!r}")
        lo, hi = parse_float(parts[0], "axis min"), parse_float(parts[1], "axis max")
        try:
            count = int(parts[2])
        except ValueError:
            raise ValueError(f"axis count must be an integer, got {parts[2]!r}") from None
        if count < 1 or hi < lo or (count > 1 and hi == lo):
            raise ValueError(f"malformed axis {text!r}")
        return cls(lo, hi, count)

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class CurvatureGrid:
    """K on an x-by-y grid; ``NaN`` marks points without a feasible stencil."""

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray

    @property
    def feasible(self) -> np.ndarray:
        return np.isfinite(self.values)

    def minimum(self) -> Tuple[float, float, float]:
        """``(K, x, y)`` at the smallest feasible value."""
        return self._pick(np.nanargmin)

    def maximum(self) -> Tuple[float, float, float]:
        return self._pick(np.nanargmax)

    def _pick(self, fn) -> Tuple[float, float, float]:
        if not self.feasible.any():
            raise CurvatureError("grid has no feasible points")
        i, j = np.unravel_index(fn(self.values), self.values.shape)
        return float(self.values[i, j]), float(self.xs[i]), float(self.ys[j])

    def value_at(self, x: float, y: float) -> float:
        i = int(np.argmin(np.abs(self.xs - x)))
        j = int(np.argmin(np.abs(self.ys - y)))
        return float(self.values[i, j])

    def rows(self):
        for i, x in enumerate(self.xs):
            for j, y in enumerate(self.ys):
                yield float(x), float(y), float(self.values[i, j])

    def to_csv(self, path: Path | str) -> Path:
        return write_grid_csv(self, path)


def write_grid_csv(grid: CurvatureGrid, path: Path | str) -> Path:
    p = Path(path)
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "K"])
        for x, y, k in grid.rows():
            w.writerow([fmt_num(x), fmt_num(y), fmt_num(k)])
    return p


def read_grid_csv(path: Path | str) -> CurvatureGrid:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    xs = list(dict.fromkeys(float(r["x"]) for r in rows))
    ys = list(dict.fromkeys(float(r["y"]) for r in rows))
    vals = np.array([math.nan if r["K"] == "NA" else float(r["K"]) for r in rows])
    return CurvatureGrid(np.array(xs), np.array(ys), vals.reshape(len(xs), len(ys)))


def _grid_point(args) -> float:
    field, x, y, h, tol = args
    try:
        return brioschi_curvature(field, x, y, h, tol=tol)
    except GraphPressureError as exc:
        log.debug("no curvature at (%.6g, %.6g): %s", x, y, exc)
        return math.nan


def curvature_grid(field: TensorField, axes: Sequence[Axis], out: Optional[Path | str] = None, *,
                   workers: int = 1, h: Optional[float] = None, progress_bar: bool = False,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> CurvatureGrid:
    """Brioschi curvature at every grid point, row-major in (x, y).

    Points whose stencil leaves the domain or fails the step agreement
    test are ``NaN``. With ``workers > 1`` points fan out over a process
    pool; results are placed by index.
    """
    ax, ay = axes
    xs, ys = ax.values(), ay.values()
    jobs = [(field, float(x), float(y), h, tol) for x in xs for y in ys]
    total = len(jobs)
    values = np.full(total, math.nan)
    start = time.time()
    if progress_bar:
        progress("Curvature", 0, total, start)

    def tick(done: int) -> None:
        if progress_bar and (done == total or done % 10 == 0):
            progress("Curvature", done, total, start)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, k in enumerate(pool.map(_grid_point, jobs, chunksize=max(1, total // (8 * workers)))):
                values[idx] = k
                tick(idx + 1)
    else:
        for idx, job in enumerate(jobs):
            values[idx] = _grid_point(job)
            tick(idx + 1)

    grid = CurvatureGrid(xs, ys, values.reshape(len(xs), len(ys)))
    log.info("curvature grid: %d of %d points feasible", int(grid.feasible.sum()), total)
    if out is not None:
        write_grid_csv(grid, out)
    return grid


# ---------------------------------------------------
# path lengths

FINITE, DIVERGENT, INDETERMINATE = "finite", "divergent", "indeterminate"


@dataclass(frozen=True)
class PathLength:
    """Outcome of a completeness probe.

    ``exponent`` is the fitted ``alpha`` in ``speed ~ C delta**alpha`` where
    ``delta`` is the distance to the singular endpoint (``1/t`` toward
    infinity). ``growth`` is the fitted power of ``-log delta`` in the partial
    lengths, present only when the logarithmic test ran.
    """

    kind: str
    length: float = math.nan
    exponent: float = math.nan
    log_exponent: float = math.nan
    growth: float = math.nan

    @property
    def finite(self) -> bool:
        return self.kind == FINITE


def _endpoint_speed(speed: Callable[[float], float], a: float, b: float, toward: float):
    """Speed in ``delta``, the distance to ``toward``, plus the far end in ``delta``."""
    if math.isinf(toward):
        start = a if toward > 0 else b
        if math.isinf(start) or start == 0:
            raise ValueError("a path toward infinity needs a finite nonzero start")
        sign = 1.0 if toward > 0 else -1.0
        return (lambda d: speed(sign / d) / (d * d)), 1.0 / abs(start)
    if toward not in (a, b):
        raise ValueError(f"singular endpoint {toward!r} is not an end of [{a!r}, {b!r}]")
    other = b if toward == a else a
    if math.isinf(other):
        raise ValueError("only one endpoint may be singular")
    sign = 1.0 if other > toward else -1.0
    return (lambda d: speed(toward + sign * d)), abs(other - toward)


def _window(toward: float, span: float, window: Optional[Tuple[float, float]],
            tol: Tolerances) -> Tuple[float, float]:
    if window is None:
        if math.isinf(toward):
            raise ValueError("a path toward infinity needs an explicit sample window")
        lo = tol.window_floor * span
        return lo, lo * 10.0 ** tol.decades
    lo, hi = window
    if not 0 < lo < hi:
        raise ValueError(f"malformed window {window!r}")
    if math.isinf(toward):
        return 1.0 / hi, 1.0 / lo
    return lo, hi


def classify_speed(speed_delta: Callable[[float], float], lo: float, hi: float, *,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> PathLength:
    """Classify ``int_0 speed(delta) d delta`` from samples in ``[lo, hi]``.

    A power fit decides clear cases; within ``divergence_band`` of ``-1`` the
    partial integrals are tested for growth in powers of ``-log delta``.
    """
    n = max(4, int(round(tol.samples_per_decade * math.log10(hi / lo))) + 1)
    deltas = np.geomspace(lo, hi, n)
    speeds = np.array([speed_delta(float(d)) for d in deltas])
    if not np.all(np.isfinite(speeds)) or np.any(speeds <= 0):
        raise ValueError("speed is not positive and finite on the sample window")
    alpha, _, rms = loglog_fit(deltas, speeds)
    band = tol.divergence_band
    if alpha > -1.0 + band:
        return PathLength(FINITE, exponent=alpha)
    if alpha < -1.0 - band:
        return PathLength(DIVERGENT, exponent=alpha)

    # partial lengths in u = log(delta): d(length) = speed * delta du
    u = np.log(deltas)
    w = speeds * deltas
    increments = 0.5 * (w[1:] + w[:-1]) * np.diff(u)
    L = -0.5 * (u[1:] + u[:-1])
    slope, _, lrms = loglog_fit(L, increments)
    growth = slope + 1.0
    log.debug("log test: alpha=%.4f growth=%.4f rms=%.3g", alpha, growth, lrms)
    if lrms > tol.log_fit_rms:
        kind = INDETERMINATE
    elif growth >= band:
        kind = DIVERGENT
    elif growth <= -band:
        kind = FINITE
    else:
        kind = INDETERMINATE
    if kind == INDETERMINATE:
        log.warning("completeness fit is ambiguous: alpha=%.4f, log growth=%.4f", alpha, growth)
    return PathLength(kind, exponent=alpha, log_exponent=slope, growth=growth)


def path_length(speed: Callable[[float], float], a: float, b: float, *,
                toward: Optional[float] = None, window: Optional[Tuple[float, float]] = None,
                tol: Tolerances = DEFAULT_TOLERANCES) -> PathLength:
    """Length of a path with speed ``speed(t)`` on ``[a, b]``, singular at ``toward``.

    ``toward`` defaults to ``a`` and may be ``inf``. ``window`` bounds the
    endpoint samples: distances to ``toward`` for a finite endpoint, values of
    ``t`` for an infinite one. Finite lengths integrate in ``log(delta)`` and
    add the fitted power-law tail below the window.
    """
    toward = a if toward is None else toward
    speed_delta, span = _endpoint_speed(speed, a, b, toward)
    lo, hi = _window(toward, span, window, tol)
    if hi > span:
        raise ValueError(f"sample window reaches past the far endpoint (span {span:.6g})")
    res = classify_speed(speed_delta, lo, hi, tol=tol)
    if res.kind != FINITE:
        return res

    def integrand(u: float) -> float:
        d = math.exp(u)
        return speed_delta(d) * d

    body, err = integrate.quad(integrand, math.log(lo), math.log(span),
                               epsrel=tol.quad_rel, epsabs=tol.quad_abs, limit=200)
    if res.exponent > -1.0:
        tail = speed_delta(lo) * lo / (res.exponent + 1.0)
    else:
        # log-corrected case: the tail below the window is not a pure power
        tail = 0.0
        log.warning("finite classification from the log test; tail below delta=%.3g omitted", lo)
    log.debug("path length: body=%.15g (+/- %.2g) tail=%.3g", body, err, tail)
    return PathLength(FINITE, body + tail, res.exponent, res.log_exponent, res.growth)


def speed_along(chart: EntropyChart, kind: str, path: Callable[[float], Sequence[float]],
                velocity: Callable[[float], Sequence[float]], *,
                method: str = "implicit") -> Callable[[float], float]:
    """``t -> ||c'(t)||`` in the P or WP metric for a chart path ``c``."""
    kind = parse_kind(kind)

    def speed(t: float) -> float:
        sample = metric_tensor(chart, path(t), kind, method=method)
        return math.sqrt(sample.norm2(velocity(t)))
    return speed


def line_path(chart: EntropyChart, start: Sequence[float], direction: Sequence[float]):
    """Straight chart path ``t -> start + t * direction`` and its constant velocity."""
    s = np.asarray(start, dtype=float)
    d = np.asarray(direction, dtype=float)
    if s.shape != (chart.dim,) or d.shape != (chart.dim,):
        raise ValueError(f"path needs {chart.dim} coordinates")
    return (lambda t: s + t * d), (lambda t: d)
