"""The entropy-one moduli surface, its dependent-edge charts and metric tensors.

A chart fixes one undirected edge as *dependent*; the remaining lengths are
free coordinates and the dependent length ``S(free)`` is solved so the
assembled weighting has entropy exactly one.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ConvergenceError, GraphError, InfeasiblePointError, TangencyError
from .graph import DirectedEdgeSystem, as_mapping, edge_lengths
from .numerics import central_first, richardson, safe_newton, step_for
from .thermo import (PerronData, asymptotic_covariance, entropy, perron, spectral_radius,
                     variance_surface_route, weighted_matrix)

log = logging.getLogger(__name__)

KINDS = {"P": "P", "pressure": "P", "WP": "WP", "weil-petersson": "WP"}

_MAX_DEPENDENT = 1e6


def parse_kind(kind: str) -> str:
    try:
        return KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown metric kind {kind!r} (expected P or WP)") from None


def normalize_entropy(sys: DirectedEdgeSystem, l, *, tol: Tolerances = DEFAULT_TOLERANCES) -> Dict[str, float]:
    """Rescale ``l`` by its entropy so the result has entropy one."""
    lv = edge_lengths(sys, l)[: sys.k]
    h = entropy(sys, lv, tol=tol)
    return as_mapping(sys, h * lv)


def volume_term(pd: PerronData, lengths) -> float:
    """``V(l) = sum_i l(i) p(i)`` over directed edges."""
    lv = np.asarray(lengths, dtype=float)
    if lv.shape != pd.p.shape:
        raise GraphError(f"lengths have shape {lv.shape}, expected {pd.p.shape}")
    return float(lv @ pd.p)


@dataclass(frozen=True)
class ChartPoint:
    free: Tuple[float, ...]
    dependent: float
    lengths: np.ndarray
    perron: PerronData


@dataclass(frozen=True)
class EntropyChart:
    system: DirectedEdgeSystem
    dependent: str
    free_edges: Tuple[str, ...]
    tol: Tolerances = DEFAULT_TOLERANCES

    @property
    def dim(self) -> int:
        return len(self.free_edges)

    @property
    def dep_index(self) -> int:
        return self.system.edge_index(self.dependent)

    @property
    def free_indices(self) -> Tuple[int, ...]:
        return tuple(self.system.edge_index(e) for e in self.free_edges)

    def _free(self, free) -> np.ndarray:
        x = np.atleast_1d(np.asarray(free, dtype=float))
        if x.shape != (self.dim,):
            raise GraphError(f"chart expects {self.dim} free lengths, got {x.size}")
        if not np.all(np.isfinite(x)) or np.any(x <= 0):
            raise InfeasiblePointError(f"free lengths must be strictly positive, got {tuple(x)}", margin=0.0)
        return x

    def assemble(self, free, s: float) -> np.ndarray:
        """Directed length vector for free lengths plus dependent length ``s``."""
        und = np.empty(self.system.k)
        und[list(self.free_indices)] = self._free(free)
        und[self.dep_index] = s
        return np.concatenate([und, und])

    def _pressure(self, x: np.ndarray, s: float) -> float:
        return math.log(spectral_radius(weighted_matrix(self.system, -self.assemble(x, s))))

    def _newton(self, x: np.ndarray):
        i, j = self.dep_index, self.dep_index + self.system.k

        def f(s: float):
            pd = perron(weighted_matrix(self.system, -self.assemble(x, s)), tol=self.tol)
            return math.log(pd.beta), -(pd.p[i] + pd.p[j])
        return f

    def _bracket(self, x: np.ndarray, guess: Optional[float]):
        if guess is not None and guess > 0:
            fg = self._pressure(x, guess)
            step = max(1e-6, 1e-3 * guess)
            if fg > 0:
                lo, flo = guess, fg
                hi = lo + step
                fhi = self._pressure(x, hi)
                while fhi >= 0:
                    lo, flo = hi, fhi
                    step *= 4.0
                    hi = lo + step
                    if hi > _MAX_DEPENDENT:
                        raise InfeasiblePointError("no finite dependent length reaches entropy one")
                    fhi = self._pressure(x, hi)
                return lo, hi, flo, fhi
            hi, fhi = guess, fg
            lo = max(0.0, hi - step)
            flo = self._pressure(x, lo)
            while flo <= 0 and lo > 0:
                hi, fhi = lo, flo
                step *= 4.0
                lo = max(0.0, hi - step)
                flo = self._pressure(x, lo)
            if flo <= 0:
                raise InfeasiblePointError(
                    f"infeasible: pressure at zero dependent length is {flo:.3e} <= 0", margin=0.0)
            return lo, hi, flo, fhi

        flo = self._pressure(x, 0.0)
        if flo <= 0:
            raise InfeasiblePointError(
                f"infeasible: pressure at zero dependent length is {flo:.3e} <= 0", margin=0.0)
        lo, hi = 0.0, 1.0
        fhi = self._pressure(x, hi)
        while fhi >= 0:
            lo, flo = hi, fhi
            hi *= 2.0
            if hi > _MAX_DEPENDENT:
                raise InfeasiblePointError("no finite dependent length reaches entropy one")
            fhi = self._pressure(x, hi)
        return lo, hi, flo, fhi

    def solve(self, free, guess: Optional[float] = None) -> float:
        """Dependent length ``S(free)``; raises ``InfeasiblePointError`` off the domain."""
        x = self._free(free)
        lo, hi, flo, fhi = self._bracket(x, guess)
        s = safe_newton(self._newton(x), lo, hi, flo=flo, fhi=fhi, max_iter=self.tol.root_max_iter)
        resid = self._pressure(x, s)
        if abs(resid) > self.tol.root_residual:
            raise ConvergenceError(f"surface residual {resid:.3e} above {self.tol.root_residual:.1e}")
        if s <= self.tol.boundary:
            raise InfeasiblePointError(
                f"infeasible: dependent length {s:.3e} is on the boundary", margin=max(s, 0.0))
        return s

    def point(self, free, guess: Optional[float] = None) -> ChartPoint:
        x = self._free(free)
        s = self.solve(x, guess)
        lengths = self.assemble(x, s)
        pd = perron(weighted_matrix(self.system, -lengths), tol=self.tol)
        return ChartPoint(tuple(float(v) for v in x), s, lengths, pd)

    def feasible(self, free) -> Tuple[bool, float]:
        """``(True, S)`` when a positive dependent length exists, else ``(False, margin)``."""
        try:
            return True, self.solve(free)
        except InfeasiblePointError as exc:
            return False, exc.margin if exc.margin is not None else 0.0

    def tangent_basis(self, grad) -> np.ndarray:
        """Undirected tangent vectors ``e_i + dS/dx_i e_dep`` as rows."""
        rows = np.zeros((self.dim, self.system.k))
        for r, (i, g) in enumerate(zip(self.free_indices, grad)):
            rows[r, i] = 1.0
            rows[r, self.dep_index] = g
        return rows

    def gradient(self, free, *, method: str = "implicit", point: Optional[ChartPoint] = None) -> np.ndarray:
        if method == "implicit":
            pt = point or self.point(free)
            q = self.system.fold(pt.perron.p)
            return -q[list(self.free_indices)] / q[self.dep_index]
        if method != "difference":
            raise ValueError(f"unknown derivative method {method!r}")
        x = self._free(free)
        s0 = point.dependent if point else self.solve(x)
        out = np.empty(self.dim)
        for a in range(self.dim):
            h = step_for(x[a], self.tol.first_step)
            f = self._along(x, a, s0)
            out[a] = richardson(central_first(f, 0.0, h), central_first(f, 0.0, 0.5 * h))
        return out

    def _along(self, x: np.ndarray, a: int, s0: float, b: Optional[int] = None, ratio: float = 1.0):
        def f(t: float, u: float = 0.0) -> float:
            y = x.copy()
            y[a] += t
            if b is not None:
                y[b] += u * ratio
            return self.solve(y, guess=s0)
        return f

    def hessian(self, free, *, method: str = "implicit", point: Optional[ChartPoint] = None) -> np.ndarray:
        """Second derivatives of ``S`` in the free coordinates."""
        if method == "implicit":
            pt = point or self.point(free)
            grad = self.gradient(free, point=pt)
            tangents = np.hstack([self.tangent_basis(grad)] * 2)
            cov = asymptotic_covariance(pt.perron, tangents)
            q = self.system.fold(pt.perron.p)
            return cov / q[self.dep_index]
        if method != "difference":
            raise ValueError(f"unknown derivative method {method!r}")
        x = self._free(free)
        s0 = point.dependent if point else self.solve(x)
        n = self.dim
        out = np.empty((n, n))

        def second(a: int, h: float) -> float:
            f = self._along(x, a, s0)
            try:
                return (f(h) - 2.0 * s0 + f(-h)) / (h * h)
            except InfeasiblePointError:
                log.warning("one-sided second difference at %s (stencil leaves the domain)", tuple(x))
                return (s0 - 2.0 * f(h) + f(2.0 * h)) / (h * h)

        def mixed(a: int, b: int, h: float) -> float:
            def S(da: float, db: float) -> float:
                y = x.copy()
                y[a] += da
                y[b] += db
                return self.solve(y, guess=s0)
            return (S(h, h) - S(h, -h) - S(-h, h) + S(-h, -h)) / (4.0 * h * h)

        for a in range(n):
            h = step_for(x[a], self.tol.chart_second_step)
            out[a, a] = richardson(second(a, h), second(a, 0.5 * h))
            for b in range(a + 1, n):
                h = step_for(max(x[a], x[b]), self.tol.chart_second_step)
                out[a, b] = out[b, a] = richardson(mixed(a, b, h), mixed(a, b, 0.5 * h))
        return out


def make_chart(sys: DirectedEdgeSystem, dependent: Optional[str] = None, *,
               tol: Tolerances = DEFAULT_TOLERANCES) -> EntropyChart:
    """Chart solving for ``dependent`` (default: the last edge in file order)."""
    dep = dependent or sys.edge_ids[-1]
    sys.edge_index(dep)
    free = tuple(e for e in sys.edge_ids if e != dep)
    return EntropyChart(sys, dep, free, tol)


def solve_dependent_edge(chart: EntropyChart, free) -> float:
    return chart.solve(free)


def feasible(chart: EntropyChart, free) -> Tuple[bool, float]:
    return chart.feasible(free)


def _check_tangency(chart: EntropyChart, pd: PerronData, phi: np.ndarray) -> None:
    mean = float(phi @ pd.p)
    if abs(mean) > chart.tol.tangency * max(1.0, float(np.abs(phi).max())):
        raise TangencyError(f"coordinate tangent fails tangency: sum(phi p) = {mean:.3e}")


def coordinate_tangents(chart: EntropyChart, free) -> np.ndarray:
    """Lifted ``d/dx_i`` for every free coordinate (rows), with ``dS/dx_i`` by differences."""
    pt = chart.point(free)
    grad = chart.gradient(free, method="difference", point=pt)
    rows = np.hstack([chart.tangent_basis(grad)] * 2)
    for phi in rows:
        _check_tangency(chart, pt.perron, phi)
    return rows


def tangent_from_direction(chart: EntropyChart, free, direction, *, method: str = "implicit",
                           point: Optional[ChartPoint] = None) -> np.ndarray:
    """Lift of the surface velocity for a free-coordinate direction ``d``."""
    pt = point or chart.point(free)
    d = np.asarray(direction, dtype=float)
    grad = chart.gradient(free, method=method, point=pt)
    und = d @ chart.tangent_basis(grad)
    return np.concatenate([und, und])


def chart_path(chart: EntropyChart, free, direction) -> Callable[[float], np.ndarray]:
    """Surface path ``t -> l(free + t d)`` as directed length vectors."""
    x0 = np.atleast_1d(np.asarray(free, dtype=float))
    d = np.atleast_1d(np.asarray(direction, dtype=float))
    s0 = chart.solve(x0)

    def path(t: float) -> np.ndarray:
        x = x0 + t * d
        return chart.assemble(x, s0 if t == 0.0 else chart.solve(x, guess=s0))
    return path


@dataclass(frozen=True)
class MetricTensorSample:
    kind: str
    base: Tuple[float, ...]
    matrix: np.ndarray
    volume: float
    degraded: bool = False

    @property
    def E(self) -> float:
        return float(self.matrix[0, 0])

    @property
    def F(self) -> Optional[float]:
        return float(self.matrix[0, 1]) if self.matrix.shape[0] > 1 else None

    @property
    def G(self) -> Optional[float]:
        return float(self.matrix[1, 1]) if self.matrix.shape[0] > 1 else None

    def norm2(self, direction) -> float:
        d = np.atleast_1d(np.asarray(direction, dtype=float))
        return float(d @ self.matrix @ d)


def metric_tensor(chart: EntropyChart, free, kind: str = "P", *, method: str = "implicit",
                  guess: Optional[float] = None) -> MetricTensorSample:
    """First fundamental form of the pressure (``P``) or Weil-Petersson (``WP``) metric.

    Diagonal entries are ``Var(d/dx_a)`` from the surface route ``sum lddot p``
    with ``lddot = d2S/dx_a^2`` on the dependent edge; off-diagonal entries
    come from polarization. ``WP`` divides by the volume term.
    """
    kind = parse_kind(kind)
    pt = chart.point(free, guess)
    hess = chart.hessian(free, method=method, point=pt)
    sys = chart.system
    dep = chart.dep_index

    def surface_var(s2: float) -> float:
        und = np.zeros(sys.k)
        und[dep] = s2
        return variance_surface_route(pt.perron, np.concatenate([und, und]))

    n = chart.dim
    g = np.empty((n, n))
    for a in range(n):
        g[a, a] = surface_var(hess[a, a])
    for a in range(n):
        for b in range(a + 1, n):
            both = surface_var(hess[a, a] + 2.0 * hess[a, b] + hess[b, b])
            g[a, b] = g[b, a] = 0.5 * (both - g[a, a] - g[b, b])

    vol = volume_term(pt.perron, pt.lengths)
    if kind == "WP":
        g = g / vol
    degraded = pt.dependent < chart.tol.near_boundary
    if degraded:
        log.warning("dependent length %.3e at %s: near-boundary accuracy", pt.dependent, pt.free)
    g.setflags(write=False)
    return MetricTensorSample(kind, pt.free, g, vol, degraded)


def random_directions(rng: np.random.Generator, dim: int, count: int) -> np.ndarray:
    d = rng.normal(size=(count, dim))
    return d / np.linalg.norm(d, axis=1)[:, None]
