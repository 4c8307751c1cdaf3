"""Thermodynamic formalism for first-coordinate potentials on the edge shift.

A potential is a float vector indexed by directed edge (``f(x) = f(x_0)``).
The transfer operator reduces to ``A_f(i, j) = A(i, j) * exp(f(i))``;
everything else (pressure, equilibrium state, variance) is read off its
Perron data.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ConvergenceError, EnumerationBudgetError, GraphError, TangencyError
from .graph import DirectedEdgeSystem, edge_lengths
from .numerics import aitken, first_derivative, safe_newton, second_derivative, step_for

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PerronData:
    """Spectral radius, left eigenvector, stochastic matrix and stationary vector.

    ``v`` is normalized to max component 1; ``P`` is column-stochastic and
    ``p`` is its stationary vector (``P @ p == p``, ``p.sum() == 1``).
    """

    beta: float
    v: np.ndarray
    P: np.ndarray
    p: np.ndarray

    @property
    def pressure(self) -> float:
        return math.log(self.beta)


def potential(sys: DirectedEdgeSystem, values) -> np.ndarray:
    f = np.asarray(values, dtype=float)
    if f.shape != (sys.size,):
        raise GraphError(f"potential has shape {f.shape}, expected ({sys.size},)")
    if not np.all(np.isfinite(f)):
        raise GraphError("potential values must be finite")
    return f


def weighted_matrix(sys: DirectedEdgeSystem, f) -> np.ndarray:
    f = potential(sys, f)
    return sys.adjacency * np.exp(f)[:, None]


def _check_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise GraphError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise GraphError("matrix must be finite and nonnegative")
    return m


def _dominant(m: np.ndarray) -> tuple[float, np.ndarray]:
    w, vecs = np.linalg.eig(m)
    idx = int(np.argmax(w.real))
    vec = vecs[:, idx]
    vec = (vec / vec[np.argmax(np.abs(vec))]).real
    return float(w[idx].real), vec


def _polish(m: np.ndarray, vec: np.ndarray, sweeps: int = 2) -> tuple[float, np.ndarray]:
    beta = 0.0
    for _ in range(sweeps):
        nxt = m @ vec
        beta = float(nxt.max())
        vec = nxt / beta
    return beta, vec


def _power(m: np.ndarray, tol: Tolerances) -> tuple[float, np.ndarray]:
    """Shifted power iteration from the all-ones vector.

    Stops once every component of ``|m @ vec - beta * vec| / vec`` is below
    half the residual gate of :func:`perron`; ``ms @ vec - lam * vec`` is
    that same residual. The componentwise form keeps column sums of the
    stochastic matrix within the gate even where ``vec`` is small.
    """
    n = m.shape[0]
    shift = float(m.sum()) / n
    ms = m + shift * np.eye(n)
    vec = np.ones(n)
    target = 0.5 * tol.perron_residual
    for _ in range(tol.perron_power_max_iter):
        nxt = ms @ vec
        lam = float(nxt.max())
        beta = lam - shift
        if float(np.max(np.abs(nxt - lam * vec) / vec)) <= target * beta:
            return beta, vec
        vec = nxt / lam
    raise ConvergenceError(f"power iteration did not converge in {tol.perron_power_max_iter} iterations")


def perron(m, *, method: str = "eig", tol: Tolerances = DEFAULT_TOLERANCES) -> PerronData:
    """Perron data of a nonnegative irreducible matrix.

    ``method="power"`` runs shifted power iteration from the all-ones vector;
    ``method="eig"`` starts from the LAPACK eigenpair and polishes it with
    two power sweeps, which restores componentwise accuracy on tiny entries.
    """
    m = _check_matrix(m)
    if method == "eig":
        _, u = _dominant(m)
        _, v = _dominant(m.T)
        _, u = _polish(m, u)
        beta, v = _polish(m.T, v)
    elif method == "power":
        _, u = _power(m, tol)
        beta, v = _power(m.T, tol)
    else:
        raise ValueError(f"unknown Perron method {method!r}")

    if beta <= 0 or np.any(v <= 0) or np.any(u <= 0):
        raise ConvergenceError("Perron vector is not strictly positive (reducible input?)")
    resid = float(np.max(np.abs(v @ m - beta * v)))
    if resid > tol.perron_residual * beta:
        raise ConvergenceError(f"Perron residual {resid:.3e} exceeds {tol.perron_residual:.1e}*beta")

    P = m * v[:, None] / (beta * v[None, :])
    p = v * u
    p /= p.sum()
    for arr in (v, P, p):
        arr.setflags(write=False)
    return PerronData(beta, v, P, p)


def spectral_radius(m) -> float:
    return float(np.max(np.linalg.eigvals(np.asarray(m, dtype=float)).real))


def pressure(sys: DirectedEdgeSystem, f) -> float:
    return math.log(spectral_radius(weighted_matrix(sys, f)))


def pressure_trace_oracle(sys: DirectedEdgeSystem, f, n: int) -> float:
    """``(1/n) log trace(A_f**n)`` by scaled binary powering."""
    if n < 1:
        raise ValueError("n must be >= 1")
    base = weighted_matrix(sys, f)
    result = np.eye(sys.size)
    log_result = 0.0
    log_base = 0.0
    k = n
    while k:
        if k & 1:
            result = result @ base
            s = float(np.abs(result).max())
            result /= s
            log_result += log_base + math.log(s)
        k >>= 1
        if k:
            base = base @ base
            s = float(np.abs(base).max())
            base /= s
            log_base = 2.0 * log_base + math.log(s)
    tr = float(np.trace(result))
    if tr <= 0.0:
        return -math.inf
    return (log_result + math.log(tr)) / n


def entropy(sys: DirectedEdgeSystem, l, *, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Unique ``s`` with ``P(-s*l) = 0`` (safeguarded Newton on a fixed bracket)."""
    lv = edge_lengths(sys, l)

    def f(s: float):
        pd = perron(weighted_matrix(sys, -s * lv), tol=tol)
        return math.log(pd.beta), -float(lv @ pd.p)

    lo = tol.entropy_bracket_lo
    hi = math.log(sys.size) / float(lv.min())
    guess = math.log(spectral_radius(sys.adjacency)) / float(lv.mean())
    s = safe_newton(f, lo, hi, x0=guess, max_iter=tol.root_max_iter)
    resid = pressure(sys, -s * lv)
    if abs(resid) > tol.root_residual:
        raise ConvergenceError(f"entropy residual {resid:.3e} above {tol.root_residual:.1e}")
    return s


class CountingResult(NamedTuple):
    count: int
    rate: float
    lengths: np.ndarray


def _successor_table(sys: DirectedEdgeSystem, transpose: bool = False) -> np.ndarray:
    a = sys.adjacency.T if transpose else sys.adjacency
    rows = [np.flatnonzero(r) for r in a]
    width = max(len(r) for r in rows)
    table = np.full((sys.size, width), -1, dtype=np.int64)
    for i, r in enumerate(rows):
        table[i, : len(r)] = r
    return table


def periodic_lengths(sys: DirectedEdgeSystem, l, T: float, *,
                     budget: int = DEFAULT_TOLERANCES.word_budget) -> np.ndarray:
    """Sorted lengths of all periodic points with period-length below ``T``.

    Admissible words are grown level by level, carrying only (first letter,
    last letter, accumulated length); a word is a periodic point when its last
    letter may be followed by its first.
    """
    lv = edge_lengths(sys, l)
    succ = _successor_table(sys)
    a = sys.adjacency
    first = np.arange(sys.size)
    last = first.copy()
    acc = lv.copy()
    keep = acc < T
    first, last, acc = first[keep], last[keep], acc[keep]
    found = []
    seen = 0
    while first.size:
        seen += first.size
        if seen > budget:
            raise EnumerationBudgetError(f"more than {budget} prefixes below T = {T}")
        closes = a[last, first] == 1
        found.append(acc[closes])
        nxt = succ[last]
        valid = nxt >= 0
        reps = valid.sum(axis=1)
        last = nxt[valid]
        first = np.repeat(first, reps)
        acc = np.repeat(acc, reps) + lv[last]
        keep = acc < T
        first, last, acc = first[keep], last[keep], acc[keep]
    return np.sort(np.concatenate(found)) if found else np.empty(0)


def entropy_counting_oracle(sys: DirectedEdgeSystem, l, T: float, *, window: float = 0.5,
                            samples: int = 64,
                            budget: int = DEFAULT_TOLERANCES.word_budget) -> CountingResult:
    """Count periodic points of length < T and fit their exponential growth rate.

    The rate is the least-squares slope of ``log N(t)`` over ``t`` in
    ``[window*T, T]``.
    """
    lens = periodic_lengths(sys, l, T, budget=budget)
    ts = np.linspace(window * T, T, samples)
    counts = np.searchsorted(lens, ts, side="left")
    ok = counts > 0
    if ok.sum() < 2:
        return CountingResult(int(lens.size), math.nan, lens)
    slope, _ = np.polyfit(ts[ok], np.log(counts[ok]), 1)
    return CountingResult(int(lens.size), float(slope), lens)


def cylinder_measures(pd: PerronData, words) -> np.ndarray:
    """Vectorized cylinder measure for an ``(N, n)`` integer array of words."""
    w = np.atleast_2d(np.asarray(words, dtype=np.int64))
    if w.shape[1] == 0:
        raise GraphError("word must be nonempty")
    if w.min() < 0 or w.max() >= pd.p.size:
        raise GraphError("directed edge index out of range")
    out = pd.p[w[:, -1]].copy()
    for c in range(w.shape[1] - 1):
        out *= pd.P[w[:, c], w[:, c + 1]]
    return out


def cylinder_measure(pd: PerronData, word: Sequence[int]) -> float:
    return float(cylinder_measures(pd, [list(word)])[0])


def _check_tangent(pd: PerronData, phi: np.ndarray, tol: Tolerances) -> None:
    mean = float(phi @ pd.p)
    if abs(mean) > tol.tangency * max(1.0, float(np.abs(phi).max(initial=0.0))):
        raise TangencyError(f"direction is not tangent: mean {mean:.3e}")


def variance_hessian(sys: DirectedEdgeSystem, l, phi, *,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``d^2/dt^2 P(-l + t*phi)`` at 0 by central differences with Richardson."""
    lv = edge_lengths(sys, l)
    phi = potential(sys, phi)
    pd = perron(weighted_matrix(sys, -lv), tol=tol)
    _check_tangent(pd, phi, tol)
    scale = float(np.abs(phi).max(initial=0.0))
    if scale == 0.0:
        return 0.0
    # t * phi moves each length by at most variance_step
    h = tol.variance_step / scale
    return float(second_derivative(lambda t: pressure(sys, -lv + t * phi), 0.0, h))


def variance_surface_route(pd: PerronData, lddot) -> float:
    """``sum_i lddot(i) * p(i)`` for the second derivative of a surface path."""
    lddot = np.asarray(lddot, dtype=float)
    if lddot.shape != pd.p.shape:
        raise GraphError(f"lddot has shape {lddot.shape}, expected {pd.p.shape}")
    return float(lddot @ pd.p)


def normalized_cocycle(lv: np.ndarray, pd: PerronData) -> np.ndarray:
    """``g(i, j) = log v(i) - log v(j) - l(i) - log beta`` on every pair (masked later)."""
    logv = np.log(pd.v)
    return logv[:, None] - logv[None, :] - lv[:, None] - math.log(pd.beta)


def variance_cocycle_route(sys: DirectedEdgeSystem, path: Callable[[float], np.ndarray], *,
                           h: Optional[float] = None,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``sum (dg/dt)^2 P(i,j) p(j)`` for a surface path ``t -> l_t`` at ``t = 0``."""
    l0 = np.asarray(path(0.0), dtype=float)
    pd0 = perron(weighted_matrix(sys, -l0), tol=tol)
    if h is None:
        h = step_for(float(l0.max()), tol.first_step)

    def g(t: float) -> np.ndarray:
        lt = np.asarray(path(t), dtype=float)
        pd = pd0 if t == 0.0 else perron(weighted_matrix(sys, -lt), tol=tol)
        if abs(pd.pressure) > tol.surface_drift:
            raise ConvergenceError(f"path leaves the surface at t={t:.3g} (pressure {pd.pressure:.3e})")
        return normalized_cocycle(lt, pd)

    gdot = first_derivative(g, 0.0, h)
    mask = sys.adjacency == 1
    weight = pd0.P * pd0.p[None, :]
    return float(np.sum((gdot[mask] ** 2) * weight[mask]))


def _word_count(sys: DirectedEdgeSystem, n: int) -> int:
    a = [[int(x) for x in row] for row in sys.adjacency]
    vec = [1] * sys.size
    for _ in range(n - 1):
        vec = [sum(a[i][j] * vec[j] for j in range(sys.size)) for i in range(sys.size)]
    return sum(vec)


def admissible_words(sys: DirectedEdgeSystem, n: int, *,
                     budget: int = DEFAULT_TOLERANCES.word_budget) -> np.ndarray:
    """All admissible words of length ``n`` as an ``(N, n)`` array, grown by prepending."""
    total = _word_count(sys, n)
    if total > budget:
        raise EnumerationBudgetError(f"{total} words of length {n} exceed budget {budget}")
    preds = _successor_table(sys, transpose=True)
    words = np.arange(sys.size, dtype=np.int16)[:, None]
    for _ in range(n - 1):
        cand = preds[words[:, 0]]
        valid = cand >= 0
        reps = valid.sum(axis=1)
        words = np.concatenate([cand[valid].astype(np.int16)[:, None],
                                np.repeat(words, reps, axis=0)], axis=1)
    return words


def _word_second_moment(sys, pd, phi, n, budget) -> float:
    words = admissible_words(sys, n, budget=budget)
    sums = phi[words].sum(axis=1)
    return float(np.sum(sums ** 2 * cylinder_measures(pd, words))) / n


def variance_word_oracle(sys: DirectedEdgeSystem, l, phi, n: int, *,
                         extrapolate: Optional[str] = None,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Brute-force ``(1/n) sum_w (phi^n(w))^2 m[w]`` over admissible words.

    ``extrapolate="richardson"`` removes the ``-C/n`` bias using lengths
    ``n+2`` and ``n+4``; ``"aitken"`` applies delta-squared to ``n, n+2, n+4``.
    """
    lv = edge_lengths(sys, l)
    phi = potential(sys, phi)
    pd = perron(weighted_matrix(sys, -lv), tol=tol)
    _check_tangent(pd, phi, tol)
    if extrapolate is None:
        return _word_second_moment(sys, pd, phi, n, tol.word_budget)
    a0, a1, a2 = (_word_second_moment(sys, pd, phi, m, tol.word_budget) for m in (n, n + 2, n + 4))
    if extrapolate == "richardson":
        return ((n + 4) * a2 - (n + 2) * a1) / 2.0
    if extrapolate == "aitken":
        return aitken(a0, a1, a2)
    raise ValueError(f"unknown extrapolation {extrapolate!r}")


def asymptotic_covariance(pd: PerronData, phis) -> np.ndarray:
    """Asymptotic covariance matrix of Birkhoff sums for the rows of ``phis``.

    Uses the fundamental matrix ``Z = (I - P + p 1^T)^-1`` of the equilibrium
    chain: ``Cov = Phi D Phi^T + Phi Y + (Phi Y)^T`` with ``Y = (Z - I) D Phi^T``
    on mean-zero rows.
    """
    phi = np.atleast_2d(np.asarray(phis, dtype=float))
    phi = phi - (phi @ pd.p)[:, None]
    n = pd.p.size
    d_phi = pd.p[:, None] * phi.T
    fundamental = np.eye(n) - pd.P + np.outer(pd.p, np.ones(n))
    y = np.linalg.solve(fundamental, d_phi) - d_phi
    cross = phi @ y
    return phi @ d_phi + cross + cross.T


def variance_fundamental(pd: PerronData, phi) -> float:
    return float(asymptotic_covariance(pd, phi)[0, 0])


def pressure_gradient(sys: DirectedEdgeSystem, pd: PerronData) -> np.ndarray:
    """``dP(-l)/dl_e = -(p(e) + p(e~))`` per undirected edge."""
    return -sys.fold(pd.p)


def pressure_hessian(sys: DirectedEdgeSystem, pd: PerronData) -> np.ndarray:
    """Hessian of ``l -> P(-l)`` in undirected lengths: covariance of edge indicators."""
    indicators = np.hstack([np.eye(sys.k), np.eye(sys.k)])
    return asymptotic_covariance(pd, indicators)
