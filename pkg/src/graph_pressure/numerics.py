"""Scalar root finding, finite differences and sequence extrapolation."""

from __future__ import annotations
import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ConvergenceError

log = logging.getLogger(__name__)


def safe_newton(func: Callable[[float], Tuple[float, float]], lo: float, hi: float,
                *, x0: Optional[float] = None, flo: Optional[float] = None,
                fhi: Optional[float] = None, xtol: float = 1e-15, ftol: float = 0.0,
                max_iter: int = 200) -> float:
    """Root of ``func`` bracketed by ``[lo, hi]``; ``func(x)`` returns ``(f, df)``.

    Newton steps that leave the current bracket, or that fail to halve the
    residual fast enough, are replaced by bisection (the Numerical Recipes
    ``rtsafe`` scheme). The bracket shrinks monotonically. Known end values
    may be passed as ``flo``/``fhi`` to save evaluations.
    """
    if flo is None:
        flo, _ = func(lo)
    if fhi is None:
        fhi, _ = func(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ConvergenceError(f"root not bracketed on [{lo!r}, {hi!r}] (f = {flo!r}, {fhi!r})")
    # orient so that f(xl) < 0 < f(xh)
    xl, xh = (lo, hi) if flo < 0 else (hi, lo)

    x = 0.5 * (lo + hi) if x0 is None or not (min(lo, hi) < x0 < max(lo, hi)) else x0
    dxold = abs(hi - lo)
    dx = dxold
    f, df = func(x)
    for _ in range(max_iter):
        if abs(f) <= ftol:
            return x
        out_of_bracket = ((x - xh) * df - f) * ((x - xl) * df - f) > 0.0
        if df == 0.0 or out_of_bracket or abs(2.0 * f) > abs(dxold * df):
            dxold = dx
            dx = 0.5 * (xh - xl)
            x = xl + dx
            log.debug("bisection step to %.17g", x)
            if x == xl:
                return x
        else:
            dxold = dx
            dx = f / df
            prev = x
            x = x - dx
            if prev == x:
                return x
        if abs(dx) <= xtol * max(1.0, abs(x)):
            return x
        f, df = func(x)
        if f < 0.0:
            xl = x
        else:
            xh = x
    raise ConvergenceError(f"root solve did not converge in {max_iter} iterations (last x = {x!r})")


def step_for(scale: float, rel: float) -> float:
    return rel * max(1.0, abs(scale))


def central_first(f: Callable[[float], float], x: float, h: float):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def central_second(f: Callable[[float], float], x: float, h: float, fx=None):
    f0 = f(x) if fx is None else fx
    return (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h)


def richardson(coarse, fine, order: int = 2):
    """Combine estimates at steps h and h/2 whose leading error is O(h**order)."""
    r = 2.0 ** order
    return (r * fine - coarse) / (r - 1.0)


def second_derivative(f: Callable[[float], float], x: float, h: float):
    """Central second difference at h and h/2, one Richardson level."""
    f0 = f(x)
    return richardson(central_second(f, x, h, f0), central_second(f, x, 0.5 * h, f0))


def first_derivative(f: Callable[[float], float], x: float, h: float):
    return richardson(central_first(f, x, h), central_first(f, x, 0.5 * h))


def aitken(a0: float, a1: float, a2: float) -> float:
    """Aitken delta-squared limit of three consecutive terms."""
    d2 = a2 - 2.0 * a1 + a0
    if d2 == 0.0 or not math.isfinite(d2):
        return a2
    return a2 - (a2 - a1) ** 2 / d2


def loglog_fit(x, y) -> Tuple[float, float, float]:
    """Least-squares ``log y = a log x + b``; returns ``(a, b, rms residual)``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    (a, b), res, *_ = np.polyfit(lx, ly, 1, full=True)
    rms = math.sqrt(float(res[0]) / len(lx)) if len(res) else 0.0
    return float(a), float(b), rms
