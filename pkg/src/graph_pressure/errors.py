from __future__ import annotations
from typing import Optional


class GraphPressureError(Exception):
    """Base class for every failure raised by graph_pressure."""


class GraphError(GraphPressureError, ValueError):
    """Malformed graph input: bad file syntax, disconnected, trivial, duplicate ids."""


class ConvergenceError(GraphPressureError):
    """An iterative solver hit its cap or lost its bracket."""


class InfeasiblePointError(GraphPressureError):
    """No strictly positive dependent length exists at the requested free lengths."""

    def __init__(self, message: str, margin: Optional[float] = None):
        super().__init__(message)
        self.margin = margin


class TangencyError(GraphPressureError):
    """A potential passed as a tangent direction has nonzero mean."""


class EnumerationBudgetError(GraphPressureError):
    """Brute-force enumeration would exceed the configured word budget."""


class CurvatureError(GraphPressureError):
    """Brioschi stencil left the domain, or the metric is not positive definite."""


class UnknownQuantityError(GraphPressureError, KeyError):
    """The catalog has no closed form for the requested quantity."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""
