"""Thermodynamic geometry of metric graphs (packaged).

This package provides a CLI and library functions for the entropy of edge
weightings, equilibrium states of the non-backtracking edge shift, the
pressure and Weil-Petersson metrics on the entropy-one moduli surface, their
Gaussian curvature and completeness probes, plus four worked example graphs
with closed-form checks.
"""

__all__ = [
    "catalog",
    "cli",
    "config",
    "errors",
    "geometry",
    "graph",
    "moduli",
    "numerics",
    "thermo",
    "utils",
]

__version__ = "0.1.0"
