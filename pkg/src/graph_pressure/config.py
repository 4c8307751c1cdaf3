"""Numerical tolerances and step rules shared by every module.

All knobs live on one frozen dataclass so a run can be reproduced from the
values it printed. The CLI overrides fields with ``--tol name=value``.
"""

from __future__ import annotations
from dataclasses import dataclass, fields, replace
from typing import Dict, Iterable


@dataclass(frozen=True)
class Tolerances:
    # Perron data
    perron_power_max_iter: int = 1_000_000
    perron_residual: float = 1e-12

    # root solves
    root_residual: float = 1e-12
    root_max_iter: int = 200
    entropy_bracket_lo: float = 1e-8

    # finite differences (relative to max(1, scale))
    first_step: float = 1e-5
    variance_step: float = 2e-3
    chart_second_step: float = 1e-3
    brioschi_step: float = 1e-3
    brioschi_boundary_fraction: float = 1e-3
    brioschi_agreement: float = 1e-4
    curvature_floor: float = 1e-2

    # checks
    tangency: float = 1e-8
    surface_drift: float = 1e-9
    boundary: float = 1e-9
    near_boundary: float = 1e-6

    # completeness tests
    samples_per_decade: int = 12
    decades: int = 3
    divergence_band: float = 0.05
    window_floor: float = 1e-9
    log_fit_rms: float = 0.25
    quad_rel: float = 1e-10
    quad_abs: float = 1e-12

    # brute-force oracles
    word_budget: int = 5_000_000

    def override(self, **changes) -> "Tolerances":
        return replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()


def tolerance_names() -> Iterable[str]:
    return [f.name for f in fields(Tolerances)]


def parse_overrides(items: Iterable[str], base: Tolerances = DEFAULT_TOLERANCES) -> Tolerances:
    """Apply ``name=value`` strings to ``base``.

    Integer fields accept values such as ``1e6``. Unknown names and bad
    numbers raise ``ValueError`` naming the offending item.
    """
    kinds: Dict[str, type] = {f.name: type(getattr(base, f.name)) for f in fields(Tolerances)}
    changes = {}
    for raw in items:
        if "=" not in raw:
            raise ValueError(f"--tol expects name=value, got {raw!r}")
        name, val = (s.strip() for s in raw.split("=", 1))
        if name not in kinds:
            raise ValueError(f"unknown tolerance {name!r}")
        try:
            num = float(val)
        except ValueError:
            raise ValueError(f"--tol {name}: not a number: {val!r}") from None
        changes[name] = int(num) if kinds[name] is int else num
    return replace(base, **changes)
