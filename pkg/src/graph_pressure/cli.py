from __future__ import annotations
import argparse
import logging
import math
import sys
from typing import Dict, List, Optional, Tuple

from .catalog import EXAMPLES, catalog_graph, verify
from .config import DEFAULT_TOLERANCES, Tolerances, parse_overrides, tolerance_names
from .errors import GraphPressureError
from .geometry import Axis, brioschi_curvature, curvature_grid, metric_field, path_length, speed_along
from .graph import DirectedEdgeSystem, build_directed_system, load_graph
from .moduli import EntropyChart, make_chart, metric_tensor, normalize_entropy
from .thermo import entropy
from .utils import fmt_num, parse_assignments, parse_float, parse_range, split_axes

log = logging.getLogger("graph_pressure")


class UsageError(Exception):
    """Bad flag values; reported with exit status 2."""


def load_system(args) -> DirectedEdgeSystem:
    """Graph source precedence: ``--example`` (packaged) else ``--graph`` (file)."""
    if args.example:
        return catalog_graph(args.example)[1]
    return build_directed_system(load_graph(args.graph))


def resolve_tolerances(args) -> Tolerances:
    try:
        return parse_overrides(args.tol or [], DEFAULT_TOLERANCES)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _assignments(flag: str, text: Optional[str]) -> Dict[str, float]:
    if not text:
        raise UsageError(f"{flag} is required")
    try:
        return parse_assignments(text)
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _chart(sys: DirectedEdgeSystem, args, tol: Tolerances) -> Tuple[EntropyChart, Tuple[float, ...]]:
    """Chart from ``--dep`` and the free point from ``--free`` (every other edge)."""
    free = _assignments("--free", args.free)
    dep = args.dep
    if dep is None:
        missing = [e for e in sys.edge_ids if e not in free]
        if len(missing) != 1:
            raise UsageError("--free must name every edge but one (or pass --dep)")
        dep = missing[0]
    if dep not in sys.edge_ids:
        raise UsageError(f"--dep: unknown edge {dep!r}")
    chart = make_chart(sys, dep, tol=tol)
    extra = sorted(set(free) - set(chart.free_edges))
    missing = [e for e in chart.free_edges if e not in free]
    if extra or missing:
        raise UsageError(f"--free must assign exactly {', '.join(chart.free_edges)}")
    return chart, tuple(free[e] for e in chart.free_edges)


# ---------------------------------------------------
# subcommands

def cmd_entropy(args, tol: Tolerances) -> int:
    sys_ = load_system(args)
    lengths = _assignments("--lengths", args.lengths)
    print(fmt_num(entropy(sys_, lengths, tol=tol)))
    return 0


def cmd_normalize(args, tol: Tolerances) -> int:
    sys_ = load_system(args)
    lengths = _assignments("--lengths", args.lengths)
    normed = normalize_entropy(sys_, lengths, tol=tol)
    print(",".join(f"{k}={fmt_num(v)}" for k, v in normed.items()))
    return 0


def cmd_surface(args, tol: Tolerances) -> int:
    chart, free = _chart(load_system(args), args, tol)
    print(fmt_num(chart.solve(free)))
    return 0


def cmd_tensor(args, tol: Tolerances) -> int:
    chart, free = _chart(load_system(args), args, tol)
    sample = metric_tensor(chart, free, args.metric, method=args.method)
    print(f"E {fmt_num(sample.E)}")
    if chart.dim == 2:
        print(f"F {fmt_num(sample.F)}")
        print(f"G {fmt_num(sample.G)}")
    elif chart.dim > 2:
        for i, row in enumerate(sample.matrix):
            print(f"row{i + 1} " + " ".join(fmt_num(v) for v in row))
    print(f"V {fmt_num(sample.volume)}")
    if sample.degraded:
        print("warning: near-boundary point, accuracy degraded", file=sys.stderr)
    return 0


def cmd_curvature(args, tol: Tolerances) -> int:
    sys_ = load_system(args)
    chart = make_chart(sys_, args.dep, tol=tol)
    if chart.dim != 2:
        raise UsageError(f"curvature needs a graph with three edges (2-D chart), got {sys_.k} edges")
    fld = metric_field(chart, args.metric, method=args.method)
    if args.at:
        try:
            x, y = (parse_float(v, "--at") for v in args.at.split(","))
        except ValueError as exc:
            raise UsageError(f"--at: {exc}") from None
        print(fmt_num(brioschi_curvature(fld, x, y, args.step, tol=tol)))
        return 0
    if not args.grid:
        raise UsageError("one of --grid or --at is required")
    try:
        axes = [Axis.parse(a) for a in split_axes(args.grid)]
    except ValueError as exc:
        raise UsageError(f"--grid: {exc}") from None
    grid = curvature_grid(fld, axes, args.out, workers=args.workers, h=args.step,
                          progress_bar=not args.quiet, tol=tol)
    if args.out is None:
        print("x,y,K")
        for x, y, k in grid.rows():
            print(f"{fmt_num(x)},{fmt_num(y)},{fmt_num(k)}")
    else:
        print(str(args.out))
    return 0


def _probe_path(chart: EntropyChart, spec: str, start: float):
    n = chart.dim
    if spec == "diagonal":
        base, direction = [0.0] * n, [1.0] * n
    elif spec.startswith("axis:"):
        eid = spec.split(":", 1)[1]
        if eid not in chart.free_edges:
            raise UsageError(f"--path: {eid!r} is not a free edge ({', '.join(chart.free_edges)})")
        i = chart.free_edges.index(eid)
        base = [start] * n
        base[i] = 0.0
        direction = [0.0] * n
        direction[i] = 1.0
    else:
        raise UsageError(f"--path must be diagonal or axis:<edge>, got {spec!r}")
    return (lambda t: [b + t * d for b, d in zip(base, direction)]), (lambda t: direction)


def cmd_probe(args, tol: Tolerances) -> int:
    chart = make_chart(load_system(args), args.dep, tol=tol)
    path, velocity = _probe_path(chart, args.path, args.start)
    window = None
    if args.window:
        try:
            window = parse_range(args.window)
        except ValueError as exc:
            raise UsageError(f"--window: {exc}") from None
    speed = speed_along(chart, args.metric, path, velocity, method=args.method)
    if args.toward == "inf":
        res = path_length(speed, args.start, math.inf, toward=math.inf, window=window, tol=tol)
    else:
        res = path_length(speed, 0.0, args.start, toward=0.0, window=window, tol=tol)
    print(f"kind {res.kind}")
    print(f"length {fmt_num(res.length)}")
    print(f"exponent {fmt_num(res.exponent)}")
    print(f"growth {fmt_num(res.growth)}")
    return 0


def cmd_verify(args, tol: Tolerances) -> int:
    if args.graph:
        raise UsageError("verify works on catalog examples only (use --example)")
    ids = [args.example] if args.example else list(EXAMPLES)
    ok = True
    for eid in ids:
        report = verify(eid, tol, progress_bar=not args.quiet)
        sys.stdout.write(report.text())
        if args.csv:
            path = args.csv if len(ids) == 1 else _suffixed(args.csv, eid)
            report.to_csv(path)
        ok = ok and report.passed
    return 0 if ok else 1


def _suffixed(path: str, eid: str) -> str:
    stem, dot, ext = path.rpartition(".")
    return f"{stem}-{eid}.{ext}" if dot else f"{path}-{eid}"


COMMANDS = {
    "entropy": cmd_entropy,
    "normalize": cmd_normalize,
    "surface": cmd_surface,
    "tensor": cmd_tensor,
    "curvature": cmd_curvature,
    "probe": cmd_probe,
    "verify": cmd_verify,
}


# ---------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--example", choices=EXAMPLES, default=None, help="Built-in catalog graph.")
    src.add_argument("--graph", default=None, help="Path to a graph file (vertex/edge lines).")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help=f"Override a tolerance (repeatable). Names: {', '.join(tolerance_names())}.")
    common.add_argument("--verbose", action="store_true", help="Debug logging on stderr.")
    common.add_argument("--quiet", action="store_true", help="No progress bar; log errors only.")

    chart = argparse.ArgumentParser(add_help=False)
    chart.add_argument("--dep", default=None, help="Dependent edge id (default: last edge).")
    chart.add_argument("--method", choices=("implicit", "difference"), default="implicit",
                       help="How second derivatives of the dependent length are taken.")

    metric = argparse.ArgumentParser(add_help=False)
    metric.add_argument("--metric", choices=("P", "WP"), default="P", help="Pressure or Weil-Petersson metric.")

    p = argparse.ArgumentParser(
        prog="graph-pressure",
        description=(
            "Thermodynamic geometry of metric graphs: entropy, the entropy-one surface,\n"
            "pressure and Weil-Petersson metrics, curvature and completeness probes.\n"
            "All configuration is via flags; numbers are printed with 15 significant digits."
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("entropy", parents=[common], help="Entropy of an edge weighting.")
    s.add_argument("--lengths", help="Edge lengths as id=value,...")

    s = sub.add_parser("normalize", parents=[common], help="Rescale lengths to entropy one.")
    s.add_argument("--lengths", help="Edge lengths as id=value,...")

    s = sub.add_parser("surface", parents=[common, chart], help="Solve the dependent length.")
    s.add_argument("--free", help="Free lengths as id=value,...")

    s = sub.add_parser("tensor", parents=[common, chart, metric], help="First fundamental form at a point.")
    s.add_argument("--free", help="Free lengths as id=value,...")

    s = sub.add_parser("curvature", parents=[common, chart, metric], help="Gaussian curvature at a point or on a grid.")
    s.add_argument("--grid", help="Axes as min:max:count,min:max:count.")
    s.add_argument("--at", help="Single point x,y.")
    s.add_argument("--out", default=None, help="CSV output path (default: stdout).")
    s.add_argument("--workers", type=int, default=1, help="Process pool size for grids.")
    s.add_argument("--step", type=float, default=None, help="Brioschi step h (default: relative rule).")

    s = sub.add_parser("probe", parents=[common, chart, metric], help="Completeness probe along a chart path.")
    s.add_argument("--path", default="diagonal", help="diagonal | axis:<edge id>.")
    s.add_argument("--toward", choices=("0", "inf"), default="0", help="Singular end of the path.")
    s.add_argument("--from", dest="start", type=float, default=1.0,
                   help="Finite end of the path parameter; other axis coordinates sit here too.")
    s.add_argument("--window", default=None, help="Endpoint sample window lo:hi.")

    s = sub.add_parser("verify", parents=[common], help="Check the engine against catalog closed forms.")
    s.add_argument("--csv", default=None, help="Write the report as CSV.")
    return p


def configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else (logging.ERROR if quiet else logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    log.setLevel(level)


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    if args.command != "verify" and not (args.example or args.graph):
        ap.error(f"{args.command}: one of --example or --graph is required")
    try:
        tol = resolve_tolerances(args)
        return COMMANDS[args.command](args, tol)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GraphPressureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
