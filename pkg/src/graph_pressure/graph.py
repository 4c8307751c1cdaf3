"""Undirected metric graphs and their non-backtracking directed-edge shift.

Graph files are line oriented::

    # comment
    vertex a
    edge e1 a a
    edge e2 a b

Directed edges are indexed ``0 .. 2k-1``: index ``i < k`` is the forward copy
of the i-th undirected edge (file order), ``i + k`` its reversal.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import GraphError


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str

    @property
    def is_loop(self) -> bool:
        return self.u == self.v


@dataclass(frozen=True)
class UndirectedGraph:
    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    name: str = ""

    @property
    def edge_ids(self) -> Tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    @property
    def cycle_rank(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def to_networkx(self) -> nx.MultiGraph:
        mg = nx.MultiGraph()
        mg.add_nodes_from(self.vertices)
        for e in self.edges:
            mg.add_edge(e.u, e.v, key=e.id)
        return mg

    def validate(self) -> None:
        seen = set()
        for e in self.edges:
            if e.id in seen:
                raise GraphError(f"duplicate edge id {e.id!r}")
            seen.add(e.id)
        if not self.vertices:
            raise GraphError("graph has no vertices")
        if not nx.is_connected(self.to_networkx()):
            raise GraphError("graph is disconnected")
        if self.cycle_rank < 2:
            raise GraphError(f"trivial graph: cycle rank {self.cycle_rank} < 2")


def graph_from_edges(edges: Iterable[Tuple[str, str, str]], vertices: Sequence[str] = (),
                     name: str = "") -> UndirectedGraph:
    """Assemble a graph; vertices not listed explicitly are added in order of first use."""
    order: List[str] = list(dict.fromkeys(vertices))
    recs: List[Edge] = []
    for eid, u, v in edges:
        for w in (u, v):
            if w not in order:
                order.append(w)
        recs.append(Edge(eid, u, v))
    return UndirectedGraph(tuple(order), tuple(recs), name)


def parse_graph(text: str, name: str = "") -> UndirectedGraph:
    vertices: List[str] = []
    edges: List[Tuple[str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0]
        if kw == "vertex" and len(parts) == 2:
            vertices.append(parts[1])
        elif kw == "edge" and len(parts) == 4:
            edges.append((parts[1], parts[2], parts[3]))
        else:
            raise GraphError(f"line {lineno}: cannot parse {raw.strip()!r}")
    return graph_from_edges(edges, vertices, name)


def load_graph(path: Path | str) -> UndirectedGraph:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise GraphError(f"cannot read graph file {p}: {exc.strerror or exc}") from None
    return parse_graph(text, name=p.stem)


def is_irreducible(a) -> bool:
    """True iff every state reaches every state along positive entries.

    Decided by strong connectivity of the transition digraph (reachability
    closure), never by matrix powers.
    """
    m = np.asarray(a)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        return False
    if m.shape[0] == 1:
        return bool(m[0, 0] > 0)
    g = nx.DiGraph()
    g.add_nodes_from(range(m.shape[0]))
    g.add_edges_from(zip(*np.nonzero(m > 0)))
    return nx.is_strongly_connected(g)


@dataclass(frozen=True)
class DirectedEdgeSystem:
    graph: UndirectedGraph
    tails: Tuple[str, ...]
    heads: Tuple[str, ...]
    adjacency: np.ndarray = field(repr=False, compare=False)

    @property
    def k(self) -> int:
        return len(self.graph.edges)

    @property
    def size(self) -> int:
        return 2 * self.k

    @property
    def edge_ids(self) -> Tuple[str, ...]:
        return self.graph.edge_ids

    def reversal(self, i: int) -> int:
        return (i + self.k) % self.size

    def edge_index(self, edge_id: str) -> int:
        try:
            return self.edge_ids.index(edge_id)
        except ValueError:
            raise GraphError(f"unknown edge id {edge_id!r}") from None

    def label(self, i: int) -> str:
        eid = self.edge_ids[i % self.k]
        return eid if i < self.k else eid + "~"

    def successors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[i])

    def lift(self, values) -> np.ndarray:
        """Undirected per-edge values (sequence or id mapping) → directed vector, equal on e and ē."""
        if isinstance(values, Mapping):
            missing = [e for e in self.edge_ids if e not in values]
            if missing:
                raise GraphError(f"no value for edge(s) {', '.join(missing)}")
            vals = np.array([float(values[e]) for e in self.edge_ids])
        else:
            vals = np.asarray(values, dtype=float)
            if vals.shape != (self.k,):
                raise GraphError(f"expected {self.k} edge values, got shape {vals.shape}")
        return np.concatenate([vals, vals])

    def fold(self, directed) -> np.ndarray:
        """Directed vector → per-undirected-edge sums ``x(e) + x(ē)``."""
        d = np.asarray(directed, dtype=float)
        return d[: self.k] + d[self.k:]


def build_directed_system(g: UndirectedGraph) -> DirectedEdgeSystem:
    g.validate()
    k = len(g.edges)
    tails = [e.u for e in g.edges] + [e.v for e in g.edges]
    heads = [e.v for e in g.edges] + [e.u for e in g.edges]
    a = np.zeros((2 * k, 2 * k), dtype=np.int8)
    for i in range(2 * k):
        rev = (i + k) % (2 * k)
        for j in range(2 * k):
            if heads[i] == tails[j] and j != rev:
                a[i, j] = 1
    a.setflags(write=False)
    if not is_irreducible(a):
        raise GraphError("non-backtracking adjacency is reducible")
    return DirectedEdgeSystem(g, tuple(tails), tuple(heads), a)


def edge_lengths(sys: DirectedEdgeSystem, lengths: Mapping[str, float] | Sequence[float]) -> np.ndarray:
    """Validated directed length vector; every length strictly positive."""
    vec = sys.lift(lengths)
    if not np.all(np.isfinite(vec)) or np.any(vec <= 0):
        raise GraphError("edge lengths must be finite and strictly positive")
    return vec


def as_mapping(sys: DirectedEdgeSystem, values: Sequence[float]) -> Dict[str, float]:
    return {eid: float(v) for eid, v in zip(sys.edge_ids, values)}


def summarize(sys: DirectedEdgeSystem, name: Optional[str] = None) -> str:
    g = sys.graph
    return (f"{name or g.name or 'graph'}: {len(g.vertices)} vertices, {sys.k} edges, "
            f"cycle rank {g.cycle_rank}, {sys.size} directed states")
