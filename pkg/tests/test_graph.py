import numpy as np
import pytest

from graph_pressure.catalog import EXAMPLES, printed_adjacency
from graph_pressure.errors import GraphError
from graph_pressure.graph import (build_directed_system, edge_lengths, graph_from_edges, is_irreducible,
                                  load_graph, parse_graph, summarize)


def test_printed_adjacency_reproduced(catalog):
    for eid in EXAMPLES:
        _, sys, _ = catalog[eid]
        assert np.array_equal(sys.adjacency, printed_adjacency(eid)), eid


def test_figure8_zeros_exactly_at_reversals(catalog):
    a = catalog["figure8"][1].adjacency
    zeros = {tuple(z) for z in np.argwhere(a == 0)}
    assert zeros == {(0, 2), (1, 3), (2, 0), (3, 1)}


def test_adjacency_definition_and_reversal_symmetry(catalog):
    for eid in EXAMPLES:
        sys = catalog[eid][1]
        for i in range(sys.size):
            assert sys.reversal(sys.reversal(i)) == i
            assert sys.reversal(i) != i
            for j in range(sys.size):
                want = int(sys.heads[i] == sys.tails[j] and j != sys.reversal(i))
                assert sys.adjacency[i, j] == want
                assert sys.adjacency[i, j] == sys.adjacency[sys.reversal(j), sys.reversal(i)]


def test_loop_follows_itself(catalog):
    a = catalog["figure8"][1].adjacency
    assert all(a[i, i] == 1 for i in range(4))


def test_rejects_single_edge():
    g = graph_from_edges([("e1", "a", "b")])
    with pytest.raises(GraphError, match="cycle rank"):
        build_directed_system(g)


def test_rejects_single_loop():
    with pytest.raises(GraphError, match="trivial"):
        build_directed_system(graph_from_edges([("e1", "a", "a")]))


def test_rejects_disconnected():
    g = graph_from_edges([("e1", "a", "a"), ("e2", "a", "a"), ("e3", "b", "b")])
    with pytest.raises(GraphError, match="disconnected"):
        build_directed_system(g)


def test_rejects_duplicate_ids():
    g = graph_from_edges([("e1", "a", "a"), ("e1", "a", "a")])
    with pytest.raises(GraphError, match="duplicate"):
        build_directed_system(g)


def test_is_irreducible():
    assert not is_irreducible(np.zeros((3, 3)))
    assert is_irreducible(np.array([[0, 1], [1, 0]]))
    assert not is_irreducible(np.array([[1, 1], [0, 1]]))
    assert is_irreducible(np.array([[1]]))
    assert not is_irreducible(np.array([[0]]))
    assert not is_irreducible(np.ones((2, 3)))


def test_parse_graph_comments_and_implicit_vertices():
    text = """
    # theta graph
    vertex a
    edge  e1 a b   # trailing comment
    edge e2 a b
    edge e3 b a
    """
    g = parse_graph(text, name="theta")
    assert g.vertices == ("a", "b")
    assert g.edge_ids == ("e1", "e2", "e3")
    assert g.cycle_rank == 2
    sys = build_directed_system(g)
    assert sys.size == 6
    assert "2 vertices, 3 edges" in summarize(sys)


def test_parse_graph_reports_line():
    with pytest.raises(GraphError, match="line 2"):
        parse_graph("vertex a\nedgy e1 a a\n")


def test_ids_are_case_sensitive():
    g = parse_graph("edge E a a\nedge e a a\n")
    assert g.edge_ids == ("E", "e")
    build_directed_system(g)


def test_load_graph_and_determinism(graph_file):
    p = graph_file("edge e1 a a\nedge e2 a b\nedge e3 b b\n")
    s1 = build_directed_system(load_graph(p))
    s2 = build_directed_system(load_graph(p))
    assert s1.tails == s2.tails and s1.heads == s2.heads
    assert np.array_equal(s1.adjacency, s2.adjacency)
    assert s1.graph.name == "g"


def test_load_missing_file(tmp_path):
    with pytest.raises(GraphError, match="cannot read"):
        load_graph(tmp_path / "nope.graph")


def test_lift_fold_and_lengths(catalog):
    sys = catalog["dumbbell"][1]
    vec = edge_lengths(sys, {"e1": 1.0, "e2": 2.0, "e3": 3.0})
    assert vec.tolist() == [1.0, 2.0, 3.0, 1.0, 2.0, 3.0]
    assert sys.fold(vec).tolist() == [2.0, 4.0, 6.0]
    assert sys.label(4) == "e2~"
    with pytest.raises(GraphError, match="no value"):
        sys.lift({"e1": 1.0})
    with pytest.raises(GraphError, match="positive"):
        edge_lengths(sys, [1.0, 0.0, 1.0])
    with pytest.raises(GraphError, match="unknown edge"):
        sys.edge_index("e9")
