import io

import pytest

from ampcsim.graphs import (
    Graph,
    GraphFormatError,
    gen_cycles,
    gen_random_forest,
    gen_random_graph,
    read_graph,
    write_graph,
)
from ampcsim.oracles import uf_components


def test_graph_rejects_self_loop_and_duplicate():
    with pytest.raises(GraphFormatError):
        Graph(3, [(1, 1)])
    with pytest.raises(GraphFormatError):
        Graph(3, [(0, 1), (1, 0)])
    g = Graph(3, [(0, 1), (1, 0)], multigraph=True)
    assert g.m == 2


def test_graph_rejects_duplicate_weights():
    with pytest.raises(GraphFormatError):
        Graph(3, [(0, 1, 5), (1, 2, 5)], weighted=True)


def test_adjacency_sorted():
    g = Graph(4, [(2, 0), (0, 3), (0, 1)])
    assert g.adjacency()[0] == [1, 2, 3]


def test_gen_cycles_single():
    g = gen_cycles(4, 1, seed=0)
    assert g.n == 4 and g.m == 4
    assert all(d == 2 for d in g.degrees())


def test_gen_cycles_two_pieces_boundary():
    with pytest.raises(ValueError):
        gen_cycles(4, 2, seed=0)
    with pytest.raises(ValueError):
        gen_cycles(7, 2, seed=0)
    g = gen_cycles(6, 2, seed=0)
    assert uf_components(g).component_count() == 2


def test_gen_cycles_two_pieces_large():
    g = gen_cycles(10**4, 2, seed=3)
    labeling = uf_components(g)
    assert labeling.component_count() == 2
    sizes = {}
    for rep in labeling.label:
        sizes[rep] = sizes.get(rep, 0) + 1
    assert sorted(sizes.values()) == [5000, 5000]


def test_gen_cycles_deterministic():
    assert gen_cycles(64, 2, seed=5).edges == gen_cycles(64, 2, seed=5).edges
    assert gen_cycles(64, 2, seed=5).edges != gen_cycles(64, 2, seed=6).edges


def test_gen_random_graph_examples():
    tri = gen_random_graph(3, 3, seed=0)
    assert sorted(tri.edges) == [(0, 1), (0, 2), (1, 2)]
    assert gen_random_graph(10, 0, seed=0).m == 0
    g = gen_random_graph(100, 300, seed=1)
    assert sum(g.degrees()) == 600
    with pytest.raises(ValueError):
        gen_random_graph(4, 7, seed=0)


def test_gen_random_graph_weighted_distinct():
    g = gen_random_graph(50, 200, seed=2, weighted=True)
    weights = [w for _, _, w in g.edges]
    assert len(set(weights)) == 200
    assert set(weights) == set(range(1, 201))


def test_gen_random_forest():
    assert gen_random_forest(1, 1, seed=0).m == 0
    g = gen_random_forest(5, 1, seed=0)
    assert g.m == 4
    assert uf_components(g).component_count() == 1
    big = gen_random_forest(10**4, 7, seed=9)
    assert big.m == 10**4 - 7
    assert uf_components(big).component_count() == 7


def test_generators_deterministic():
    for gen in (
        lambda s: gen_random_graph(40, 100, seed=s, weighted=True),
        lambda s: gen_random_forest(40, 3, seed=s),
    ):
        assert gen(11).edges == gen(11).edges


def test_file_roundtrip():
    g = gen_random_graph(20, 35, seed=4, weighted=True)
    buf = io.StringIO()
    write_graph(g, buf)
    buf.seek(0)
    back = read_graph(buf)
    assert back.n == g.n and back.edges == g.edges and back.weighted


def test_reader_rejections():
    with pytest.raises(GraphFormatError):
        read_graph(io.StringIO("3 1\n1 1\n"))
    with pytest.raises(GraphFormatError):
        read_graph(io.StringIO("3 2\n0 1\n1 0\n"))
    with pytest.raises(GraphFormatError):
        read_graph(io.StringIO("3 2 w\n0 1 5\n1 2 5\n"))
    with pytest.raises(GraphFormatError):
        read_graph(io.StringIO("3 2\n0 1\n"))
    with pytest.raises(GraphFormatError):
        read_graph(io.StringIO(""))
    # Multigraph mode admits what simple mode rejects.
    g = read_graph(io.StringIO("3 2\n0 1\n1 0\n"), multigraph=True)
    assert g.m == 2
