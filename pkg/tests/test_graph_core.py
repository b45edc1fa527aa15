from __future__ import annotations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homshift.builtins import builtin, complete_graph, cycle_graph, hard_core, path_graph
from homshift.errors import AlreadyBipartite, NotConnected, ParseError
from homshift.graphs import (
    Graph,
    bipartite_cover,
    enumerate_squares,
    is_bipartite,
    is_connected,
    spanning_tree,
    strip_graph,
    strip_walk,
    walks_of_length,
)
from oracles import brute_squares, to_networkx, walk_count

SMALL_BUILTINS = ["K3", "K4", "C4", "C5", "C6", "hard-core", "two-point"]


def test_connectivity_examples():
    assert is_connected(complete_graph(3))
    assert not is_connected(Graph([], [("a", "b"), ("c", "d")]))
    assert is_connected(Graph(["v"], []))


def test_bipartite_certificates():
    k3 = is_bipartite(complete_graph(3))
    assert not k3.bipartite
    assert k3.odd_cycle == ("0", "1", "2", "0")
    assert k3.check(complete_graph(3))

    c4 = is_bipartite(cycle_graph(4))
    assert c4.bipartite
    assert {v for v, col in c4.coloring.items() if col == 0} == {"0", "2"}

    hc = is_bipartite(hard_core())
    assert hc.odd_cycle == ("0", "0")
    assert hc.check(hard_core())


def test_bipartite_needs_connected():
    with pytest.raises(NotConnected):
        is_bipartite(Graph([], [("a", "b"), ("c", "d")]))


@pytest.mark.parametrize("name,target", [("K3", nx.cycle_graph(6)), ("C5", nx.cycle_graph(10))])
def test_cover_isomorphism(name, target):
    cover, proj = bipartite_cover(builtin(name))
    assert nx.is_isomorphic(to_networkx(cover), target)
    assert is_bipartite(cover).bipartite
    assert set(proj.values()) == set(builtin(name).vertices)


def test_hard_core_cover_is_path():
    cover, _ = bipartite_cover(hard_core())
    expected = Graph([], [("1:0", "0:1"), ("0:1", "0:0"), ("0:0", "1:1")])
    assert cover == expected


def test_cover_rejects_bipartite():
    with pytest.raises(AlreadyBipartite):
        bipartite_cover(cycle_graph(4))


def test_cover_projects_walks():
    g = builtin("K3")
    cover, proj = bipartite_cover(g)
    for w in walks_of_length(cover, 4):
        image = [proj[v] for v in w]
        assert all(g.adjacent(a, b) for a, b in zip(image, image[1:]))


def test_strip_graph_k3_two_triangles():
    sg = strip_graph(complete_graph(3), 2)
    assert len(sg.vertices) == 6
    name = {("0", "1"): "ab", ("1", "2"): "bc", ("2", "0"): "ca", ("1", "0"): "ba", ("2", "1"): "cb", ("0", "2"): "ac"}
    edges = {frozenset((name[strip_walk(u)], name[strip_walk(v)])) for u, v in sg.edges}
    tri1 = {frozenset(p) for p in (("ab", "bc"), ("bc", "ca"), ("ca", "ab"))}
    tri2 = {frozenset(p) for p in (("ba", "cb"), ("cb", "ac"), ("ac", "ba"))}
    match = {frozenset(p) for p in (("ab", "ba"), ("bc", "cb"), ("ca", "ac"))}
    assert edges == tri1 | tri2 | match


@pytest.mark.parametrize("name", SMALL_BUILTINS + ["kenkatabami"])
def test_strip_graph_one_is_identity(name):
    g = builtin(name)
    assert strip_graph(g, 1) == Graph(g.vertices, g.edges)


def test_strip_graph_of_loop():
    g = Graph(["a"], [("a", "a")])
    for n in range(1, 5):
        sg = strip_graph(g, n)
        assert len(sg.vertices) == 1 and sg.has_loop(sg.vertices[0])


@pytest.mark.parametrize("name", SMALL_BUILTINS)
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_strip_graph_vertex_count(name, n):
    g = builtin(name)
    assert len(strip_graph(g, n).vertices) == walk_count(g, n - 1)


def test_spanning_trees():
    assert spanning_tree(complete_graph(3), "0").edges == {("0", "1"), ("0", "2")}
    p = path_graph(5)
    assert spanning_tree(p, "0").edges == set(p.edges)
    assert spanning_tree(Graph(["v"], []), "v").edges == frozenset()


@pytest.mark.parametrize("name", SMALL_BUILTINS + ["kenkatabami", "kenkatabami+loop"])
def test_spanning_tree_is_a_tree(name):
    g = builtin(name)
    t = spanning_tree(g)
    h = nx.Graph(list(t.edges))
    h.add_nodes_from(g.vertices)
    assert nx.is_tree(h)


@pytest.mark.parametrize("name", SMALL_BUILTINS + ["kenkatabami"])
def test_squares_match_brute_force(name):
    g = builtin(name)
    assert sorted(w.seq for w in enumerate_squares(g)) == brute_squares(g)


def test_square_counts():
    assert enumerate_squares(complete_graph(3)) == []
    assert len(enumerate_squares(cycle_graph(4))) == 8
    assert enumerate_squares(builtin("two-point")) == []


def test_text_format_round_trip():
    text = "# comment\n0 1\n1 2\n2 2\nvertex 9\n"
    g = Graph.parse(text)
    assert g.vertices == ("0", "1", "2", "9")
    assert g.has_loop("2")
    assert Graph.parse(g.serialize()) == g


def test_text_format_errors():
    with pytest.raises(ParseError):
        Graph.parse("0 1 2\n")
    with pytest.raises(ParseError):
        Graph.parse("a|b c\n")


@settings(max_examples=60, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=1, max_size=12))
def test_random_graph_properties(pairs):
    g = Graph([], [(str(a), str(b)) for a, b in pairs])
    h = to_networkx(g)
    assert is_connected(g) == nx.is_connected(h)
    if is_connected(g):
        cert = is_bipartite(g)
        assert cert.check(g)
        loops = any(u == v for u, v in g.edges)
        assert cert.bipartite == (nx.is_bipartite(h) and not loops)
