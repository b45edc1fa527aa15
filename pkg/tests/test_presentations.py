from __future__ import annotations

import random
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix, ZZ
from sympy.combinatorics.fp_groups import FpGroup
from sympy.combinatorics.free_groups import free_group
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from homshift.builtins import builtin, complete_graph, cycle_graph, path_graph
from homshift.errors import NotSpanningTree, UnknownGenerator
from homshift.graphs import Graph, spanning_tree, squares_by_base
from homshift.presentations import (
    AbelianInvariants,
    Budget,
    Decomposable,
    FiniteOrder,
    GroupPresentation,
    Overflow,
    Refuted,
    Solvable,
    Unknown,
    Unsolvable,
    abelianize,
    coset_enumeration,
    even_square_presentation,
    fundamental_presentation,
    square_decomposable,
    square_presentation,
    two_point_transfer_obstruction,
    verify_relation_rewrite,
    word_image_abelian,
)
from homshift.smith import diagonal, matmul, smith_normal_form
from homshift.walks import iter_square_moves, reduce_seq
from homshift.words import IDENTITY, Word, parse_word
from oracles import closed_walks


def pres(text: str) -> GroupPresentation:
    return GroupPresentation.parse(text)


def test_fundamental_presentation_examples():
    k3 = complete_graph(3)
    p, wm = fundamental_presentation(k3, "0", spanning_tree(k3, "0"))
    assert p.generators == ("g1",) and p.relators == ()
    assert wm.generator_edge("g1") == ("1", "2")
    assert wm.word_of_cycle(("0", "1", "2", "0")) == Word.gen("g1")

    c4 = cycle_graph(4)
    from homshift.graphs import Tree

    t = Tree.from_edges(c4, "0", [("0", "1"), ("1", "2"), ("2", "3")])
    p, wm = fundamental_presentation(c4, "0", t)
    assert len(p.generators) == 1 and wm.generator_edge("g1") == ("0", "3")

    tree_graph = path_graph(5)
    p, _ = fundamental_presentation(tree_graph, "0", spanning_tree(tree_graph, "0"))
    assert p.generators == ()


def test_tree_of_another_graph_rejected():
    with pytest.raises(NotSpanningTree):
        fundamental_presentation(complete_graph(3), "0", spanning_tree(cycle_graph(4), "0"))


@pytest.mark.parametrize("name", ["K3", "K4", "C4", "C5", "C6", "kenkatabami"])
def test_generator_count_is_cycle_rank(name):
    g = builtin(name)
    p, _ = fundamental_presentation(g, g.vertices[0], spanning_tree(g))
    assert len(p.generators) == len(g.edges) - len(g.vertices) + 1


def test_square_presentation_examples():
    c4 = cycle_graph(4)
    p = square_presentation(c4, "0", spanning_tree(c4, "0"))
    assert len(p.generators) == 1 and len(p.relators) == 1
    assert abelianize(p).is_trivial
    assert coset_enumeration(p, 10) == FiniteOrder(1, 1)

    k3 = complete_graph(3)
    p = square_presentation(k3, "0", spanning_tree(k3, "0"))
    assert p.relators == ()
    assert abelianize(p) == AbelianInvariants(1, ())


def test_k3_with_loop_abelianization():
    # K3 is not bipartite, so the loop lies in squares (0,0,1,2) and (0,0,2,1); they force e = g1 = g1^-1
    g = Graph([], [("0", "1"), ("1", "2"), ("0", "2"), ("0", "0")])
    p = square_presentation(g, "0", spanning_tree(g, "0"))
    assert len(p.generators) == 2
    assert abelianize(p) == _sympy_abelian(p) == AbelianInvariants(0, (2,))
    assert coset_enumeration(p, 100).order == _sympy_order(p) == 2


@pytest.mark.parametrize("n, expected", [(4, AbelianInvariants(0, (2,))), (6, AbelianInvariants(1, (2,)))])
def test_loop_on_bipartite_graph_adds_free_z2(n, expected):
    base = cycle_graph(n)
    g = Graph([], list(base.edges) + [("0", "0")])
    p = square_presentation(g, "0", spanning_tree(g, "0"))
    assert len(p.generators) == 2
    assert abelianize(p) == expected == _sympy_abelian(p)
    loop_relators = [r for r in p.relators if len(set(r)) == 1 and len(r) == 2]
    assert len(loop_relators) == 1


def test_even_square_presentation_examples():
    assert abelianize(even_square_presentation(cycle_graph(4), "0")).is_trivial
    assert abelianize(even_square_presentation(complete_graph(3), "0")) == AbelianInvariants(1, ())
    hc = even_square_presentation(builtin("hard-core"), "0")
    assert hc.generators == ()


def test_abelianize_examples():
    assert abelianize(pres("generators: g")) == AbelianInvariants(1, ())
    assert abelianize(pres("generators: g\ng")).is_trivial
    assert abelianize(pres("generators: a b\na a b⁻ b⁻")) == AbelianInvariants(1, (2,))


def test_word_image_examples():
    p = pres("generators: g\ng")
    assert word_image_abelian(IDENTITY, p).is_zero
    assert word_image_abelian(Word.gen("g"), p).is_zero
    free = pres("generators: g")
    img = word_image_abelian(Word.gen("g", 2), free)
    assert img.free_coords == (2,)
    with pytest.raises(UnknownGenerator):
        word_image_abelian(Word.gen("x"), free)


def test_coset_enumeration_examples():
    assert coset_enumeration(pres("generators: g\ng"), 10).order == 1
    assert coset_enumeration(pres("generators: g\ng g g"), 10).order == 3
    assert isinstance(coset_enumeration(pres("generators: g"), 500), Overflow)


@pytest.mark.parametrize(
    "text",
    [
        "generators: a b\na a a\nb b\na b a b",
        "generators: a b\na a a a a\nb b\na b a b",
        "generators: a b\na a\nb b b\na b a b a b",
        "generators: a b\na a a a\nb b\na b a b",
        "generators: a b\na b a⁻ b⁻\na a a\nb b b b",
    ],
)
def test_coset_enumeration_matches_sympy(text):
    p = pres(text)
    res = coset_enumeration(p, 10_000)
    assert isinstance(res, FiniteOrder)
    assert res.order == _sympy_order(p)


def test_presentation_round_trip():
    p = pres("generators: a b\na b a⁻\nb b")
    assert GroupPresentation.parse(p.serialize()) == p


def test_square_decomposable_examples():
    c4 = cycle_graph(4)
    v = square_decomposable(c4, ("0", "1", "2", "3", "0"))
    assert isinstance(v, Decomposable)
    assert len(v.trace.moves) == 1 and v.trace.moves[0].direction == "delete"
    assert v.trace.replay(c4)[-1] == ("0",)

    k3 = complete_graph(3)
    assert square_decomposable(k3, ("0", "1", "2", "0")) == Refuted("OddLength")
    r = square_decomposable(k3, tuple("0120120"))
    assert r.reason == "AbelianObstruction"
    assert [abs(x) for x in r.image.free_coords] == [2]


def test_square_decomposable_unknown_on_tight_budget():
    g = builtin("kenkatabami")
    c = ("delta1",)
    assert isinstance(square_decomposable(g, c), Decomposable)
    ext = ("eps1", "gamma1", "eps2", "gamma2", "eps3", "gamma3", "eps1")
    v = square_decomposable(g, ext, Budget(max_len=6, max_states=5))
    assert isinstance(v, Unknown)


def test_two_point_obstruction_examples():
    a, b = Word.gen("alpha"), Word.gen("beta")
    r = two_point_transfer_obstruction(a, b)
    assert isinstance(r, Unsolvable) and r.witness == "2·δ = 1"
    assert isinstance(two_point_transfer_obstruction(a, a), Solvable)
    assert isinstance(two_point_transfer_obstruction(a * b, b * a), Solvable)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["alpha", "beta"]), st.sampled_from([1, -1])), max_size=6),
       st.lists(st.tuples(st.sampled_from(["alpha", "beta"]), st.sampled_from([1, -1])), max_size=6))
def test_two_point_solutions_check_out(u, v):
    u, v = Word(u).reduced(), Word(v).reduced()
    r = two_point_transfer_obstruction(u, v, ["alpha", "beta"])
    if isinstance(r, Solvable):
        lhs_u = (r.b_y.inverse() * r.h * r.b_x).exponent_sums()
        lhs_v = (r.b_x.inverse() * r.h * r.b_y).exponent_sums()
        for gname in ("alpha", "beta"):
            assert lhs_u.get(gname, 0) == u.exponent_sums().get(gname, 0)
            assert lhs_v.get(gname, 0) == v.exponent_sums().get(gname, 0)
    else:
        diff = {gn: v.exponent_sums().get(gn, 0) - u.exponent_sums().get(gn, 0) for gn in ("alpha", "beta")}
        assert sum(r.functional[gn] * diff[gn] for gn in diff) % 2 == 1


def test_relation_rewrite_examples():
    rel = parse_word("w alpha w beta⁻")
    assert verify_relation_rewrite(parse_word("w alpha w"), [rel], parse_word("beta"))
    assert verify_relation_rewrite(parse_word("alpha w w⁻"), [rel], parse_word("alpha"))
    assert not verify_relation_rewrite(parse_word("alpha"), [rel], parse_word("beta"), max_steps=200)
    assert verify_relation_rewrite(IDENTITY, [rel], IDENTITY)


@pytest.mark.parametrize("seed", range(25))
def test_smith_form_matches_sympy(seed):
    rng = random.Random(seed)
    m, n = rng.randint(1, 4), rng.randint(1, 4)
    a = [[rng.randint(-6, 6) for _ in range(n)] for _ in range(m)]
    d, u, v = smith_normal_form(a)
    assert matmul(matmul(u, a), v) == d
    ours = [x for x in diagonal(d) if x]
    sd = _sympy_snf_rows(a)
    theirs = [abs(int(sd[i, i])) for i in range(min(sd.shape)) if sd[i, i]]
    assert sorted(ours) == sorted(theirs)
    for x, y in zip(ours, ours[1:]):
        assert y % x == 0


@pytest.mark.parametrize("name", ["K4", "C5", "hard-core", "kenkatabami+loop", "K3"])
def test_square_group_is_twice_even_group(name):
    g = builtin(name)
    a = g.vertices[0]
    tree = spanning_tree(g, a)
    p, wm = fundamental_presentation(g, a, tree)
    full = square_presentation(g, a, tree)
    depth = {v: len(tree.path_from_root(v)) for v in g.vertices}
    parity = {gen: (depth[u] + depth[v] + 1) % 2 for gen in p.generators for u, v in [wm.generator_edge(gen)]}
    # cycle-length parity is a well-defined surjection onto Z/2
    assert any(parity.values())
    for r in full.relators:
        assert sum(parity[gen] * e for gen, e in r) % 2 == 0
    a_full = coset_enumeration(full, 50_000)
    a_even = coset_enumeration(even_square_presentation(g, a), 50_000)
    if isinstance(a_full, FiniteOrder):
        assert isinstance(a_even, FiniteOrder) and a_full.order == 2 * a_even.order
    else:
        assert isinstance(a_even, Overflow)


@pytest.mark.parametrize("name", ["C4", "C6", "kenkatabami"])
def test_bipartite_even_equals_full(name):
    g = builtin(name)
    a = g.vertices[0]
    assert abelianize(square_presentation(g, a, spanning_tree(g, a))) == abelianize(even_square_presentation(g, a))


@pytest.mark.parametrize("name", ["K3", "K4", "C4", "C5", "hard-core"])
def test_abelian_refutation_is_sound(name):
    g = builtin(name)
    table = squares_by_base(g)
    for length in (2, 4, 6, 8):
        for c in closed_walks(g, length)[:150]:
            v = square_decomposable(g, c, Budget(max_len=10, max_states=20_000))
            if isinstance(v, Refuted):
                assert not _bfs_reaches_trivial(c, table, 10, 20_000)
            elif isinstance(v, Decomposable):
                assert v.trace.replay(g)[-1] == (c[0],)


def _bfs_reaches_trivial(c, table, max_len, max_states):
    start = reduce_seq(c)
    goal = (c[0],)
    seen = {start}
    q = deque([start])
    while q and len(seen) < max_states:
        cur = q.popleft()
        if cur == goal:
            return True
        for new, _ in iter_square_moves(cur, table, max_len):
            if new not in seen:
                seen.add(new)
                q.append(new)
    return goal in seen


def _sympy_snf_rows(a):
    return sympy_snf(Matrix(a), domain=ZZ)


def _sympy_abelian(p: GroupPresentation) -> AbelianInvariants:
    n = len(p.generators)
    rows = []
    for r in p.relators:
        row = [0] * n
        for gname, e in r:
            row[p.generators.index(gname)] += e
        rows.append(row)
    if not rows:
        return AbelianInvariants(n, ())
    d = _sympy_snf_rows(rows)
    diag = [abs(int(d[i, i])) for i in range(min(d.shape))]
    diag += [0] * (n - len(diag))
    return AbelianInvariants(sum(1 for x in diag if x == 0), tuple(sorted(x for x in diag if x > 1)))


def _sympy_order(p: GroupPresentation) -> int:
    f, *gens = free_group(",".join(p.generators))
    lookup = dict(zip(p.generators, gens))
    rels = []
    for r in p.relators:
        w = f.identity
        for gname, e in r:
            w = w * lookup[gname] ** e
        rels.append(w)
    return int(FpGroup(f, rels).order())
