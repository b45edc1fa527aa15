from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homshift.builtins import builtin, complete_graph, cycle_graph
from homshift.errors import EndpointMismatch, NotAWalk, ParseError, TraceInvalid, TrivialCycle
from homshift.graphs import Graph, squares_by_base
from homshift.walks import (
    SquareMove,
    SquareTrace,
    Walk,
    circular_shift,
    format_walk,
    is_square,
    iter_square_moves,
    parse_walk,
    reduce,
    reduce_seq,
    square_move_neighbors,
    star,
    trivial,
)
from oracles import brute_reduce

BUILTINS = ["K3", "K4", "C4", "C5", "C6", "hard-core", "two-point", "kenkatabami", "kenkatabami+loop"]


def random_walk(g, length, rng, start=None):
    w = [start or rng.choice(g.vertices)]
    for _ in range(length):
        w.append(rng.choice(g.neighbors(w[-1])))
    return Walk(g, w)


def test_reduce_examples():
    k3 = complete_graph(3)
    assert reduce(Walk(k3, "010")).seq == ("0",)
    assert reduce(Walk(k3, "01210")).seq == ("0",)
    assert reduce(Walk(k3, "012")).seq == ("0", "1", "2")


def test_walk_rejects_non_edges():
    with pytest.raises(NotAWalk):
        Walk(cycle_graph(4), ("0", "2"))


def test_star_examples():
    k3 = complete_graph(3)
    assert star(Walk(k3, "01"), Walk(k3, "10")).seq == ("0",)
    assert star(Walk(k3, "012"), Walk(k3, "20")).seq == ("0", "1", "2", "0")
    p = Walk(k3, "0121")
    assert star(p, trivial(k3, "1")) == reduce(p)
    with pytest.raises(EndpointMismatch):
        star(Walk(k3, "01"), Walk(k3, "20"))


def test_circular_shift():
    k3 = complete_graph(3)
    c = Walk(k3, "0120")
    assert circular_shift(c).seq == ("1", "2", "0", "1")
    x = c
    for _ in range(3):
        x = circular_shift(x)
    assert x == c
    assert circular_shift(Walk(builtin("two-point"), "01010")).seq == tuple("10101")
    with pytest.raises(TrivialCycle):
        circular_shift(trivial(k3, "0"))


def test_is_square():
    assert is_square(Walk(cycle_graph(4), "01230"))
    assert not is_square(Walk(builtin("two-point"), "01010"))
    assert not is_square(Walk(complete_graph(3), "0120"))


def test_neighbors_of_trivial_cycle_in_c4():
    got = {w.seq for w in square_move_neighbors(trivial(cycle_graph(4), "0"), 4)}
    assert ("0", "1", "2", "3", "0") in got and ("0", "3", "2", "1", "0") in got


def test_neighbors_in_k3_are_trivial():
    k3 = complete_graph(3)
    c = Walk(k3, "0120120")
    assert [w.seq for w in square_move_neighbors(c, 12)] == [c.seq]


def test_square_deletes_to_trivial():
    g = cycle_graph(4)
    got = {w.seq for w in square_move_neighbors(Walk(g, "01230"), 4)}
    assert ("0",) in got


def test_parse_and_format():
    g = cycle_graph(4)
    assert parse_walk("0,1,2", g).seq == ("0", "1", "2")
    assert format_walk(("0", "1")) == "0,1"
    with pytest.raises(ParseError):
        parse_walk("0,,1", g)
    with pytest.raises(ParseError):
        parse_walk("0,2", g)


def test_trace_replay_detects_defects():
    g = cycle_graph(4)
    good = SquareTrace("0", ("0", "1", "2", "3", "0"), ("0",), (SquareMove(0, ("0", "1", "2", "3", "0"), "delete"),))
    assert good.replay(g) == [("0", "1", "2", "3", "0"), ("0",)]
    bad_square = SquareTrace("0", ("0",), ("0",), (SquareMove(0, ("0", "1", "0", "1", "0"), "insert"),))
    with pytest.raises(TraceInvalid):
        bad_square.replay(g)
    wrong_end = SquareTrace("0", ("0",), ("0",), (SquareMove(0, ("0", "1", "2", "3", "0"), "insert"),))
    with pytest.raises(TraceInvalid):
        wrong_end.replay(g)


@pytest.mark.parametrize("name", BUILTINS)
def test_reduce_agrees_with_leftmost_deletion(name):
    g = builtin(name)
    rng = random.Random(7)
    for length in range(0, 21):
        for _ in range(5):
            w = random_walk(g, length, rng)
            r = reduce(w)
            assert r.seq == brute_reduce(w.seq)
            assert reduce(r) == r
            assert reduce(w @ w.inverse()).seq == (w.seq[0],)


@pytest.mark.parametrize("name", BUILTINS)
def test_star_is_associative(name):
    g = builtin(name)
    rng = random.Random(11)
    for _ in range(100):
        p = random_walk(g, rng.randrange(8), rng)
        q = random_walk(g, rng.randrange(8), rng, start=p.end)
        r = random_walk(g, rng.randrange(8), rng, start=q.end)
        assert star(star(p, q), r) == star(p, star(q, r))


@pytest.mark.parametrize("name", ["C4", "C6", "K4", "kenkatabami", "hard-core"])
def test_moves_replay_and_keep_parity(name):
    g = builtin(name)
    table = squares_by_base(g)
    rng = random.Random(3)
    for _ in range(40):
        a = rng.choice(g.vertices)
        c = reduce(random_walk(g, 0, rng, start=a))
        for _ in range(rng.randrange(1, 4)):
            moves = list(iter_square_moves(c.seq, table, 12))
            if not moves:
                break
            new, mv = rng.choice(moves)
            trace = SquareTrace(c.seq[0], c.seq, new, (mv,))
            assert trace.replay(g)[-1] == new
            assert (len(new) - len(c.seq)) % 2 == 0
            c = Walk(g, new)


def test_move_search_matches_normal_closure_on_c6():
    # in C6 (no squares) the only cycle square-equivalent to the trivial one is itself
    g = cycle_graph(6)
    seen = {("0",)}
    frontier = [("0",)]
    table = squares_by_base(g)
    while frontier:
        cur = frontier.pop()
        for new, _ in iter_square_moves(cur, table, 12):
            if new not in seen:
                seen.add(new)
                frontier.append(new)
    assert seen == {("0",)}


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=25))
def test_reduce_idempotent_on_c4(steps):
    g = cycle_graph(4)
    seq = ["0"]
    for s in steps:
        nb = g.neighbors(seq[-1])
        seq.append(nb[s % len(nb)])
    r = reduce_seq(seq)
    assert reduce_seq(r) == r
    assert r == brute_reduce(seq)


def test_walks_on_loop_graph():
    g = Graph(["a"], [("a", "a")])
    assert reduce(Walk(g, "aaa")).seq == ("a",)
    assert reduce(Walk(g, "aa")).seq == ("a", "a")
