"""Group presentations attached to a graph, and bounded procedures on them.

The fundamental group of a graph at a basepoint is free on the edges outside a
spanning tree. Quotienting by the squares of the graph gives the square group;
its even-length part is computed through the bipartite cover.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import NotACycle, NotSpanningTree, ParseError, UnknownGenerator
from .graphs import (
    Graph,
    Tree,
    bipartite_cover,
    cover_vertex,
    is_bipartite,
    square_orbit_representatives,
    spanning_tree,
    squares_by_base,
)
from .walks import SquareMove, SquareTrace, Walk, iter_square_moves, reduce_seq
from .smith import diagonal, smith_normal_form
from .words import IDENTITY, Word, format_word, parse_word


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...] = ()

    def __post_init__(self) -> None:
        gens = set(self.generators)
        if len(gens) != len(self.generators):
            raise ValueError("duplicate generator names")
        for r in self.relators:
            missing = r.generators() - gens
            if missing:
                raise UnknownGenerator(f"relator {r} uses undeclared {sorted(missing)}")

    def serialize(self) -> str:
        lines = ["generators: " + " ".join(self.generators)]
        lines += [format_word(r) for r in self.relators]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "GroupPresentation":
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines or not lines[0].startswith("generators:"):
            raise ParseError("presentation must start with a 'generators:' line")
        gens = tuple(lines[0][len("generators:"):].split())
        try:
            return cls(gens, tuple(parse_word(ln) for ln in lines[1:]))
        except UnknownGenerator as exc:
            raise ParseError(str(exc)) from None

    def __str__(self) -> str:
        rels = ", ".join(format_word(r) for r in self.relators)
        return f"< {' '.join(self.generators)} | {rels} >"


# ---------------------------------------------------------------------------
# presentations from graphs


@dataclass(frozen=True)
class CycleWordMap:
    """Sends a walk to the word of the non-tree edges it crosses.

    Tree edges contribute nothing, so the word of a walk ``p`` equals the word
    of the closed walk ``tree(a, p0) p tree(p_end, a)``.
    """

    graph: Graph
    tree: Tree
    letters: Mapping[tuple[str, str], tuple[str, int]] = field(repr=False)

    def word_of_walk(self, seq: Sequence[str]) -> Word:
        out = []
        for u, v in zip(seq, seq[1:]):
            letter = self.letters.get((u, v))
            if letter is not None:
                out.append(letter)
        return Word(out).reduced()

    word_of_cycle = word_of_walk

    def generator_edge(self, name: str) -> tuple[str, str]:
        for (u, v), (g, e) in self.letters.items():
            if g == name and e == 1:
                return (u, v)
        raise UnknownGenerator(name)


def fundamental_presentation(g: Graph, a: str, t: Tree) -> tuple[GroupPresentation, CycleWordMap]:
    """Free presentation on the non-tree edges ``g1, g2, ...`` (canonical edge order).

    A non-tree edge ``{u, v}`` with ``u <= v`` is read positively from ``u`` to
    ``v``. A self-loop generator gets the relator ``e e`` since going round a
    loop twice is a backtrack.
    """
    if t.graph != g or set(t.edges) - set(g.edges):
        raise NotSpanningTree("tree is not a spanning tree of this graph")
    if a not in g:
        raise NotSpanningTree(f"basepoint {a!r} is not a vertex")
    if t.root != a:
        t = t.rerooted(a)
    letters: dict[tuple[str, str], tuple[str, int]] = {}
    gens = []
    loops = []
    for u, v in g.edges:
        if t.contains_edge(u, v):
            continue
        name = f"g{len(gens) + 1}"
        gens.append(name)
        letters[(u, v)] = (name, 1)
        if u == v:
            loops.append(name)
        else:
            letters[(v, u)] = (name, -1)
    rels = tuple(Word([(e, 1), (e, 1)]) for e in loops)
    return GroupPresentation(tuple(gens), rels), CycleWordMap(g, t, letters)


def square_presentation(g: Graph, a: str, t: Tree) -> GroupPresentation:
    """Fundamental presentation plus one relator per square orbit."""
    pres, wm = fundamental_presentation(g, a, t)
    rels = list(pres.relators)
    seen = set(rels)
    for s in square_orbit_representatives(g):
        w = wm.word_of_walk(s).cyclically_reduced()
        if w and w not in seen:
            seen.add(w)
            rels.append(w)
    return GroupPresentation(pres.generators, tuple(rels))


def square_presentation_with_map(g: Graph, a: str, t: Tree | None = None) -> tuple[GroupPresentation, CycleWordMap]:
    t = t or spanning_tree(g, a)
    _, wm = fundamental_presentation(g, a, t)
    return square_presentation(g, a, t), wm


def even_square_presentation(g: Graph, a: str) -> GroupPresentation:
    """Square group of ``g`` if bipartite, else of its bipartite cover at ``(a, 0)``."""
    if is_bipartite(g).bipartite:
        return square_presentation(g, a, spanning_tree(g, a))
    cover, _ = bipartite_cover(g)
    a0 = cover_vertex(a, 0)
    return square_presentation(cover, a0, spanning_tree(cover, a0))


# ---------------------------------------------------------------------------
# abelianization


@dataclass(frozen=True)
class AbelianInvariants:
    free_rank: int
    torsion: tuple[int, ...] = ()

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def __str__(self) -> str:
        parts = [f"Z/{d}" for d in self.torsion] + ["Z"] * self.free_rank
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class AbelianElement:
    """Coordinates in ``Z/d1 + ... + Z/dk + Z^r``."""

    torsion: tuple[int, ...]
    torsion_coords: tuple[int, ...]
    free_coords: tuple[int, ...]

    @property
    def is_zero(self) -> bool:
        return not any(self.torsion_coords) and not any(self.free_coords)

    def __str__(self) -> str:
        parts = [f"{c} mod {d}" for c, d in zip(self.torsion_coords, self.torsion)]
        parts += [str(c) for c in self.free_coords]
        return "(" + ", ".join(parts) + ")"


def relation_matrix(p: GroupPresentation) -> list[list[int]]:
    col = {gname: i for i, gname in enumerate(p.generators)}
    rows = []
    for r in p.relators:
        row = [0] * len(p.generators)
        for gname, e in r:
            row[col[gname]] += e
        rows.append(row)
    return rows


def _snf(p: GroupPresentation):
    d, _, v = smith_normal_form(relation_matrix(p), ncols=len(p.generators))
    diag = diagonal(d) if d else []
    n = len(p.generators)
    diag = diag + [0] * (n - len(diag))
    return diag, v


def abelianize(p: GroupPresentation) -> AbelianInvariants:
    diag, _ = _snf(p)
    return AbelianInvariants(sum(1 for x in diag if x == 0), tuple(x for x in diag if x > 1))


def word_image_abelian(w: Word, p: GroupPresentation) -> AbelianElement:
    """Image of ``w`` in the abelianization, in Smith coordinates.

    With ``U M V = D`` the word's exponent vector ``x`` maps to ``x V``; the
    coordinates with diagonal entry ``d`` are read modulo ``d``.
    """
    col = {gname: i for i, gname in enumerate(p.generators)}
    x = [0] * len(p.generators)
    for gname, e in w:
        if gname not in col:
            raise UnknownGenerator(f"{gname!r} is not a generator")
        x[col[gname]] += e
    diag, v = _snf(p)
    y = [sum(x[k] * v[k][j] for k in range(len(x))) for j in range(len(x))]
    tors, tcoords, free = [], [], []
    for dj, yj in zip(diag, y):
        if dj == 0:
            free.append(yj)
        elif dj > 1:
            tors.append(dj)
            tcoords.append(yj % dj)
    return AbelianElement(tuple(tors), tuple(tcoords), tuple(free))


# ---------------------------------------------------------------------------
# coset enumeration


@dataclass(frozen=True)
class FiniteOrder:
    order: int
    cosets_defined: int


@dataclass(frozen=True)
class Overflow:
    cosets_defined: int
    max_cosets: int


def coset_enumeration(p: GroupPresentation, max_cosets: int) -> FiniteOrder | Overflow:
    """HLT Todd-Coxeter enumeration of the cosets of the trivial subgroup."""
    if max_cosets < 1:
        raise ValueError("max_cosets must be positive")
    ngen = len(p.generators)
    ncol = 2 * ngen
    col = {gname: i for i, gname in enumerate(p.generators)}

    def letter_col(gname: str, e: int) -> int:
        return 2 * col[gname] + (0 if e > 0 else 1)

    def inv(c: int) -> int:
        return c ^ 1

    rels = []
    for r in p.relators:
        r = r.cyclically_reduced()
        if r:
            rels.append([letter_col(gname, e) for gname, e in r])
    rels.sort(key=len)

    table: list[list[int]] = [[-1] * ncol]
    forward: list[int] = [0]  # union-find parent, forward[c] == c for live cosets
    defined = 1

    class _Overflow(Exception):
        pass

    def define(c: int, x: int) -> int:
        nonlocal defined
        if defined >= max_cosets:
            raise _Overflow
        d = len(table)
        table.append([-1] * ncol)
        forward.append(d)
        defined += 1
        table[c][x] = d
        table[d][inv(x)] = c
        return d

    def rep(c: int) -> int:
        root = c
        while forward[root] != root:
            root = forward[root]
        while forward[c] != root:
            forward[c], c = root, forward[c]
        return root

    def merge(k: int, l: int, queue: list[int]) -> None:
        k, l = rep(k), rep(l)
        if k == l:
            return
        if l < k:
            k, l = l, k
        forward[l] = k
        queue.append(l)

    def coincidence(a: int, b: int) -> None:
        queue: list[int] = []
        merge(a, b, queue)
        i = 0
        while i < len(queue):
            gone = queue[i]
            i += 1
            row = table[gone]
            for x in range(ncol):
                d = row[x]
                if d < 0:
                    continue
                row[x] = -1
                if table[d][inv(x)] == gone:
                    table[d][inv(x)] = -1
                mu, nu = rep(gone), rep(d)
                if table[mu][x] >= 0:
                    merge(nu, table[mu][x], queue)
                elif table[nu][inv(x)] >= 0:
                    merge(mu, table[nu][inv(x)], queue)
                else:
                    table[mu][x] = nu
                    table[nu][inv(x)] = mu

    def scan_and_fill(alpha: int, w: list[int]) -> None:
        f, b = alpha, alpha
        i, j = 0, len(w) - 1
        while True:
            while i <= j and table[f][w[i]] >= 0:
                f = table[f][w[i]]
                i += 1
            if i > j:
                if f != alpha:
                    coincidence(f, alpha)
                return
            while j >= i and table[b][inv(w[j])] >= 0:
                b = table[b][inv(w[j])]
                j -= 1
            if j < i:
                coincidence(f, b)
                return
            if i == j:
                table[f][w[i]] = b
                table[b][inv(w[i])] = f
                return
            define(f, w[i])

    try:
        alpha = 0
        while alpha < len(table):
            if forward[alpha] == alpha:
                for w in rels:
                    scan_and_fill(alpha, w)
                    if forward[alpha] != alpha:
                        break
                if forward[alpha] == alpha:
                    for x in range(ncol):
                        if table[alpha][x] < 0:
                            define(alpha, x)
            alpha += 1
    except _Overflow:
        return Overflow(defined, max_cosets)
    live = sum(1 for c in range(len(table)) if forward[c] == c)
    return FiniteOrder(live, defined)


# ---------------------------------------------------------------------------
# bounded rewriting


def _rewrite_rules(relators: Iterable[Word]) -> list[tuple[tuple, tuple]]:
    """Pairs ``(P, Q^-1)`` for every cyclic rotation ``P Q`` of every relator and its inverse."""
    rules = set()
    for r in relators:
        r = r.cyclically_reduced()
        for base in (tuple(r), tuple(r.inverse())):
            for k in range(len(base)):
                rot = base[k:] + base[:k]
                for cut in range(len(rot) + 1):
                    lhs, rhs = rot[:cut], Word(rot[cut:]).inverse()
                    rules.add((lhs, tuple(rhs)))
    return sorted(rules, key=lambda lr: (len(lr[0]) - len(lr[1]), lr))


def rewrite_path(
    word: Word, relators: Sequence[Word], target: Word, max_steps: int, max_len: int | None = None
) -> list[Word] | None:
    """Breadth-first search for a chain of relator substitutions from ``word`` to ``target``.

    Each step replaces an occurrence of ``P`` by ``Q^-1`` where ``P Q`` is a
    cyclic rotation of a relator or its inverse (``P`` may be empty, which
    inserts), followed by free reduction. ``max_steps`` bounds visited words.
    """
    start, goal = word.reduced(), target.reduced()
    if start == goal:
        return [start]
    rules = _rewrite_rules(relators)
    if max_len is None:
        longest = max((len(r) for r in relators), default=0)
        max_len = max(len(start), len(goal)) + longest
    parent: dict[Word, Word | None] = {start: None}
    queue = deque([start])
    while queue and len(parent) < max_steps:
        cur = queue.popleft()
        for lhs, rhs in rules:
            n = len(lhs)
            for i in range(len(cur) - n + 1):
                if tuple(cur[i:i + n]) != lhs:
                    continue
                new = Word(tuple(cur[:i]) + rhs + tuple(cur[i + n:])).reduced()
                if len(new) > max_len or new in parent:
                    continue
                parent[new] = cur
                if new == goal:
                    path = [new]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])  # type: ignore[arg-type]
                    return path[::-1]
                queue.append(new)
    return None


def verify_relation_rewrite(word: Word, relators: Sequence[Word], target: Word, max_steps: int = 10_000) -> bool:
    return rewrite_path(word, relators, target, max_steps) is not None


# ---------------------------------------------------------------------------
# the two-point orbit equations


@dataclass(frozen=True)
class Solvable:
    b_x: Word
    b_y: Word
    h: Word


@dataclass(frozen=True)
class Unsolvable:
    witness: str
    functional: Mapping[str, int]


def two_point_transfer_obstruction(u: Word, v: Word, generators: Sequence[str] | None = None) -> Solvable | Unsolvable:
    """Decide ``u = b_y^-1 h b_x`` and ``v = b_x^-1 h b_y`` in the abelianized free group.

    Written additively the two equations subtract to ``v - u = 2 delta`` with
    ``delta = b_x^-1 b_y``. A solution exists iff every coordinate of ``v - u``
    is even; otherwise a coordinate functional ``eta`` with ``eta(v - u)`` odd
    gives the impossible equation ``2 eta(delta) = eta(v) - eta(u)``.
    Solutions are returned as abelian representatives with ``b_x = 1``.
    """
    gens = list(generators) if generators is not None else sorted(u.generators() | v.generators())
    su, sv = u.exponent_sums(), v.exponent_sums()
    diff = {gname: sv.get(gname, 0) - su.get(gname, 0) for gname in gens}
    odd = [gname for gname in gens if diff[gname] % 2]
    if odd:
        # prefer a functional with a positive odd value, as in 2 eta(...) = 1
        pick = next((gname for gname in odd if diff[gname] > 0), odd[0])
        sign = 1 if diff[pick] > 0 else -1
        eta = {gname: (sign if gname == pick else 0) for gname in gens}
        return Unsolvable(f"2·δ = {sign * diff[pick]}", eta)
    # b_x^-1 b_y = delta with 2 delta = v - u; take b_x = 1
    delta = Word([(gname, 1 if diff[gname] > 0 else -1) for gname in gens for _ in range(abs(diff[gname]) // 2)])
    b_x = IDENTITY
    b_y = delta
    h = (b_y * u).reduced()  # u = b_y^-1 h b_x
    return Solvable(b_x, b_y, h)


# ---------------------------------------------------------------------------
# square decomposability


@dataclass(frozen=True)
class Decomposable:
    trace: SquareTrace


@dataclass(frozen=True)
class Refuted:
    reason: str  # "OddLength" | "AbelianObstruction"
    image: AbelianElement | None = None


@dataclass(frozen=True)
class Unknown:
    report: Mapping[str, object]


DecompositionVerdict = Decomposable | Refuted | Unknown


@dataclass(frozen=True)
class Budget:
    max_len: int = 16
    max_states: int = 100_000


def square_decomposable(g: Graph, c: Walk | Sequence[str], budget: Budget | None = None) -> DecompositionVerdict:
    """Three-valued decomposability verdict for the cycle ``c``.

    Parity and the abelian image of the square group can refute; a
    breadth-first search over square moves (cycles of length at most
    ``budget.max_len``) can certify. Anything else is ``Unknown``.
    """
    budget = budget or Budget()
    seq = tuple(c.seq if isinstance(c, Walk) else c)
    if seq[0] != seq[-1]:
        raise NotACycle("square decomposability is about cycles")
    Walk(g, seq)  # adjacency check
    if (len(seq) - 1) % 2:
        return Refuted("OddLength")
    a = seq[0]
    pres, wm = square_presentation_with_map(g, a)
    image = word_image_abelian(wm.word_of_walk(seq), pres)
    if not image.is_zero:
        return Refuted("AbelianObstruction", image)
    start = reduce_seq(seq)
    goal = (a,)
    if start == goal:
        return Decomposable(SquareTrace(a, seq, goal, ()))
    table = squares_by_base(g)
    parent: dict[tuple[str, ...], tuple[tuple[str, ...], SquareMove] | None] = {start: None}
    queue = deque([start])
    exhausted = True
    while queue:
        cur = queue.popleft()
        for new, move in iter_square_moves(cur, table, budget.max_len):
            if new in parent:
                continue
            parent[new] = (cur, move)
            if new == goal:
                moves = []
                node = new
                while parent[node] is not None:
                    prev, mv = parent[node]  # type: ignore[misc]
                    moves.append(mv)
                    node = prev
                return Decomposable(SquareTrace(a, seq, goal, tuple(reversed(moves))))
            if len(parent) >= budget.max_states:
                exhausted = False
                queue.clear()
                break
            queue.append(new)
    return Unknown(
        {
            "states": len(parent),
            "max_states": budget.max_states,
            "max_len": budget.max_len,
            "search_space_exhausted": exhausted,
        }
    )
