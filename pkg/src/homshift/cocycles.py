"""Edge-generated cocycles on homshifts.

A cocycle here is determined by a label ``label(u, v)`` on ordered adjacent
pairs: ``c(e, x) = label(x_0, x_e)`` for a unit vector ``e``. Along a lattice
walk ``w_0 ... w_r`` the value is ``c_{r-1} ... c_1 c_0`` where
``c_i = c(w_{i+1} - w_i, sigma^{w_i} x)``, so later steps multiply on the left.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .errors import (
    DimensionMismatch,
    InadmissibleBoundary,
    NotGibbsEquivalent,
    NotSpanningTree,
    ParseError,
    UnknownGenerator,
)
from .graphs import Graph, Tree, spanning_tree
from .patterns import Cell, Pattern, PeriodicConfig, border_reading, is_locally_admissible
from .presentations import (
    AbelianElement,
    Budget,
    CycleWordMap,
    Decomposable,
    GroupPresentation,
    fundamental_presentation,
    square_decomposable,
    square_presentation,
    word_image_abelian,
)
from .walks import reduce_seq
from .words import IDENTITY, Word, parse_word


@dataclass(frozen=True)
class SquareData:
    """Extra structure carried by square-group cocycles."""

    tree: Tree
    basepoint: str
    word_map: CycleWordMap

    def tree_path(self, v: str) -> tuple[str, ...]:
        return self.tree.path_from_root(v)


@dataclass(frozen=True)
class EdgeCocycle:
    graph: Graph
    presentation: GroupPresentation
    label: Mapping[tuple[str, str], Word] = field(repr=False)
    name: str = ""
    square: SquareData | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        gens = set(self.presentation.generators)
        table = dict(self.label)
        for (u, v), w in list(table.items()):
            if not self.graph.adjacent(u, v):
                raise ValueError(f"label on non-edge ({u},{v})")
            if w.generators() - gens:
                raise UnknownGenerator(f"label {w} uses unknown generators")
            back = table.get((v, u))
            if back is None:
                table[(v, u)] = w.inverse()
            elif u != v and back.reduced() != w.inverse().reduced():
                raise ValueError(f"label({v},{u}) is not the inverse of label({u},{v})")
        for u, v in self.graph.edges:
            for pair in ((u, v), (v, u)):
                table.setdefault(pair, IDENTITY)
        object.__setattr__(self, "label", table)

    @property
    def is_free_target(self) -> bool:
        return not self.presentation.relators

    def word_along(self, vertices: Sequence[str]) -> Word:
        """Product of labels along a vertex walk, later steps on the left."""
        out: list = []
        for u, v in zip(vertices, vertices[1:]):
            out = list(self.label[(u, v)]) + out
        return Word(out).reduced()

    def abelian(self, w: Word) -> AbelianElement:
        return word_image_abelian(w, self.presentation)

    def to_json(self) -> dict:
        labels = [[u, v, str(w)] for (u, v), w in sorted(self.label.items()) if u <= v]
        group = "Z" if self.presentation == Z_PRESENTATION else self.presentation.serialize()
        return {"group": group, "labels": labels}


Z_PRESENTATION = GroupPresentation(("h",))


def height_cocycle_k3(g: Graph | None = None) -> EdgeCocycle:
    """Z-valued (generator ``h``): ``+1`` on ``0 -> 1``, ``-1`` on ``1 -> 0``, ``0`` otherwise."""
    from .builtins import complete_graph

    g = g or complete_graph(3)
    return EdgeCocycle(g, Z_PRESENTATION, {("0", "1"): Word.gen("h")}, name="height")


def square_group_cocycle(g: Graph, t: Tree | None = None, a: str | None = None) -> EdgeCocycle:
    """Square-group cocycle for a spanning tree rooted at ``a``.

    ``label(u, v)`` is the inverse of the word of the reduced cycle
    ``tree(a, u) [u, v] tree(v, a)``.
    """
    if t is None:
        t = spanning_tree(g, a)
    a = a if a is not None else t.root
    if t.root != a:
        t = t.rerooted(a)
    pres = square_presentation(g, a, t)
    _, wm = fundamental_presentation(g, a, t)
    label = {}
    for u in g.vertices:
        for v in g.neighbors(u):
            loop = reduce_seq(t.path_from_root(u) + t.path_to_root(v))
            label[(u, v)] = wm.word_of_walk(loop).inverse()
    return EdgeCocycle(g, pres, label, name="square-group", square=SquareData(t, a, wm))


def load_cocycle(path: str | Path, g: Graph) -> EdgeCocycle:
    """Read the JSON cocycle format ``{"group": ..., "labels": [[u, v, word], ...]}``."""
    try:
        data = json.loads(Path(path).read_text())
        labels = {(str(u), str(v)): parse_word(w) for u, v, w in data["labels"]}
        group = data.get("group", "free")
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad cocycle file {path}: {exc}") from None
    if group == "Z":
        pres = Z_PRESENTATION
    elif group == "free":
        gens = sorted({gname for w in labels.values() for gname, _ in w})
        pres = GroupPresentation(tuple(gens))
    elif isinstance(group, str) and group.lstrip().startswith("generators:"):
        pres = GroupPresentation.parse(group)
    else:
        try:
            pres = GroupPresentation.parse(Path(str(group)).read_text())
        except OSError as exc:
            raise ParseError(f"cannot read presentation {group!r}: {exc}") from None
    try:
        return EdgeCocycle(g, pres, labels, name=Path(path).stem)
    except (ValueError, UnknownGenerator) as exc:
        raise ParseError(str(exc)) from None


# ---------------------------------------------------------------------------
# equality of values


def words_equal(c: EdgeCocycle, w1: Word, w2: Word, budget: Budget | None = None) -> bool | None:
    """Decide ``w1 == w2`` in the cocycle's group: True, False, or None when undecided.

    Free targets compare reduced words. Otherwise distinct abelian images
    refute, and for square-group cocycles a square-move trace of the
    corresponding cycle certifies equality.
    """
    if w1.reduced() == w2.reduced():
        return True
    if c.is_free_target:
        return False
    diff = (w1 * w2.inverse())
    if not c.abelian(diff).is_zero:
        return False
    if c.square is not None:
        cyc = _cycle_of_word(c, diff)
        verdict = square_decomposable(c.graph, cyc, budget or Budget(max_len=24, max_states=50_000))
        if isinstance(verdict, Decomposable):
            return True
    return None


def _cycle_of_word(c: EdgeCocycle, w: Word) -> tuple[str, ...]:
    """Reduced cycle at the basepoint whose word is ``w``."""
    sq = c.square
    assert sq is not None
    seq: list[str] = [sq.basepoint]
    for gname, e in w:
        u, v = sq.word_map.generator_edge(gname)
        if e < 0:
            u, v = v, u
        seq = list(reduce_seq(seq + list(_tree_walk(sq, seq[-1], u)[1:]) + [v]))
    return reduce_seq(seq + list(_tree_walk(sq, seq[-1], sq.basepoint)[1:]))


def _tree_walk(sq: SquareData, u: str, v: str) -> tuple[str, ...]:
    return reduce_seq(sq.tree.path_to_root(u) + sq.tree.path_from_root(v)[1:])


# ---------------------------------------------------------------------------
# validation and evaluation


@dataclass(frozen=True)
class Valid:
    squares_checked: int


@dataclass(frozen=True)
class CounterexampleSquare:
    corners: tuple[str, str, str, str]  # values at 0, e1, e2, e1 + e2
    lhs: Word
    rhs: Word


def validate_cocycle(
    c: EdgeCocycle, mode: str | Callable[[Word], bool | None] = "abelian"
) -> Valid | CounterexampleSquare:
    """Check ``label(v,z) label(u,v) == label(w,z) label(u,w)`` on every admissible unit square.

    ``mode`` is ``"abelian"`` (compare abelian images; sound for refutation
    only), ``"free"`` (compare reduced words), ``"exact"`` (``words_equal``) or
    a callable deciding whether a word is trivial.
    """
    g = c.graph
    n = 0
    for u in g.vertices:
        for v, w in product(g.neighbors(u), repeat=2):
            for z in g.neighbors(v):
                if not g.adjacent(w, z):
                    continue
                n += 1
                lhs = c.label[(v, z)] * c.label[(u, v)]
                rhs = c.label[(w, z)] * c.label[(u, w)]
                if mode == "abelian":
                    ok = c.abelian(lhs * rhs.inverse()).is_zero
                elif mode == "free":
                    ok = lhs == rhs
                elif mode == "exact":
                    ok = words_equal(c, lhs, rhs) is True
                else:
                    ok = bool(mode(lhs * rhs.inverse()))  # type: ignore[operator]
                if not ok:
                    return CounterexampleSquare((u, v, w, z), lhs, rhs)
    return Valid(n)


@dataclass(frozen=True)
class CocycleValue:
    word: Word
    vertices: tuple[str, ...]  # the configuration read along the evaluation walk
    reduced_walk: tuple[str, ...] | None = None  # square-group cocycles: a walk whose word is ``word``


def staircase(n: Cell) -> list[Cell]:
    """Lattice walk from 0 to ``n`` moving along axis 1 first, then axis 2, and so on."""
    pos = [0] * len(n)
    out = [tuple(pos)]
    for i, k in enumerate(n):
        step = 1 if k > 0 else -1
        for _ in range(abs(k)):
            pos[i] += step
            out.append(tuple(pos))
    return out


def value_along(c: EdgeCocycle, x: PeriodicConfig, lattice_walk: Sequence[Cell]) -> CocycleValue:
    if x.graph != c.graph:
        raise ValueError("cocycle and configuration live on different graphs")
    for a, b in zip(lattice_walk, lattice_walk[1:]):
        if sum(abs(p - q) for p, q in zip(a, b)) != 1:
            raise ValueError("lattice walk must use unit steps")
    verts = tuple(x(p) for p in lattice_walk)
    word = c.word_along(verts)
    rw = None
    if c.square is not None:
        t = c.square.tree
        # the value is the inverse of tree(a, x_0) x_p tree(x_n, a)
        rw = reduce_seq(t.path_from_root(verts[-1]) + verts[::-1][1:] + t.path_to_root(verts[0])[1:])
    return CocycleValue(word, verts, rw)


def evaluate(c: EdgeCocycle, x: PeriodicConfig, n: Cell) -> CocycleValue:
    n = tuple(n)
    if len(n) != x.dim:
        raise DimensionMismatch(f"vector of dimension {len(n)} on a {x.dim}-dimensional configuration")
    return value_along(c, x, staircase(n))


def random_lattice_walk(n: Cell, rng: random.Random, detours: int = 2) -> list[Cell]:
    """Random unit-step walk from 0 to ``n``: a shuffled staircase with a few back-and-forth detours."""
    steps: list[Cell] = []
    d = len(n)
    for i, k in enumerate(n):
        steps += [tuple((1 if k > 0 else -1) if j == i else 0 for j in range(d))] * abs(k)
    for _ in range(rng.randint(0, detours)):
        i = rng.randrange(d)
        e = tuple(1 if j == i else 0 for j in range(d))
        steps += [e, tuple(-x for x in e)]
    rng.shuffle(steps)
    pos = (0,) * d
    out = [pos]
    for s in steps:
        pos = tuple(a + b for a, b in zip(pos, s))
        out.append(pos)
    return out


def path_independence_check(
    c: EdgeCocycle,
    x: PeriodicConfig,
    n: Cell,
    trials: int,
    seed: int = 0,
    budget: Budget | None = None,
) -> bool:
    """Evaluate along ``trials`` random lattice walks from 0 to ``n``; True iff all values provably agree."""
    rng = random.Random(seed)
    ref = evaluate(c, x, n).word
    for _ in range(trials):
        w = value_along(c, x, random_lattice_walk(tuple(n), rng)).word
        if words_equal(c, w, ref, budget) is not True:
            return False
    return True


# ---------------------------------------------------------------------------
# boundary obstruction


@dataclass(frozen=True)
class Obstructed:
    """The two corner-to-corner values differ.

    ``pair`` is ``(identity, loop)`` where ``loop`` is the value around the
    whole boundary read clockwise, i.e. ``right_up^-1 up_right``.
    """

    up_right: Word
    right_up: Word
    loop: Word
    exact_by: str

    @property
    def pair(self) -> tuple[Word, Word]:
        return (IDENTITY, self.loop)


@dataclass(frozen=True)
class Passes:
    up_right: Word
    right_up: Word
    certified_equal: bool


def boundary_obstruction(c: EdgeCocycle, p: Pattern) -> Obstructed | Passes:
    """Compare the up-then-right and right-then-up boundary values between opposite corners."""
    ok, viol = is_locally_admissible(p)
    if not ok:
        raise InadmissibleBoundary(f"boundary violates adjacency at {viol.cell}-{viol.other}")
    br = border_reading(p)
    up_right = c.word_along(br.left + br.up[1:])
    right_up = c.word_along(br.down[::-1] + br.right[::-1][1:])
    loop = right_up.inverse() * up_right
    if up_right == right_up:
        return Passes(up_right, right_up, True)
    if c.is_free_target:
        return Obstructed(up_right, right_up, loop, "free reduction")
    if not c.abelian(loop).is_zero:
        return Obstructed(up_right, right_up, loop, "abelian image")
    return Passes(up_right, right_up, words_equal(c, up_right, right_up) is True)


def loop_abelian_value(c: EdgeCocycle, o: Obstructed | Passes) -> AbelianElement:
    return c.abelian(o.right_up.inverse() * o.up_right)


# ---------------------------------------------------------------------------
# transfer functions between trees


@dataclass(frozen=True)
class TransferTable:
    """``b(x) = tree(a, x_0) tree'(x_0, a)`` as reduced cycles and words of the first tree."""

    walks: Mapping[str, tuple[str, ...]]
    words: Mapping[str, Word]


def transfer_between_trees(g: Graph, a: str, t: Tree, t2: Tree) -> TransferTable:
    for tr in (t, t2):
        if tr.graph != g:
            raise NotSpanningTree("tree belongs to another graph")
    t, t2 = t.rerooted(a), t2.rerooted(a)
    _, wm = fundamental_presentation(g, a, t)
    walks = {v: reduce_seq(t.path_from_root(v) + t2.path_to_root(v)[1:]) for v in g.vertices}
    return TransferTable(walks, {v: wm.word_of_walk(w) for v, w in walks.items()})


def check_transfer_identity(
    g: Graph, a: str, t: Tree, t2: Tree, x: PeriodicConfig, n: Cell
) -> bool:
    """Check ``c'(n, x) = b(sigma^n x)^-1 c(n, x) b(x)`` exactly, as reduced closed walks at ``a``."""
    c1 = square_group_cocycle(g, t, a)
    c2 = square_group_cocycle(g, t2, a)
    b = transfer_between_trees(g, a, t, t2)
    v1 = evaluate(c1, x, n)
    v2 = evaluate(c2, x, n)
    bx = b.walks[x((0,) * x.dim)]
    bn = b.walks[x(tuple(n))]
    # inverse(bn) . v1 . bx  (as walks: read bx first, then v1, then bn^-1)
    rhs = reduce_seq(bn[::-1] + v1.reduced_walk[1:] + bx[1:])
    return rhs == v2.reduced_walk


# ---------------------------------------------------------------------------
# c_f^+ and c_f^-


def m_value(c: EdgeCocycle, x: PeriodicConfig, x2: PeriodicConfig) -> int:
    """Least positive ``m`` with ``f(sigma^{k e1} x) == f(sigma^{k e1} x')`` whenever ``|k| > m``."""
    if not x.same_base(x2):
        raise NotGibbsEquivalent("configurations do not share a periodic base")
    d = x.dim
    ks = set()
    for cell in x.differing_cells(x2):
        if all(v == 0 for v in cell[1:]):
            ks.update((cell[0], cell[0] - 1))
    bad = [k for k in ks if f_value(c, x, k) != f_value(c, x2, k)]
    return max([1] + [abs(k) for k in bad])


def f_value(c: EdgeCocycle, x: PeriodicConfig, k: int) -> Word:
    """``f(sigma^{k e1} x) = c(e1, sigma^{k e1} x)``."""
    d = x.dim
    here = (k,) + (0,) * (d - 1)
    there = (k + 1,) + (0,) * (d - 1)
    return c.label[(x(here), x(there))]


def c_f_pm(c: EdgeCocycle, x: PeriodicConfig, x2: PeriodicConfig, extra: int = 0) -> tuple[Word, Word]:
    """``(c_f^+(x, x'), c_f^-(x, x'))``; ``extra`` enlarges ``m`` (the result must not change)."""
    m = m_value(c, x, x2) + extra

    def plus(z: PeriodicConfig) -> Word:
        out = IDENTITY
        for k in range(0, m + 1):
            out = out * f_value(c, z, k).inverse()
        return out

    def minus(z: PeriodicConfig) -> Word:
        out = IDENTITY
        for k in range(1, m + 1):
            out = out * f_value(c, z, -k)
        return out

    return plus(x) * plus(x2).inverse(), minus(x) * minus(x2).inverse()
