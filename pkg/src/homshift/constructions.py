"""Explicit two-dimensional pattern constructions.

Rectangles certifying square decomposability, the row interpolation behind them,
corner and annulus patterns, the box-extension test and its counterexample
witness, strip gluing, and the lifting of certificates to strip graphs.

Every construction is checked after the fact: local admissibility of the
assembled pattern and the prescribed border words are verified before anything
is returned, so a bug in the assembly surfaces as an exception rather than a
wrong certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import (
    Backtracking,
    BasepointMismatch,
    BudgetExhausted,
    DiagonalInadmissible,
    DisagreeOnCore,
    HomshiftError,
    HypothesisFails,
    InadmissibleInput,
    LengthMismatch,
    LengthOrder,
    NotACycle,
    NotGibbsEquivalent,
    NotOneMove,
    OddLengthCycle,
    PrerequisiteMissing,
    RaggedWalk,
    TraceInvalid,
)
from .graphs import Graph, squares_by_base, strip_graph, strip_vertex, strip_walk
from .patterns import (
    Cell,
    Completion,
    Pattern,
    PeriodicConfig,
    annulus_cells,
    border_reading,
    boundary_cells,
    box,
    count_fills,
    fill,
    is_locally_admissible,
    ring,
    square_box,
)
from .presentations import Budget, Decomposable, Refuted, Unknown, square_decomposable
from .walks import Seq, SquareTrace, Walk, reduce_seq, splice_seq

LOWER_RIGHT = "⌟"
UPPER_RIGHT = "⌝"
_KIND_ALIASES = {"⌟": LOWER_RIGHT, "lr": LOWER_RIGHT, "lower-right": LOWER_RIGHT,
                 "⌝": UPPER_RIGHT, "ur": UPPER_RIGHT, "upper-right": UPPER_RIGHT}


class ConstructionFailed(HomshiftError):
    """An assembled pattern failed its own post-checks (a bug, never an input problem)."""


def _seq(w: Walk | Sequence[str]) -> Seq:
    return tuple(w.seq if isinstance(w, Walk) else w)


def _backtrack_power(t0: str, t1: str, k: int) -> Seq:
    """``t^k`` for ``t = t0 t1 t0``: ``2k + 1`` alternating vertices."""
    return tuple(t0 if i % 2 == 0 else t1 for i in range(2 * k + 1))


def _inv(w: Sequence[str]) -> Seq:
    return tuple(reversed(w))


def _check_backtrack(g: Graph, t: Walk | Sequence[str]) -> tuple[str, str]:
    t = _seq(t)
    if len(t) != 3 or t[0] != t[2] or not g.adjacent(t[0], t[1]):
        raise InadmissibleInput(f"{t!r} is not a backtrack t0 t1 t0 of the graph")
    return t[0], t[1]


def _rows_pattern(g: Graph, rows: Sequence[Sequence[str]], origin: Cell = (0, 0)) -> Pattern:
    ox, oy = origin
    return Pattern(g, {(ox + x, oy + y): v for y, row in enumerate(rows) for x, v in enumerate(row)}, 2)


def _checklist(items: Iterable[tuple[str, bool]]) -> dict[str, bool]:
    return {name: bool(ok) for name, ok in items}


def _require(checks: Mapping[str, bool], what: str) -> None:
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        raise ConstructionFailed(f"{what}: failed checks {failed}")


# ---------------------------------------------------------------------------
# row engine


class _RowBuilder:
    """Stack of equal-length rows, each a pointwise neighbour of the previous one.

    The current row is ``padding | content | padding`` where both paddings
    alternate between two adjacent vertices and ``content`` is
    ``row[lo..hi]``. Every operation appends an even number of rows, so the
    first and last cells of the rows alternate like the paddings do.
    """

    def __init__(self, adjacent: Callable[[str, str], bool], row: Sequence[str], lo: int, hi: int):
        self.adjacent = adjacent
        self.rows: list[list[str]] = [list(row)]
        self.lo = lo
        self.hi = hi

    @property
    def row(self) -> list[str]:
        return self.rows[-1]

    @property
    def content(self) -> Seq:
        return tuple(self.row[self.lo:self.hi + 1])

    def flip(self, p: int, z: str) -> None:
        """Replace ``row[p]`` by a common neighbour ``z`` of ``row[p-1]`` and ``row[p+1]``.

        Realized by two rows: the row shifted left by one with ``z`` already in
        place, then the original row with ``z``.
        """
        w = self.row
        if z == w[p]:
            return
        last = len(w) - 1
        if not (self.lo < p < self.hi) or self.lo < 1 or last - self.hi < 1:
            raise ConstructionFailed(f"flip at {p} outside the content [{self.lo}, {self.hi}]")
        if not (self.adjacent(z, w[p - 1]) and self.adjacent(z, w[p + 1])):
            raise ConstructionFailed(f"{z!r} is not a common neighbour at position {p}")
        shifted = w[1:] + [w[last - 1]]
        shifted[p - 1] = z
        new = list(w)
        new[p] = z
        self.rows.append(shifted)
        self.rows.append(new)

    def shift_left(self) -> None:
        """Move the content two cells left (one backtrack from the left padding to the right)."""
        w = self.row
        last = len(w) - 1
        if self.lo < 2 or last - self.hi < 1:
            raise ConstructionFailed("not enough left padding to shift")
        self.rows.append(w[1:] + [w[last - 1]])
        self.rows.append(w[2:] + [w[last - 1], w[last]])
        self.lo -= 2
        self.hi -= 2

    def shift_right(self) -> None:
        w = self.row
        last = len(w) - 1
        if last - self.hi < 2 or self.lo < 1:
            raise ConstructionFailed("not enough right padding to shift")
        self.rows.append([w[1]] + w[:last])
        self.rows.append([w[0], w[1]] + w[:last - 1])
        self.lo += 2
        self.hi += 2

    def reduce_content(self) -> None:
        """Free-reduce the content, carrying each backtrack into the left padding."""
        while True:
            w = self.row
            i = next((p for p in range(self.lo + 1, self.hi) if w[p - 1] == w[p + 1]), None)
            if i is None:
                return
            while i > self.lo + 1:
                self.flip(i, self.row[i - 2])
                i -= 1
            self.flip(i, self.row[self.lo - 1])
            self.lo += 2

    def apply_move(self, g: Graph, target: Seq) -> None:
        """Turn the (reduced) content into ``target``, one square move away and not longer."""
        c = self.content
        if c == target:
            return
        plan = _flip_plan(g, c, target)
        for p, z in plan:
            self.flip(self.lo + p, z)
        self.reduce_content()
        if self.content != target:
            raise ConstructionFailed(f"interpolation ended at {self.content} instead of {target}")


def _cancellations(c: Seq, i: int, s: Seq) -> tuple[int, int]:
    """How far the square ``s`` spliced at ``c[i]`` cancels into ``c`` on each side."""
    left = 0
    while left < 4 and i - left - 1 >= 0 and s[left + 1] == c[i - left - 1]:
        left += 1
    right = 0
    while right < 4 and i + right + 1 < len(c) and s[3 - right] == c[i + right + 1]:
        right += 1
    return left, right


def _flip_plan(g: Graph, c: Seq, target: Seq) -> list[tuple[int, str]]:
    """Corner flips (content position, new vertex) turning ``c`` into a word reducing to ``target``.

    The square either replaces a 2-edge side by the opposite one (one flip),
    a 3-edge stretch by the remaining edge (one flip leaving a backtrack), or
    a whole square by its basepoint (one flip leaving two backtracks).
    """
    table = squares_by_base(g)
    longer = False
    for i in range(len(c)):
        for s in table.get(c[i], ()):
            if splice_seq(c, i, s) != target:
                continue
            left, right = _cancellations(c, i, s)
            j = left + right
            if j >= 4:
                left = min(left, 4)
                p0 = i - left
                return [(p0 + 2, c[p0])]
            if j == 3:
                p0 = i - left
                return [(p0 + 1, c[p0 + 3])]
            if j == 2:
                p0 = i - left
                return [(p0 + 1, s[left + 1])]
            longer = True
    if longer:
        raise LengthOrder("the target cycle is longer; interpolate in the other direction")
    raise NotOneMove("the two cycles do not differ by a single square move")


# ---------------------------------------------------------------------------
# interpolation rows


def interpolation_rows(c: Walk, c2: Walk | Sequence[str], t: Walk | Sequence[str], k: int) -> list[Walk]:
    """Rows from ``t^k c t^k`` to ``t^(k+d) c2 t^k`` with ``d = (l(c) - l(c2)) / 2``.

    Consecutive rows are pointwise neighbours, all rows have the same length,
    and the first and last vertices alternate ``t0, t1, t0, ...``.
    """
    g = c.graph
    cs, c2s = reduce_seq(c.seq), reduce_seq(_seq(c2))
    if cs != tuple(c.seq) or c2s != _seq(c2):
        raise Backtracking("interpolation works between reduced cycles")
    t0, t1 = _check_backtrack(g, t)
    if cs[0] != t0 or cs[-1] != t0 or c2s[0] != t0 or c2s[-1] != t0:
        raise BasepointMismatch("both cycles must start and end at t0")
    if k < 1:
        raise ValueError("interpolation needs at least one backtrack of padding (k >= 1)")
    if len(c2s) > len(cs):
        raise LengthOrder("l(c) must be at least l(c')")
    pad = _backtrack_power(t0, t1, k)
    row = pad[:-1] + cs + pad[1:]
    rb = _RowBuilder(g.adjacent, row, 2 * k, 2 * k + len(cs) - 1)
    if cs == c2s:
        rb.rows.append(rb.row[1:] + [rb.row[-2]])
        rb.rows.append(list(row))
    else:
        rb.apply_move(g, c2s)
    rows = [tuple(r) for r in rb.rows]
    ok, viol = is_locally_admissible(_rows_pattern(g, rows))
    if not ok:
        raise ConstructionFailed(f"interpolation rows not admissible at {viol}")
    d = (len(cs) - len(c2s)) // 2
    expected_end = _backtrack_power(t0, t1, k + d)[:-1] + c2s + pad[1:]
    if rows[-1] != expected_end:
        raise ConstructionFailed("interpolation did not end at the expected row")
    return [Walk(g, r, check=False) for r in rows]


# ---------------------------------------------------------------------------
# rectangles


@dataclass(frozen=True)
class RectangleCertificate:
    """Pattern on ``[0, nu] x [0, 2n]`` whose border is ``t^n``, ``t^(nu/2)``, ``t^-n`` and
    ``t^-k gamma^-1 t^-k`` (left, up, right, down, read clockwise)."""

    pattern: Pattern
    gamma: Seq
    t: Seq
    k: int
    n: int
    evidence: Mapping[str, object] = field(default_factory=dict, compare=False)

    @property
    def nu(self) -> int:
        return len(self.gamma) - 1 + 4 * self.k

    def row(self, y: int) -> Seq:
        return tuple(self.pattern[(x, y)] for x in range(self.nu + 1))

    def checks(self) -> dict[str, bool]:
        p, nu, n = self.pattern, self.nu, self.n
        t0, t1 = self.t[0], self.t[1]
        full = set(box((0, 0), (nu, 2 * n)))
        support_ok = p.support == full
        admissible = support_ok and is_locally_admissible(p)[0]
        if support_ok:
            br = border_reading(p.restrict(boundary_cells(0, 0, nu, 2 * n)))
            pad = _backtrack_power(t0, t1, self.k)
            bottom = pad[:-1] + self.gamma + pad[1:]
            sides = [
                ("left reads t^n", br.left == _backtrack_power(t0, t1, n)),
                ("up reads t^(nu/2)", br.up == _backtrack_power(t0, t1, nu // 2)),
                ("right reads t^-n", br.right == _inv(_backtrack_power(t0, t1, n))),
                ("down reads t^-k gamma^-1 t^-k", br.down == _inv(bottom)),
            ]
        else:
            sides = [("border readable", False)]
        return _checklist(
            [("support is the full rectangle", support_ok), ("locally admissible", admissible), *sides]
        )

    def is_valid(self) -> bool:
        return all(self.checks().values())

    def to_json(self) -> dict:
        return {
            "gamma": list(self.gamma),
            "t": list(self.t),
            "k": self.k,
            "n": self.n,
            "nu": self.nu,
            "pattern": self.pattern.to_json(),
            "checks": self.checks(),
            "evidence": dict(self.evidence),
        }


@dataclass(frozen=True)
class NoRectangle:
    k: int
    n: int
    nodes: int


def _certificate(g: Graph, rows: Sequence[Sequence[str]], gamma: Seq, t0: str, t1: str, k: int,
                 evidence: Mapping[str, object] | None = None) -> RectangleCertificate:
    if len(rows) % 2 == 0:
        raise ConstructionFailed("a rectangle needs an odd number of rows")
    cert = RectangleCertificate(_rows_pattern(g, rows), gamma, (t0, t1, t0), k, (len(rows) - 1) // 2,
                                dict(evidence or {}))
    _require(cert.checks(), "rectangle")
    return cert


def rectangle_from_trace(
    g: Graph, trace: SquareTrace, t: Walk | Sequence[str], k: int | None = None
) -> RectangleCertificate:
    """Stack interpolation blocks, one per square move of ``trace``, into a certificate.

    ``k`` is a lower bound for the padding; it is raised as needed so every
    intermediate cycle fits with room for one backtrack on each side.
    """
    states = trace.replay(g)
    a = trace.basepoint
    if states[-1] != (a,):
        raise TraceInvalid("the trace does not end at the trivial cycle")
    t0, t1 = _check_backtrack(g, t)
    if t0 != a:
        raise BasepointMismatch("t must start at the trace's basepoint")
    gamma = tuple(trace.start)
    length = len(gamma) - 1
    if length % 2:
        raise OddLengthCycle("only even cycles bound rectangles")
    needs_work = gamma != (a,) or len(states) > 1
    longest = max(len(s) - 1 for s in states)
    k_min = max(1, math.ceil((longest + 4 - length) / 4)) if needs_work else 0
    k = max(k_min, k or 0)
    pad = _backtrack_power(t0, t1, k)
    row = pad[:-1] + gamma + pad[1:]
    rb = _RowBuilder(g.adjacent, row, 2 * k, 2 * k + length)
    rb.reduce_content()
    for cur, nxt in zip(states, states[1:]):
        if rb.content != cur:
            raise ConstructionFailed("row content drifted from the trace")
        if len(nxt) <= len(cur):
            rb.apply_move(g, nxt)
            continue
        grow = (len(nxt) - len(cur)) // 2
        while rb.lo // 2 < grow + 1:
            rb.shift_right()
        # build the shrinking block nxt -> cur and run it backwards
        start = list(rb.row[:rb.lo - 2 * grow]) + list(nxt) + list(rb.row[rb.hi + 1:])
        back = _RowBuilder(g.adjacent, start, rb.lo - 2 * grow, rb.lo - 2 * grow + len(nxt) - 1)
        back.apply_move(g, cur)
        if back.row != rb.row:
            raise ConstructionFailed("reversed block does not meet the current row")
        rb.rows.extend(list(r) for r in reversed(back.rows[:-1]))
        rb.lo -= 2 * grow
        rb.hi = rb.lo + len(nxt) - 1
    if rb.content != (a,):
        raise ConstructionFailed("rows did not reach the trivial cycle")
    return _certificate(g, rb.rows, gamma, t0, t1, k, {"moves": len(trace.moves)})


def _rectangle_border(g: Graph, gamma: Seq, t0: str, t1: str, k: int, n: int) -> Pattern | None:
    """The four prescribed sides, or None when they disagree on a shared cell."""
    nu = len(gamma) - 1 + 4 * k
    pad = _backtrack_power(t0, t1, k)
    bottom = pad[:-1] + gamma + pad[1:]
    side = _backtrack_power(t0, t1, n)
    writes = [((x, 0), v) for x, v in enumerate(bottom)]
    writes += [((x, 2 * n), v) for x, v in enumerate(_backtrack_power(t0, t1, nu // 2))]
    writes += [((0, y), v) for y, v in enumerate(side)] + [((nu, y), v) for y, v in enumerate(side)]
    cells: dict[Cell, str] = {}
    for c, v in writes:
        if cells.setdefault(c, v) != v:
            return None
    return Pattern(g, cells, 2)


def rectangle_search(
    g: Graph, gamma: Walk | Sequence[str], t: Walk | Sequence[str], k: int, n: int,
    node_budget: int | None = None,
) -> RectangleCertificate | NoRectangle:
    """Pin the four prescribed sides and ask the fill oracle for the interior."""
    gamma = _seq(gamma)
    Walk(g, gamma)
    if gamma[0] != gamma[-1]:
        raise NotACycle("gamma must be a cycle")
    if (len(gamma) - 1) % 2:
        raise OddLengthCycle("only even cycles bound rectangles")
    t0, t1 = _check_backtrack(g, t)
    if t0 != gamma[0]:
        raise BasepointMismatch("t must start at gamma's basepoint")
    if k < 0 or n < 0:
        raise ValueError("k and n must be nonnegative")
    nu = len(gamma) - 1 + 4 * k
    border = _rectangle_border(g, gamma, t0, t1, k, n)
    if border is None or not is_locally_admissible(border)[0]:
        return NoRectangle(k, n, 0)
    res = fill(border, box((0, 0), (nu, 2 * n)), node_budget=node_budget)
    if not isinstance(res, Completion):
        return NoRectangle(k, n, res.nodes)
    rows = [[res.pattern[(x, y)] for x in range(nu + 1)] for y in range(2 * n + 1)]
    return _certificate(g, rows, gamma, t0, t1, k, {"method": "fill"})


# ---------------------------------------------------------------------------
# dual walks and strip graphs


def dual_walk(w: Sequence[str | Sequence[str]]) -> tuple[str, ...]:
    """Transpose of the vertex matrix of a walk on a strip graph.

    ``w`` is a list of strip vertices (names or tuples of width ``n + 1``); the
    result lists ``n + 1`` strip vertices of width ``len(w)``.
    """
    rows = [strip_walk(v) if isinstance(v, str) else tuple(v) for v in w]
    if not rows:
        raise RaggedWalk("empty walk")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise RaggedWalk("strip vertices of different widths")
    return tuple(strip_vertex(tuple(r[j] for r in rows)) for j in range(width))


def _omega(c: Sequence[str]) -> list[str]:
    """Circular shift of a closed walk: ``c_1 ... c_l c_1``."""
    c = list(c)
    if len(c) == 1:
        return c
    return c[1:] + c[1:2]


def lift_certificate_to_strip(
    g: Graph, gamma: Sequence[str], n: int, budget: Budget | None = None
) -> RectangleCertificate | Unknown:
    """Rectangle certificate for an even cycle of ``strip_graph(g, n)`` built from one on ``g``.

    The layers of ``gamma`` are sheared one row at a time until every layer
    carries the top layer's cycle (or its circular shift), then the rectangle of
    the top layer is replayed on all layers at once, alternating with its
    circular shift. Two diagonal side blocks and a final contraction of the top
    row turn the result into a certificate with exact backtrack borders.
    """
    sg = strip_graph(g, n)
    gamma = tuple(gamma)
    Walk(sg, gamma)
    if gamma[0] != gamma[-1]:
        raise NotACycle("gamma must be a cycle")
    length = len(gamma) - 1
    if length % 2:
        raise OddLengthCycle("only even cycles bound rectangles")
    s0 = gamma[0]
    s1 = gamma[1] if length else sg.neighbors(s0)[0]
    comps0, comps1 = strip_walk(s0), strip_walk(s1)
    layers = [strip_walk(v) for v in dual_walk(gamma)]
    top = layers[n - 1]
    verdict = square_decomposable(g, top, budget)
    if isinstance(verdict, Refuted):
        raise PrerequisiteMissing(f"the top layer is not square-decomposable in the base graph ({verdict.reason})")
    if isinstance(verdict, Unknown):
        return verdict
    assert isinstance(verdict, Decomposable)
    trace = SquareTrace(top[0], top, (top[0],), verdict.trace.moves)
    t_top = (comps0[n - 1], comps1[n - 1], comps0[n - 1])
    inner = rectangle_from_trace(g, trace, t_top)
    if n == 1:
        pat = Pattern(sg, inner.pattern.cells, 2)
        return _certificate(sg, [[pat[(x, y)] for x in range(inner.nu + 1)] for y in range(2 * inner.n + 1)],
                            gamma, s0, s1, inner.k, {"k_plus": inner.k, "n_star": inner.n})
    kp = inner.k
    nu = length + 4 * kp
    c_prime = []
    for i in range(n):
        pad = _backtrack_power(comps0[i], comps1[i], kp)
        c_prime.append(list(pad[:-1] + layers[i] + pad[1:]))
    c = c_prime[n - 1]
    if tuple(c) != inner.row(0):
        raise ConstructionFailed("top layer does not match the inner rectangle's bottom row")
    d = _omega(c)

    def assemble(stack: Sequence[Sequence[str]]) -> list[str]:
        return [strip_vertex(tuple(layer[x] for layer in stack)) for x in range(nu + 1)]

    rows: list[list[str]] = []
    for i in range(n + 1):  # shear
        stack = c_prime[i:] + [d if m % 2 == 0 else c for m in range(i)]
        rows.append(assemble(stack))
    for y in range(1, 2 * inner.n + 1):  # replay the inner rectangle
        r = list(inner.row(y))
        stack = [_omega(r) if j % 2 == 0 else r for j in range(n)]
        rows.append(assemble(stack))
    big_n = len(rows) - 1
    ok, viol = is_locally_admissible(_rows_pattern(sg, rows))
    if not ok:
        raise ConstructionFailed(f"sheared rectangle not admissible at {viol}")
    left = [r[0] for r in rows]
    right = [r[-1] for r in rows]
    top_row = rows[-1]
    periodic = all(top_row[x] == top_row[x % 2] for x in range(len(top_row)))
    if left != right or not periodic:
        raise ConstructionFailed("sheared rectangle lacks equal sides or a periodic top row")

    # diagonal side blocks: column -a (and nu + a) at height y carries F(y - a)
    m = big_n + 2 + (big_n % 2)

    def side(z: int) -> str:
        return left[z] if z >= 0 else (s0 if z % 2 == 0 else s1)

    ext = [[side(y - a) for a in range(m, 0, -1)] + rows[y] + [side(y - a) for a in range(1, m + 1)]
           for y in range(big_n + 1)]
    rb = _RowBuilder(sg.adjacent, ext[-1], m - big_n, m + nu + big_n)
    rb.rows = [list(r) for r in ext]
    rb.reduce_content()
    if len(rb.content) != 1:
        raise ConstructionFailed("top row did not contract")
    if len(rb.rows) % 2 == 0:
        w = rb.row
        rb.rows.append(w[1:] + [w[-2]])
    evidence = {
        "k_plus": kp,
        "n_star": inner.n,
        "n_plus": big_n,
        "side_block_width": m,
        "s": [s0, s1, s0],
        "c_prime": [list(x) for x in c_prime],
        "inner_rectangle": inner.to_json(),
    }
    return _certificate(sg, rb.rows, gamma, s0, s1, kp + m // 2, evidence)


# ---------------------------------------------------------------------------
# corners and annuli


def corner_pattern(gamma: Walk | Sequence[str], gamma2: Walk | Sequence[str], kind: str, graph: Graph | None = None) -> Pattern:
    """Pattern on ``[0, m]^2`` read off the concatenation ``h = gamma ⊙ gamma2`` along diagonals.

    ``⌟``: cell ``(x, y)`` carries ``h[x + y]``; its sides read ``gamma``
    (left), ``gamma2`` (up), ``gamma2^-1`` (right) and ``gamma^-1`` (down).
    ``⌝`` is that pattern turned a quarter clockwise: cell ``(x, y)`` carries
    ``h[m - y + x]`` and the sides read ``gamma^-1``, ``gamma``, ``gamma2``,
    ``gamma2^-1``.
    """
    if graph is None:
        graph = gamma.graph if isinstance(gamma, Walk) else gamma2.graph if isinstance(gamma2, Walk) else None
    if graph is None:
        raise ValueError("pass a graph or Walk arguments")
    kind = _KIND_ALIASES.get(kind)
    if kind is None:
        raise ValueError("kind must be ⌟ or ⌝")
    a, b = _seq(gamma), _seq(gamma2)
    if len(a) != len(b):
        raise LengthMismatch(f"lengths {len(a) - 1} and {len(b) - 1} differ")
    if a[-1] != b[0]:
        raise DiagonalInadmissible("gamma must end where gamma2 starts")
    h = a + b[1:]
    m = len(a) - 1
    if kind == LOWER_RIGHT:
        cells = {(x, y): h[x + y] for x in range(m + 1) for y in range(m + 1)}
    else:
        cells = {(x, y): h[m - y + x] for x in range(m + 1) for y in range(m + 1)}
    p = Pattern(graph, cells, 2)
    ok, viol = is_locally_admissible(p)
    if not ok:
        raise DiagonalInadmissible(f"diagonal rule breaks adjacency at {viol.cell}-{viol.other}")
    return p


def _power(c: Seq, k: int) -> Seq:
    """``c^k`` for a closed walk (negative ``k`` uses the reverse)."""
    base = c if k >= 0 else _inv(c)
    out: tuple[str, ...] = (c[0],)
    for _ in range(abs(k)):
        out += base[1:]
    return out


def outer_words(c: Seq, c2: Seq, c3: Seq, c4: Seq, k: int) -> tuple[Seq, Seq, Seq, Seq]:
    """Clockwise sides of the outer boundary of the annulus built from the four cycles."""
    return (
        _power(c, -k) + _power(c, k + 1)[1:],
        _power(c2, k + 1) + _power(c2, -k)[1:],
        _power(c3, -k) + _power(c3, k + 1)[1:],
        _power(c4, k + 1) + _power(c4, -k)[1:],
    )


@dataclass(frozen=True)
class AnnulusPattern:
    pattern: Pattern
    cycles: tuple[Seq, Seq, Seq, Seq]
    k: int
    n: int

    @property
    def outer(self) -> int:
        return self.n * (2 * self.k + 1)

    def checks(self) -> dict[str, bool]:
        n, big = self.n, self.outer
        p = self.pattern
        support_ok = p.support == frozenset(annulus_cells(big, n - 1))
        inner = border_reading(p.restrict(boundary_cells(-n, -n, n, n)))
        outer = border_reading(p.restrict(boundary_cells(-big, -big, big, big)))
        expected = outer_words(*self.cycles, self.k)
        return _checklist(
            [
                ("support is B(n(2k+1)) minus B(n-1)", support_ok),
                ("locally admissible", is_locally_admissible(p)[0]),
                ("inner boundary reads the four cycles",
                 (inner.left, inner.up, inner.right, inner.down) == self.cycles),
                ("outer boundary reads the stretched words",
                 (outer.left, outer.up, outer.right, outer.down) == expected),
            ]
        )

    def to_json(self) -> dict:
        return {
            "cycles": [list(c) for c in self.cycles],
            "k": self.k,
            "n": self.n,
            "pattern": self.pattern.to_json(),
            "checks": self.checks(),
        }


def annulus_pattern(g: Graph, c: Sequence[str], c2: Sequence[str], c3: Sequence[str], c4: Sequence[str],
                    k: int) -> AnnulusPattern:
    """Pattern on ``B(n(2k+1)) minus B(n-1)`` whose inner boundary reads the four cycles clockwise.

    The four side strips are sheared copies of their cycle and the four
    corners are :func:`corner_pattern` blocks gluing neighbouring strips.
    """
    cyc = tuple(_seq(x) for x in (c, c2, c3, c4))
    lengths = {len(x) - 1 for x in cyc}
    if len(lengths) != 1:
        raise LengthMismatch("the four cycles must have the same length")
    two_n = lengths.pop()
    if two_n % 2 or two_n == 0:
        raise LengthMismatch("cycle length must be a positive even number 2n")
    base = cyc[0][0]
    for x in cyc:
        Walk(g, x)
        if x[0] != base or x[-1] != base:
            raise BasepointMismatch("all four cycles must start and end at the same vertex")
    if k < 0:
        raise ValueError("k must be nonnegative")
    n = two_n // 2
    big = n * (2 * k + 1)
    m = 2 * n * k
    cl, cu, cr, cd = cyc

    def f(w: Seq, s: int) -> str:
        return w[s % two_n]

    cells: dict[Cell, str] = {}
    for y in range(-n, n + 1):
        for x in range(-big, -n + 1):
            cells[(x, y)] = f(cl, x + y)
        for x in range(n, big + 1):
            cells[(x, y)] = f(cr, -x - y)
    for x in range(-n, n + 1):
        for y in range(n, big + 1):
            cells[(x, y)] = f(cu, x + y)
        for y in range(-big, -n + 1):
            cells[(x, y)] = f(cd, -x - y)
    corners = [
        ((-big, n), corner_pattern(_power(cl, k), _power(cu, k), LOWER_RIGHT, g)),
        ((-big, -big), corner_pattern(_power(cl, k), _power(cd, k), UPPER_RIGHT, g)),
        ((n, n), corner_pattern(_power(cu, -k), _power(cr, -k), UPPER_RIGHT, g)),
        ((n, -big), corner_pattern(_power(cd, -k), _power(cr, -k), LOWER_RIGHT, g)),
    ]
    for (ox, oy), blk in corners:
        for (x, y), v in blk.cells.items():
            cell = (ox + x, oy + y)
            if cells.get(cell, v) != v:
                raise ConstructionFailed(f"corner block disagrees with a side strip at {cell}")
            cells[cell] = v
    ann = AnnulusPattern(Pattern(g, cells, 2), cyc, k, n)
    _require(ann.checks(), "annulus")
    return ann


# ---------------------------------------------------------------------------
# box extension


def unique_common_neighbor_cycle(g: Graph, c: Walk | Sequence[str]) -> bool:
    """Whether each vertex of ``c`` is the only common neighbour of the two vertices around it."""
    c = _seq(c)
    Walk(g, c)
    if c[0] != c[-1]:
        raise NotACycle("expected a cycle")
    length = len(c) - 1
    if length % 2:
        raise OddLengthCycle("expected an even cycle")
    if length == 0:
        raise Backtracking("the trivial cycle backtracks")
    body = c[:-1]
    for i in range(length):
        if body[i - 1] == body[(i + 1) % length]:
            raise Backtracking(f"cycle backtracks at position {i}")
    for i in range(length):
        common = set(g.neighbors(body[i - 1])) & set(g.neighbors(body[(i + 1) % length]))
        if common != {body[i]}:
            return False
    return True


@dataclass(frozen=True)
class HoldsUpTo:
    n_max: int
    stats: Mapping[str, int] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class FailsAt:
    n: int
    witness: Pattern  # the outer ring
    annulus_fill: Pattern
    stats: Mapping[str, int] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class BoxBudget:
    max_patterns: int = 200_000
    node_budget: int = 200_000
    max_vertices: int = 20
    max_outer: int = 5


def _ring_walks(g: Graph, length: int, starts: Sequence[str]) -> Iterator[tuple[str, ...]]:
    """Closed walks of ``length`` steps from the given start vertices, in lexicographic order."""
    for start in starts:
        stack = [(start,)]
        while stack:
            w = stack.pop()
            if len(w) == length + 1:
                yield w
                continue
            nbrs = g.neighbors(w[-1])
            if len(w) == length:
                if start in nbrs:
                    stack.append(w + (start,))
                continue
            for v in reversed(nbrs):
                stack.append(w + (v,))


def _ring_canonical(w: tuple[str, ...], side: int) -> bool:
    """Whether ``w`` is the least of its images under the symmetries of the square."""
    body = w[:-1]
    variants = []
    for seq in (body, (body[0],) + tuple(reversed(body[1:]))):
        for r in range(4):
            s = r * side
            variants.append(seq[s:] + seq[:s])
    return body == min(variants)


def _box_worker(g: Graph, n: int, big: int, starts: Sequence[str], max_patterns: int, node_budget: int
                ) -> tuple[str, dict[str, int], tuple[str, ...] | None]:
    """Scan the ring walks starting at ``starts``; stop at the first (least) failure."""
    stats = {"patterns": 0, "extendable_to_annulus": 0, "fills": 0}
    cells = boundary_cells(-big, -big, big, big)
    annulus = annulus_cells(big, n)
    full = square_box(big)
    for w in _ring_walks(g, len(cells) - 1, starts):
        if not _ring_canonical(w, 2 * big):
            continue
        stats["patterns"] += 1
        if stats["patterns"] > max_patterns:
            return "budget", stats, None
        p = Pattern(g, dict(zip(cells, w)), 2)
        try:
            stats["fills"] += 1
            if not isinstance(fill(p, annulus, node_budget=node_budget), Completion):
                continue
            stats["extendable_to_annulus"] += 1
            stats["fills"] += 1
            whole = fill(p, full, node_budget=node_budget)
        except BudgetExhausted:
            return "budget", stats, None
        if not isinstance(whole, Completion):
            return "fail", stats, w
    return "ok", stats, None


def box_extension_test(g: Graph, r: int, n_max: int, budget: BoxBudget | None = None,
                       threads: int = 1) -> HoldsUpTo | FailsAt | Unknown:
    """Exhaustive check of the box-extension condition with parameter ``r`` for ``n <= n_max``.

    Ring patterns on the boundary of ``B(n + r + 1)`` are enumerated up to the
    symmetries of the square; each one that extends inward to the annulus
    ``B(n + r + 1) minus B(n)`` must also extend to the full box. With several
    threads the start vertices are split across worker processes and the
    lexicographically least failure is reported, so the answer does not depend
    on scheduling.
    """
    budget = budget or BoxBudget()
    if len(g.vertices) > budget.max_vertices:
        raise InadmissibleInput(f"graph has more than {budget.max_vertices} vertices")
    if r < 1 or n_max < 0:
        raise ValueError("need r >= 1 and n_max >= 0")
    if n_max + r + 1 > budget.max_outer:
        raise InadmissibleInput(f"n_max + r + 1 exceeds the cap {budget.max_outer}")
    total = {"patterns": 0, "extendable_to_annulus": 0, "fills": 0}
    for n in range(n_max + 1):
        big = n + r + 1
        if threads > 1:
            chunks = [[v] for v in g.vertices]
            with ProcessPoolExecutor(max_workers=threads) as ex:
                results = list(ex.map(_box_worker, *zip(*[
                    (g, n, big, ch, budget.max_patterns, budget.node_budget) for ch in chunks])))
        else:
            results = [_box_worker(g, n, big, g.vertices, budget.max_patterns, budget.node_budget)]
        for _, stats, _ in results:
            for key, val in stats.items():
                total[key] += val
        failures = sorted(w for status, _, w in results if status == "fail")
        budget_hit = any(status == "budget" for status, _, _ in results)
        if failures and not (threads > 1 and budget_hit):
            cells = boundary_cells(-big, -big, big, big)
            witness = Pattern(g, dict(zip(cells, failures[0])), 2)
            ann = fill(witness, annulus_cells(big, n))
            assert isinstance(ann, Completion)
            return FailsAt(n, witness, ann.pattern, dict(total))
        if budget_hit:
            return Unknown({**total, "n": n, "reason": "budget"})
    return HoldsUpTo(n_max, dict(total))


@dataclass(frozen=True)
class FailureEvidence:
    """Machine-checked refutation of the box-extension property from a rigid cycle."""

    graph: Graph
    cycle: Seq
    l: int
    annulus: AnnulusPattern
    checks: Mapping[str, bool]
    stats: Mapping[str, int]

    @property
    def n(self) -> int:
        return (len(self.cycle) - 1) // 2

    @property
    def outer_ring(self) -> Pattern:
        big = self.annulus.outer
        return self.annulus.pattern.restrict(ring(big))

    @property
    def refuted_r(self) -> int:
        """Largest box-extension parameter this witness refutes."""
        return self.annulus.outer - self.n

    def recheck(self) -> dict[str, bool]:
        """Re-run every check from the stored annulus; raise if any fails."""
        try:
            checks = _witness_checks(self.graph, self.cycle, self.annulus, None)[0]
        except HomshiftError as exc:
            raise HypothesisFails(f"stored annulus is malformed: {exc}") from exc
        failed = [k for k, ok in checks.items() if not ok]
        if failed:
            raise HypothesisFails(f"witness checks failed: {failed}")
        return checks

    def to_json(self) -> dict:
        return {
            "graph": self.graph.name,
            "cycle": list(self.cycle),
            "l": self.l,
            "n": self.n,
            "refutes_box_extension_for_r_up_to": self.refuted_r,
            "annulus": self.annulus.to_json(),
            "checks": dict(self.checks),
            "stats": dict(self.stats),
        }


def _witness_checks(g: Graph, c: Seq, ann: AnnulusPattern, node_budget: int | None
                    ) -> tuple[dict[str, bool], dict[str, int]]:
    n, big = ann.n, ann.outer
    p = ann.pattern
    checks = dict(ann.checks())
    stats: dict[str, int] = {}
    forced = True
    for j in range(big, n, -1):
        pinned = p.restrict(ring(j))
        sols = list(_iter_limited(pinned, ring(j) + ring(j - 1), node_budget))
        stats[f"fills_ring_{j - 1}"] = len(sols)
        if len(sols) != 1 or any(sols[0][cell] != p[cell] for cell in ring(j - 1)):
            forced = False
    checks["each ring is forced by the next outer one"] = forced
    core = p.restrict(ring(n))
    four = _power(c, 4)
    checks["inner boundary reads c^4"] = border_reading(core).cycle == four
    res = fill(core, ring(n) + ring(n - 1), node_budget=node_budget)
    stats["nodes_one_ring_further"] = res.nodes if not isinstance(res, Completion) else -1
    checks["no extension one ring further in"] = not isinstance(res, Completion)
    whole = fill(p.restrict(ring(big)), square_box(big), node_budget=node_budget)
    checks["outer ring has no extension to the full box"] = not isinstance(whole, Completion)
    return checks, stats


def _iter_limited(p: Pattern, target: list[Cell], node_budget: int | None) -> list[Pattern]:
    from .patterns import iter_fills

    # at most two solutions decide uniqueness
    count = count_fills(p, target, limit=2, node_budget=node_budget)
    return list(iter_fills(p, target, limit=count)) if count else []


def kenkatabami_witness(l: int = 1, graph: Graph | None = None, cycle: Sequence[str] | None = None,
                        node_budget: int | None = 2_000_000) -> FailureEvidence:
    """Annulus around a rigid cycle whose outer ring extends to the annulus only, never to the box.

    Defaults to the exterior hexagon of the Kenkatabami graph; any graph and
    cycle meeting the unique-common-neighbour hypothesis can be supplied.
    """
    from .builtins import KENKATABAMI_EXTERIOR, kenkatabami

    g = graph or kenkatabami()
    c = _seq(cycle) if cycle is not None else KENKATABAMI_EXTERIOR
    if l < 1:
        raise ValueError("l must be at least 1")
    if not unique_common_neighbor_cycle(g, c):
        raise HypothesisFails("some vertex of the cycle is not the unique common neighbour of its neighbours")
    ann = annulus_pattern(g, c, c, c, c, l)
    checks, stats = _witness_checks(g, c, ann, node_budget)
    if not all(checks.values()):
        raise HypothesisFails(f"witness checks failed: {[k for k, v in checks.items() if not v]}")
    return FailureEvidence(g, c, l, ann, checks, stats)


# ---------------------------------------------------------------------------
# strip gluing


@dataclass(frozen=True)
class GlueBudget:
    max_l: int = 64
    node_budget: int = 500_000


def _chessboard_base(x: PeriodicConfig) -> bool:
    if x.dim != 2 or x.periods != (2, 2):
        return False
    t0, t1 = x.domain[(0, 0)], x.domain[(1, 0)]
    return all(v == (t0 if sum(c) % 2 == 0 else t1) for c, v in x.domain.items())


def strip_glue(g: Graph, x: PeriodicConfig, x2: PeriodicConfig, r: int,
               budget: GlueBudget | None = None) -> PeriodicConfig | Unknown:
    """Configuration agreeing with ``x`` on ``[-r, oo) x [-r, r]`` and with ``x2`` on ``(-oo, r] x [-r, r]``.

    Outside ``B(l)`` the result is the common chessboard; the two rectangles
    above and below the strip inside ``B(l)`` are filled by the fill oracle,
    doubling ``l`` until a fill exists.
    """
    budget = budget or GlueBudget()
    if not x.same_base(x2) or not _chessboard_base(x):
        raise NotGibbsEquivalent("both configurations must perturb the same chessboard")
    for cfg in (x, x2):
        ok, viol = cfg.is_admissible()
        if not ok:
            raise InadmissibleInput(f"configuration not admissible at {viol}")
    core = square_box(r)
    if any(x(c) != x2(c) for c in core):
        raise DisagreeOnCore(f"the configurations differ on B({r})")
    base = x.base()
    if not x.overrides and not x2.overrides:
        return base
    spread = max(max(abs(v) for v in c) for c in list(x.overrides) + list(x2.overrides))
    l = max(r + 1, spread + 1)
    tried = []
    while l <= budget.max_l:
        cells: dict[Cell, str] = {}
        holes = []
        for c in square_box(l):
            cx, cy = c
            if -r <= cy <= r:
                cells[c] = x(c) if cx >= -r else x2(c)
            elif abs(cx) == l or abs(cy) == l:
                cells[c] = base(c)
            else:
                holes.append(c)
        p = Pattern(g, cells, 2)
        tried.append(l)
        ok, _ = is_locally_admissible(p)
        if ok:
            try:
                res = fill(p, square_box(l), node_budget=budget.node_budget)
            except BudgetExhausted:
                return Unknown({"tried_l": tried, "reason": "node_budget"})
            if isinstance(res, Completion):
                ov = {c: v for c, v in res.pattern.cells.items() if v != base(c)}
                y = PeriodicConfig(g, base.periods, base.domain, ov)
                _require(_glue_checks(x, x2, y, r, l), "strip glue")
                return y
        l *= 2
    return Unknown({"tried_l": tried, "reason": "max_l"})


def _glue_checks(x: PeriodicConfig, x2: PeriodicConfig, y: PeriodicConfig, r: int, l: int) -> dict[str, bool]:
    window = square_box(l + 2)
    strip = [c for c in window if -r <= c[1] <= r]
    return _checklist(
        [
            ("admissible", y.is_admissible()[0]),
            ("agrees with x on the right part of the strip", all(y(c) == x(c) for c in strip if c[0] >= -r)),
            ("agrees with x' on the left part of the strip", all(y(c) == x2(c) for c in strip if c[0] <= r)),
            ("finite perturbation of the chessboard", all(max(map(abs, c)) <= l for c in y.overrides)),
        ]
    )
