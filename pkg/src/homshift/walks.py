"""Walk algebra: free reduction, the reduced product, circular shifts, squares and square moves.

Most functions come in two flavours: a public one on :class:`Walk` objects and a
private one on plain vertex tuples, which the search kernels use directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import EndpointMismatch, NotACycle, NotAWalk, ParseError, TraceInvalid, TrivialCycle
from .graphs import Graph, squares_by_base

Seq = tuple[str, ...]


def reduce_seq(seq: Iterable[str]) -> Seq:
    """Remove backtracks ``a b a -> a`` until none remain."""
    stack: list[str] = []
    for v in seq:
        if len(stack) >= 2 and stack[-2] == v:
            stack.pop()
        else:
            stack.append(v)
    return tuple(stack)


def is_reduced_seq(seq: Sequence[str]) -> bool:
    return all(seq[i] != seq[i + 2] for i in range(len(seq) - 2))


def concat_seq(p: Sequence[str], q: Sequence[str]) -> Seq:
    if p[-1] != q[0]:
        raise EndpointMismatch(f"walk ends at {p[-1]!r} but next starts at {q[0]!r}")
    return tuple(p) + tuple(q[1:])


def is_square_seq(s: Sequence[str]) -> bool:
    return len(s) == 5 and s[0] == s[4] and s[0] != s[2] and s[1] != s[3]


def splice_seq(c: Sequence[str], position: int, loop: Sequence[str]) -> Seq:
    """Insert the closed walk ``loop`` at ``c[position]`` and reduce."""
    if loop[0] != c[position]:
        raise EndpointMismatch("spliced loop must be based at the splice position")
    return reduce_seq((*c[:position], *loop, *c[position + 1:]))


class Walk:
    """A walk on ``graph``: a nonempty vertex sequence with consecutive vertices adjacent.

    ``length`` counts steps. A walk whose ends agree is a cycle; the one-vertex
    walk is the trivial cycle.
    """

    __slots__ = ("graph", "seq")

    def __init__(self, graph: Graph, seq: Iterable[str], check: bool = True):
        seq = tuple(seq)
        if check:
            if not seq:
                raise NotAWalk("a walk has at least one vertex")
            for v in seq:
                if v not in graph:
                    raise NotAWalk(f"{v!r} is not a vertex")
            for a, b in zip(seq, seq[1:]):
                if not graph.adjacent(a, b):
                    raise NotAWalk(f"{a!r} and {b!r} are not adjacent")
        self.graph = graph
        self.seq = seq

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Walk):
            return NotImplemented
        return self.seq == other.seq and self.graph == other.graph

    def __hash__(self) -> int:
        return hash(self.seq)

    def __lt__(self, other: "Walk") -> bool:
        return self.seq < other.seq

    def __repr__(self) -> str:
        return f"Walk({format_walk(self.seq)})"

    def __len__(self) -> int:
        return len(self.seq)

    def __iter__(self) -> Iterator[str]:
        return iter(self.seq)

    def __getitem__(self, i):
        return self.seq[i]

    @property
    def length(self) -> int:
        return len(self.seq) - 1

    @property
    def start(self) -> str:
        return self.seq[0]

    @property
    def end(self) -> str:
        return self.seq[-1]

    @property
    def is_closed(self) -> bool:
        return self.seq[0] == self.seq[-1]

    @property
    def is_trivial(self) -> bool:
        return len(self.seq) == 1

    @property
    def is_reduced(self) -> bool:
        return is_reduced_seq(self.seq)

    def inverse(self) -> "Walk":
        return Walk(self.graph, self.seq[::-1], check=False)

    def concat(self, other: "Walk") -> "Walk":
        """Plain concatenation, sharing the junction vertex."""
        return Walk(self.graph, concat_seq(self.seq, other.seq), check=False)

    def __matmul__(self, other: "Walk") -> "Walk":
        return self.concat(other)

    def power(self, k: int) -> "Walk":
        """``k``-fold concatenation of a cycle; negative ``k`` uses the reverse."""
        if not self.is_closed:
            raise NotACycle("only cycles have powers")
        base = self if k >= 0 else self.inverse()
        seq = base.seq[:1]
        for _ in range(abs(k)):
            seq = seq + base.seq[1:]
        return Walk(self.graph, seq, check=False)


def trivial(graph: Graph, v: str) -> Walk:
    return Walk(graph, (v,))


def reduce(p: Walk) -> Walk:
    return Walk(p.graph, reduce_seq(p.seq), check=False)


def star(p: Walk, q: Walk) -> Walk:
    """Reduced product: ``reduce(p concatenated with q)``."""
    return Walk(p.graph, reduce_seq(concat_seq(p.seq, q.seq)), check=False)


def circular_shift(c: Walk) -> Walk:
    """Rotate a nontrivial cycle by one step: ``c1 ... cl c1``."""
    if not c.is_closed:
        raise NotACycle("circular shift needs a cycle")
    if c.is_trivial:
        raise TrivialCycle("cannot rotate the trivial cycle")
    return Walk(c.graph, c.seq[1:] + c.seq[1:2], check=False)


def is_square(c: Walk) -> bool:
    return is_square_seq(c.seq)


def backtrack(graph: Graph, t0: str, t1: str, k: int = 1) -> Walk:
    """The backtrack power ``t0 t1 t0 t1 ... t0`` with ``|k|`` round trips (a palindrome, so the sign is immaterial)."""
    return Walk(graph, (t0, t1, t0)).power(k)


def parse_walk(text: str, graph: Graph) -> Walk:
    names = [s.strip() for s in text.split(",")]
    if not names or any(not s for s in names):
        raise ParseError(f"bad walk literal {text!r}")
    try:
        return Walk(graph, names)
    except NotAWalk as exc:
        raise ParseError(f"bad walk {text!r}: {exc}") from None


def format_walk(seq: Sequence[str]) -> str:
    return ",".join(seq)


# ---------------------------------------------------------------------------
# square moves


@dataclass(frozen=True)
class SquareMove:
    """Splice of a square at ``position`` of the current cycle.

    ``insert`` splices ``square`` itself; ``delete`` splices its reverse, so
    ``square`` names the square being removed.
    """

    position: int
    square: Seq
    direction: str  # "insert" | "delete"

    def spliced(self) -> Seq:
        return self.square if self.direction == "insert" else self.square[::-1]

    def to_json(self) -> dict:
        return {"position": self.position, "square": list(self.square), "direction": self.direction}


@dataclass(frozen=True)
class SquareTrace:
    basepoint: str
    start: Seq
    end: Seq
    moves: tuple[SquareMove, ...] = field(default_factory=tuple)

    def replay(self, graph: Graph) -> list[Seq]:
        """Apply every move with reduction; raise :class:`TraceInvalid` on any defect."""
        cur = reduce_seq(self.start)
        if cur[0] != self.basepoint:
            raise TraceInvalid("start cycle is not based at the basepoint")
        states = [cur]
        for i, mv in enumerate(self.moves):
            s = mv.square
            if not is_square_seq(s) or not all(graph.adjacent(a, b) for a, b in zip(s, s[1:])):
                raise TraceInvalid(f"move {i}: {format_walk(s)} is not a square of the graph")
            if mv.direction not in ("insert", "delete"):
                raise TraceInvalid(f"move {i}: unknown direction {mv.direction!r}")
            if not 0 <= mv.position < len(cur) or cur[mv.position] != s[0]:
                raise TraceInvalid(f"move {i}: square not based at position {mv.position}")
            cur = splice_seq(cur, mv.position, mv.spliced())
            states.append(cur)
        if cur != reduce_seq(self.end):
            raise TraceInvalid("replay does not end at the recorded end cycle")
        return states

    def is_valid(self, graph: Graph) -> bool:
        try:
            self.replay(graph)
        except TraceInvalid:
            return False
        return True

    def to_json(self) -> dict:
        return {
            "basepoint": self.basepoint,
            "start": list(self.start),
            "end": list(self.end),
            "moves": [m.to_json() for m in self.moves],
        }


def iter_square_moves(
    c: Seq, table: dict[str, list[Seq]], max_len: int | None = None
) -> Iterator[tuple[Seq, SquareMove]]:
    """Every single-square splice of the reduced cycle ``c`` with its result."""
    n = len(c)
    for i in range(n):
        for s in table[c[i]]:
            new = splice_seq(c, i, s)
            if max_len is not None and len(new) - 1 > max_len:
                continue
            if len(new) < n:
                yield new, SquareMove(i, s[::-1], "delete")
            else:
                yield new, SquareMove(i, s, "insert")


def square_move_neighbors(c: Walk, max_len: int) -> list[Walk]:
    """Reduced cycles one square move away from ``c``, of length at most ``max_len``.

    The input itself is included: splicing a backtrack changes nothing after
    reduction.
    """
    if not c.is_closed:
        raise NotACycle("square moves act on cycles")
    seq = reduce_seq(c.seq)
    table = squares_by_base(c.graph)
    found = {seq} if len(seq) - 1 <= max_len else set()
    for new, _ in iter_square_moves(seq, table, max_len):
        found.add(new)
    return [Walk(c.graph, s, check=False) for s in sorted(found)]
