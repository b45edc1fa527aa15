"""Patterns on Z^d, periodic configurations with finite perturbations, and a fill oracle.

The fill/count oracle is a backtracking search over the free cells in
lexicographic order with values tried in canonical vertex order. Domains are
bitmasks and arc consistency is maintained after every choice; pruning only
removes values that cannot occur in any completion, so the first completion
found is the lexicographically first one. Exact counts use a separate
frontier sweep (a transfer-matrix style dynamic program over the same order).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    BudgetExhausted,
    DimensionMismatch,
    InadmissibleInput,
    InadmissiblePerturbation,
    NotACycle,
    NotAnEdge,
    NotARectangleBoundary,
    OddLengthCycle,
    ParseError,
)
from .graphs import Graph
from .walks import Walk

Cell = tuple[int, ...]


def unit(d: int, axis: int, sign: int = 1) -> Cell:
    return tuple(sign if i == axis else 0 for i in range(d))


def add(a: Cell, b: Cell) -> Cell:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Cell, b: Cell) -> Cell:
    return tuple(x - y for x, y in zip(a, b))


def l1(a: Cell) -> int:
    return sum(abs(x) for x in a)


def box(lo: Sequence[int], hi: Sequence[int]) -> list[Cell]:
    """All cells of the closed box ``[lo, hi]`` in lexicographic order."""
    return [tuple(c) for c in product(*(range(a, b + 1) for a, b in zip(lo, hi)))]


def square_box(r: int, d: int = 2) -> list[Cell]:
    """``B^d(r) = [-r, r]^d``."""
    return box([-r] * d, [r] * d)


def grid_neighbors(c: Cell) -> Iterator[Cell]:
    for i in range(len(c)):
        for s in (-1, 1):
            yield c[:i] + (c[i] + s,) + c[i + 1:]


@dataclass(frozen=True)
class Violation:
    cell: Cell
    other: Cell
    values: tuple[str, str]


class Pattern:
    """A finite partial assignment of graph vertices to cells of Z^d."""

    __slots__ = ("graph", "dim", "cells")

    def __init__(self, graph: Graph, cells: Mapping[Cell, str], dim: int | None = None):
        cells = {tuple(int(x) for x in c): str(v) for c, v in cells.items()}
        if dim is None:
            if not cells:
                raise DimensionMismatch("empty pattern needs an explicit dimension")
            dim = len(next(iter(cells)))
        for c, v in cells.items():
            if len(c) != dim:
                raise DimensionMismatch(f"cell {c} is not {dim}-dimensional")
            if v not in graph:
                raise InadmissibleInput(f"{v!r} is not a vertex of the graph")
        self.graph = graph
        self.dim = dim
        self.cells: dict[Cell, str] = dict(sorted(cells.items()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pattern):
            return NotImplemented
        return self.dim == other.dim and self.cells == other.cells and self.graph == other.graph

    def __repr__(self) -> str:
        return f"<Pattern dim={self.dim} cells={len(self.cells)}>"

    def __getitem__(self, c: Cell) -> str:
        return self.cells[c]

    def __contains__(self, c: object) -> bool:
        return c in self.cells

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def support(self) -> frozenset[Cell]:
        return frozenset(self.cells)

    def restrict(self, cells: Iterable[Cell]) -> "Pattern":
        keep = set(cells)
        return Pattern(self.graph, {c: v for c, v in self.cells.items() if c in keep}, self.dim)

    def without(self, cells: Iterable[Cell]) -> "Pattern":
        drop = set(cells)
        return Pattern(self.graph, {c: v for c, v in self.cells.items() if c not in drop}, self.dim)

    def merged(self, other: "Pattern") -> "Pattern":
        """Union of two patterns; they must agree where both are defined."""
        cells = dict(self.cells)
        for c, v in other.cells.items():
            if cells.get(c, v) != v:
                raise InadmissibleInput(f"patterns disagree at {c}")
            cells[c] = v
        return Pattern(self.graph, cells, self.dim)

    def translated(self, v: Cell) -> "Pattern":
        return Pattern(self.graph, {add(c, v): x for c, x in self.cells.items()}, self.dim)

    def bounding_box(self) -> tuple[Cell, Cell]:
        cs = list(self.cells)
        lo = tuple(min(c[i] for c in cs) for i in range(self.dim))
        hi = tuple(max(c[i] for c in cs) for i in range(self.dim))
        return lo, hi

    # serialization

    def to_json(self, graph_ref: str | None = None) -> dict:
        return {
            "dim": self.dim,
            "graph": graph_ref or self.graph.name or "",
            "cells": [[*c, v] for c, v in self.cells.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping, graph: Graph) -> "Pattern":
        try:
            dim = int(data["dim"])
            cells = {}
            for entry in data["cells"]:
                *coords, v = entry
                if len(coords) != dim:
                    raise ParseError(f"cell {entry!r} does not have {dim} coordinates")
                cells[tuple(int(x) for x in coords)] = str(v)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad pattern JSON: {exc}") from None
        return cls(graph, cells, dim)

    def to_grid(self) -> str:
        """Text grid for d = 2: top row first, ``.`` for holes."""
        if self.dim != 2:
            raise DimensionMismatch("text grids are two-dimensional")
        (x0, y0), (x1, y1) = self.bounding_box()
        rows = []
        for y in range(y1, y0 - 1, -1):
            rows.append(" ".join(self.cells.get((x, y), ".") for x in range(x0, x1 + 1)))
        return "\n".join(rows) + "\n"

    @classmethod
    def from_grid(cls, text: str, graph: Graph, origin: Cell = (0, 0)) -> "Pattern":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        cells = {}
        h = len(rows)
        for r, row in enumerate(rows):
            for x, tok in enumerate(row):
                if tok != ".":
                    cells[(origin[0] + x, origin[1] + h - 1 - r)] = tok
        try:
            return cls(graph, cells, 2)
        except InadmissibleInput as exc:
            raise ParseError(str(exc)) from None


def load_pattern(path: str | Path, graph: Graph) -> Pattern:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            return Pattern.from_json(json.loads(text), graph)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON in {path}: {exc}") from None
    return Pattern.from_grid(text, graph)


# ---------------------------------------------------------------------------
# admissibility


def first_violation(p: Pattern) -> Violation | None:
    g = p.graph
    cells = p.cells
    for c, v in cells.items():
        for i in range(p.dim):
            nb = c[:i] + (c[i] + 1,) + c[i + 1:]
            w = cells.get(nb)
            if w is not None and not g.adjacent(v, w):
                return Violation(c, nb, (v, w))
    return None


def is_locally_admissible(p: Pattern) -> tuple[bool, Violation | None]:
    v = first_violation(p)
    return v is None, v


# ---------------------------------------------------------------------------
# the fill oracle


class _Search:
    """Arc-consistent backtracking over bitmask domains."""

    def __init__(self, p: Pattern, target: Iterable[Cell]):
        target_cells = sorted(set(target) | set(p.cells))
        if p.support - set(target):
            raise InadmissibleInput("the pattern's support is not inside the target")
        ok, viol = is_locally_admissible(p)
        if not ok:
            raise InadmissibleInput(f"pattern violates adjacency at {viol.cell}-{viol.other}")
        g = p.graph
        self.graph = g
        self.cells = target_cells
        idx = {c: i for i, c in enumerate(target_cells)}
        self.nbrs = [[idx[n] for n in grid_neighbors(c) if n in idx] for c in target_cells]
        self.vnbr = [0] * len(g.vertices)
        for v in g.vertices:
            m = 0
            for w in g.neighbors(v):
                m |= 1 << g.index(w)
            self.vnbr[g.index(v)] = m
        self._supp_cache: dict[int, int] = {}
        full = (1 << len(g.vertices)) - 1
        self.dom = [full] * len(target_cells)
        for c, v in p.cells.items():
            self.dom[idx[c]] = 1 << g.index(v)
        self.trail: list[tuple[int, int]] = []
        self.nodes = 0
        self.consistent = self._propagate(range(len(target_cells)))

    def _support(self, mask: int) -> int:
        s = self._supp_cache.get(mask)
        if s is None:
            s = 0
            m, i = mask, 0
            while m:
                if m & 1:
                    s |= self.vnbr[i]
                m >>= 1
                i += 1
            self._supp_cache[mask] = s
        return s

    def _propagate(self, seeds: Iterable[int]) -> bool:
        dom, nbrs, trail = self.dom, self.nbrs, self.trail
        queue = list(seeds)
        queued = set(queue)
        while queue:
            c = queue.pop()
            queued.discard(c)
            s = self._support(dom[c])
            for n in nbrs[c]:
                d = dom[n]
                nd = d & s
                if nd != d:
                    if not nd:
                        return False
                    trail.append((n, d))
                    dom[n] = nd
                    if n not in queued:
                        queued.add(n)
                        queue.append(n)
        return True

    def _undo(self, mark: int) -> None:
        dom, trail = self.dom, self.trail
        while len(trail) > mark:
            c, d = trail.pop()
            dom[c] = d

    def _next_var(self, start: int) -> int:
        dom = self.dom
        for i in range(start, len(dom)):
            d = dom[i]
            if d & (d - 1):
                return i
        return -1

    def solutions(self, limit: int | None = None, node_budget: int | None = None) -> Iterator[list[int]]:
        """Yield complete domain vectors (all singletons) in lexicographic order."""
        if not self.consistent:
            return
        # explicit stack of (var, remaining values mask, trail mark)
        var = self._next_var(0)
        if var < 0:
            yield list(self.dom)
            return
        stack = [(var, self.dom[var], len(self.trail))]
        found = 0
        while stack:
            var, remaining, mark = stack[-1]
            self._undo(mark)
            if not remaining:
                stack.pop()
                continue
            low = remaining & -remaining
            stack[-1] = (var, remaining ^ low, mark)
            self.nodes += 1
            if node_budget is not None and self.nodes > node_budget:
                raise _BudgetHit
            self.trail.append((var, self.dom[var]))
            self.dom[var] = low
            if not self._propagate([var]):
                continue
            nxt = self._next_var(var + 1)
            if nxt < 0:
                yield list(self.dom)
                found += 1
                if limit is not None and found >= limit:
                    return
                continue
            stack.append((nxt, self.dom[nxt], len(self.trail)))

    def count(self, node_budget: int | None = None) -> int:
        """Exact number of completions by a frontier sweep over the cell order.

        The state after cell ``i`` is the tuple of values on earlier cells that
        still have an unprocessed neighbour; counts are summed over states.
        """
        if not self.consistent:
            return 0
        n = len(self.cells)
        last = [max([i] + [j for j in self.nbrs[i] if j > i]) for i in range(n)]
        frontier: list[int] = []
        states: dict[tuple[int, ...], int] = {(): 1}
        for i in range(n):
            back = [frontier.index(j) for j in self.nbrs[i] if j < i]
            values = [v for v in range(len(self.vnbr)) if self.dom[i] >> v & 1]
            keep = [k for k, j in enumerate(frontier) if last[j] > i]
            new_frontier = [frontier[k] for k in keep]
            if last[i] > i:
                new_frontier.append(i)
            nxt: dict[tuple[int, ...], int] = {}
            for st, cnt in states.items():
                allowed = -1
                for k in back:
                    allowed &= self.vnbr[st[k]]
                base = tuple(st[k] for k in keep)
                for v in values:
                    if not allowed >> v & 1:
                        continue
                    self.nodes += 1
                    if node_budget is not None and self.nodes > node_budget:
                        raise _BudgetHit
                    key = base + (v,) if last[i] > i else base
                    nxt[key] = nxt.get(key, 0) + cnt
            states, frontier = nxt, new_frontier
            if not states:
                return 0
        return sum(states.values())

    def decode(self, dom: list[int]) -> dict[Cell, str]:
        vs = self.graph.vertices
        return {c: vs[d.bit_length() - 1] for c, d in zip(self.cells, dom)}


class _BudgetHit(Exception):
    pass


@dataclass(frozen=True)
class Completion:
    pattern: Pattern


@dataclass(frozen=True)
class NoFill:
    nodes: int = 0


def fill(p: Pattern, target_support: Iterable[Cell], node_budget: int | None = None) -> Completion | NoFill:
    """Lexicographically first locally admissible extension of ``p`` to ``target_support``.

    Raises :class:`BudgetExhausted` when more than ``node_budget`` search nodes are needed.
    """
    s = _Search(p, target_support)
    try:
        for dom in s.solutions(limit=1, node_budget=node_budget):
            return Completion(Pattern(p.graph, s.decode(dom), p.dim))
    except _BudgetHit:
        raise BudgetExhausted(f"fill exceeded {node_budget} search nodes") from None
    return NoFill(s.nodes)


def count_fills(
    p: Pattern, target_support: Iterable[Cell], limit: int | None = None, node_budget: int | None = None
) -> int:
    """Number of extensions (stopping at ``limit`` when given)."""
    s = _Search(p, target_support)
    try:
        if limit is None:
            return s.count(node_budget)
        return sum(1 for _ in s.solutions(limit=limit, node_budget=node_budget))
    except _BudgetHit:
        raise BudgetExhausted(f"count exceeded {node_budget} search nodes") from None


def iter_fills(p: Pattern, target_support: Iterable[Cell], limit: int | None = None) -> Iterator[Pattern]:
    s = _Search(p, target_support)
    for dom in s.solutions(limit=limit):
        yield Pattern(p.graph, s.decode(dom), p.dim)


# ---------------------------------------------------------------------------
# periodic configurations


class PeriodicConfig:
    """A configuration of Z^d: a rectangular-periodic base plus finitely many overrides.

    ``periods[i]`` is the period along axis ``i``; ``domain`` gives the value on
    the fundamental box ``[0, periods)``. Overrides take precedence.
    """

    __slots__ = ("graph", "dim", "periods", "domain", "overrides")

    def __init__(
        self,
        graph: Graph,
        periods: Sequence[int],
        domain: Mapping[Cell, str],
        overrides: Mapping[Cell, str] | None = None,
    ):
        self.graph = graph
        self.dim = len(periods)
        self.periods = tuple(int(p) for p in periods)
        if any(p < 1 for p in self.periods):
            raise ValueError("periods must be positive")
        expected = set(box([0] * self.dim, [p - 1 for p in self.periods]))
        dom = {tuple(c): str(v) for c, v in domain.items()}
        if set(dom) != expected:
            raise ValueError("domain must cover exactly the fundamental box")
        self.domain = dom
        ov = {}
        for c, v in (overrides or {}).items():
            c = tuple(c)
            if len(c) != self.dim:
                raise DimensionMismatch(f"override cell {c} is not {self.dim}-dimensional")
            if self.base_value(c) != v:
                ov[c] = str(v)
        self.overrides: dict[Cell, str] = dict(sorted(ov.items()))

    def base_value(self, c: Cell) -> str:
        return self.domain[tuple(x % p for x, p in zip(c, self.periods))]

    def __call__(self, c: Cell) -> str:
        v = self.overrides.get(c)
        return v if v is not None else self.base_value(c)

    at = __call__

    def same_base(self, other: "PeriodicConfig") -> bool:
        return self.graph == other.graph and self.periods == other.periods and self.domain == other.domain

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PeriodicConfig):
            return NotImplemented
        return self.same_base(other) and self.overrides == other.overrides

    def __repr__(self) -> str:
        return f"<PeriodicConfig periods={self.periods} overrides={len(self.overrides)}>"

    def shift(self, n: Cell) -> "PeriodicConfig":
        """``sigma^n``: the configuration ``m -> self(m + n)``."""
        if len(n) != self.dim:
            raise DimensionMismatch("shift vector has the wrong dimension")
        dom = {c: self.base_value(add(c, n)) for c in self.domain}
        ov = {sub(c, n): v for c, v in self.overrides.items()}
        return PeriodicConfig(self.graph, self.periods, dom, ov)

    def base(self) -> "PeriodicConfig":
        return PeriodicConfig(self.graph, self.periods, self.domain)

    def window(self, cells: Iterable[Cell]) -> Pattern:
        return Pattern(self.graph, {c: self(c) for c in cells}, self.dim)

    def check_window(self) -> list[Cell]:
        """Cells whose checking guarantees global admissibility."""
        cells = set(box([0] * self.dim, list(self.periods)))
        for c in self.overrides:
            cells.update(box([x - 1 for x in c], [x + 1 for x in c]))
        return sorted(cells)

    def is_admissible(self) -> tuple[bool, Violation | None]:
        return is_locally_admissible(self.window(self.check_window()))

    def differing_cells(self, other: "PeriodicConfig") -> set[Cell]:
        if not self.same_base(other):
            raise ValueError("configurations do not share a periodic base")
        cells = set(self.overrides) | set(other.overrides)
        return {c for c in cells if self(c) != other(c)}

    def to_json(self, graph_ref: str | None = None) -> dict:
        return {
            "graph": graph_ref or self.graph.name or "",
            "periods": list(self.periods),
            "domain": [[*c, v] for c, v in sorted(self.domain.items())],
            "overrides": [[*c, v] for c, v in self.overrides.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping, graph: Graph) -> "PeriodicConfig":
        try:
            periods = [int(p) for p in data["periods"]]
            d = len(periods)

            def cells(key: str) -> dict[Cell, str]:
                out = {}
                for entry in data.get(key, []):
                    *coords, v = entry
                    if len(coords) != d:
                        raise ParseError(f"{key} entry {entry!r} has wrong dimension")
                    out[tuple(int(x) for x in coords)] = str(v)
                return out

            return cls(graph, periods, cells("domain"), cells("overrides"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad configuration JSON: {exc}") from None


def chessboard(g: Graph, t0: str, t1: str, d: int = 2) -> PeriodicConfig:
    """``t0`` on cells of even L1 norm, ``t1`` on odd ones."""
    if not g.adjacent(t0, t1):
        raise NotAnEdge(f"({t0},{t1}) is not an edge")
    dom = {c: (t0 if sum(c) % 2 == 0 else t1) for c in box([0] * d, [1] * d)}
    return PeriodicConfig(g, [2] * d, dom)


def gamma_periodic_config(g: Graph, gamma: Walk | Sequence[str], d: int = 2) -> PeriodicConfig:
    """Configuration whose row ``j`` reads the cycle shifted by ``j``; extra axes alternate a one-step shift.

    Value at ``(i, j, v)`` is ``gamma[(i + j + |v|_1) mod l]``.
    """
    seq = tuple(gamma.seq if isinstance(gamma, Walk) else gamma)
    Walk(g, seq)
    if seq[0] != seq[-1]:
        raise NotACycle("gamma must be a cycle")
    length = len(seq) - 1
    if length % 2:
        raise OddLengthCycle("gamma must have even length")
    if length == 0:
        raise OddLengthCycle("gamma must be nontrivial")
    periods = [length] * min(d, 2) + [2] * max(0, d - 2)
    dom = {c: seq[sum(c) % length] for c in box([0] * d, [p - 1 for p in periods])}
    return PeriodicConfig(g, periods, dom)


def perturb(base: PeriodicConfig, overrides: Mapping[Cell, str]) -> PeriodicConfig:
    ov = dict(base.overrides)
    ov.update({tuple(c): v for c, v in overrides.items()})
    for v in ov.values():
        if v not in base.graph:
            raise InadmissiblePerturbation(f"{v!r} is not a vertex")
    x = PeriodicConfig(base.graph, base.periods, base.domain, ov)
    ok, viol = x.is_admissible()
    if not ok:
        raise InadmissiblePerturbation(f"adjacency broken between {viol.cell} and {viol.other}")
    return x


# ---------------------------------------------------------------------------
# rectangle boundaries


def boundary_cells(r: int, r2: int, s: int, s2: int) -> list[Cell]:
    """Cells of the boundary of ``[r, s] x [r2, s2]`` read clockwise from ``(r, r2)``.

    The list is closed: it ends with ``(r, r2)`` again (except for a single cell).
    """
    if r == s and r2 == s2:
        return [(r, r2)]
    left = [(r, y) for y in range(r2, s2 + 1)]
    up = [(x, s2) for x in range(r, s + 1)]
    right = [(s, y) for y in range(s2, r2 - 1, -1)]
    down = [(x, r2) for x in range(s, r - 1, -1)]
    out = left + up[1:] + right[1:] + down[1:]
    return out


def boundary_support(r: int, r2: int, s: int, s2: int) -> frozenset[Cell]:
    return frozenset(boundary_cells(r, r2, s, s2))


@dataclass(frozen=True)
class BorderReading:
    left: tuple[str, ...]
    up: tuple[str, ...]
    right: tuple[str, ...]
    down: tuple[str, ...]
    rect: tuple[int, int, int, int]

    @property
    def cycle(self) -> tuple[str, ...]:
        return self.left + self.up[1:] + self.right[1:] + self.down[1:]


def border_reading(p: Pattern) -> BorderReading:
    """Split the boundary of a rectangle into ``p_l, p_u, p_r, p_d`` (clockwise, corners shared)."""
    if p.dim != 2 or not p.cells:
        raise NotARectangleBoundary("need a nonempty two-dimensional pattern")
    (r, r2), (s, s2) = p.bounding_box()
    if p.support != boundary_support(r, r2, s, s2):
        raise NotARectangleBoundary("support is not the boundary of its bounding box")
    v = p.cells
    left = tuple(v[(r, y)] for y in range(r2, s2 + 1))
    up = tuple(v[(x, s2)] for x in range(r, s + 1))
    right = tuple(v[(s, y)] for y in range(s2, r2 - 1, -1))
    down = tuple(v[(x, r2)] for x in range(s, r - 1, -1))
    return BorderReading(left, up, right, down, (r, r2, s, s2))


def pattern_from_border(g: Graph, cycle: Sequence[str], r: int, r2: int, s: int, s2: int) -> Pattern:
    """Write a closed walk clockwise on the boundary of ``[r, s] x [r2, s2]`` starting at ``(r, r2)``."""
    cells = boundary_cells(r, r2, s, s2)
    if len(cycle) != len(cells):
        raise NotARectangleBoundary(f"boundary has {len(cells) - 1} steps but the cycle has {len(cycle) - 1}")
    if cycle[0] != cycle[-1]:
        raise NotACycle("boundary words must be closed")
    return Pattern(g, dict(zip(cells, cycle)), 2)


def ring(n: int, d: int = 2) -> list[Cell]:
    """``B^d(n) minus B^d(n-1)`` (all of ``B^d(0)`` when ``n == 0``)."""
    if n == 0:
        return [(0,) * d]
    inner = set(square_box(n - 1, d))
    return [c for c in square_box(n, d) if c not in inner]


def annulus_cells(outer: int, inner: int, d: int = 2) -> list[Cell]:
    """``B^d(outer) minus B^d(inner)``; ``inner = -1`` gives the full box."""
    if inner < 0:
        return square_box(outer, d)
    hole = set(square_box(inner, d))
    return [c for c in square_box(outer, d) if c not in hole]
