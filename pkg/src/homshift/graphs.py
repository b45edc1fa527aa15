"""Finite undirected graphs with optional self-loops, and graphs derived from them.

Vertices are strings and every iteration order is lexicographic, so all
algorithms built on top of this module are deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import AlreadyBipartite, NotConnected, NotSpanningTree, ParseError

STRIP_SEP = "|"
COVER_SEP = ":"
# Characters that may not appear in user-supplied vertex names. The first two
# are reserved for derived graph names, the comma for walk literals.
FORBIDDEN_CHARS = frozenset(STRIP_SEP + COVER_SEP + ",#\"'")


def _edge_key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


class Graph:
    """An immutable finite undirected graph.

    Self-loops are edges ``(v, v)``. Edges are stored as sorted pairs.
    """

    __slots__ = ("vertices", "edges", "name", "_adj", "_index", "_hash")

    def __init__(self, vertices: Iterable[str] = (), edges: Iterable[Sequence[str]] = (), name: str | None = None):
        vs = set(str(v) for v in vertices)
        es = set()
        for e in edges:
            if len(e) != 2:
                raise ValueError(f"edge must have two endpoints: {e!r}")
            u, v = str(e[0]), str(e[1])
            vs.add(u)
            vs.add(v)
            es.add(_edge_key(u, v))
        self.vertices: tuple[str, ...] = tuple(sorted(vs))
        self.edges: tuple[tuple[str, str], ...] = tuple(sorted(es))
        self.name = name
        adj: dict[str, list[str]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            if u != v:
                adj[v].append(u)
        self._adj: dict[str, tuple[str, ...]] = {v: tuple(sorted(n)) for v, n in adj.items()}
        self._index = {v: i for i, v in enumerate(self.vertices)}
        self._hash = hash((self.vertices, self.edges))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self is other or (self.vertices == other.vertices and self.edges == other.edges)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<Graph{label} |V|={len(self.vertices)} |E|={len(self.edges)}>"

    def __contains__(self, v: object) -> bool:
        return v in self._adj

    def neighbors(self, v: str) -> tuple[str, ...]:
        return self._adj[v]

    def adjacent(self, u: str, v: str) -> bool:
        nb = self._adj.get(u)
        return nb is not None and v in nb

    def has_loop(self, v: str) -> bool:
        return v in self._adj[v]

    def index(self, v: str) -> int:
        return self._index[v]

    @property
    def adjacency(self) -> Mapping[str, tuple[str, ...]]:
        return self._adj

    def adjacency_matrix(self) -> list[list[int]]:
        """0/1 adjacency matrix in vertex order; a self-loop puts 1 on the diagonal."""
        n = len(self.vertices)
        m = [[0] * n for _ in range(n)]
        for u, v in self.edges:
            i, j = self._index[u], self._index[v]
            m[i][j] = m[j][i] = 1
        return m

    def relabel(self, name: str | None) -> "Graph":
        return Graph(self.vertices, self.edges, name=name)

    # text format

    @classmethod
    def parse(cls, text: str, name: str | None = None) -> "Graph":
        """Parse the edge-list text format (``u v`` per line, ``vertex u`` for isolated vertices)."""
        vertices: list[str] = []
        edges: list[tuple[str, str]] = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "vertex":
                if len(parts) != 2:
                    raise ParseError(f"line {lineno}: expected 'vertex NAME'")
                vertices.append(_check_name(parts[1], lineno))
            elif len(parts) == 2:
                edges.append((_check_name(parts[0], lineno), _check_name(parts[1], lineno)))
            else:
                raise ParseError(f"line {lineno}: expected 'u v' or 'vertex u', got {raw!r}")
        return cls(vertices, edges, name=name)

    def serialize(self) -> str:
        touched = {v for e in self.edges for v in e}
        lines = [f"vertex {v}" for v in self.vertices if v not in touched]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(sorted(lines)) + "\n"


def _check_name(name: str, lineno: int) -> str:
    if name == "." or any(ch in FORBIDDEN_CHARS for ch in name):
        raise ParseError(f"line {lineno}: illegal vertex name {name!r}")
    return name


# ---------------------------------------------------------------------------
# structural predicates


def _bfs(g: Graph, root: str) -> tuple[dict[str, str | None], dict[str, int]]:
    parent: dict[str, str | None] = {root: None}
    depth = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if w not in parent:
                parent[w] = u
                depth[w] = depth[u] + 1
                queue.append(w)
    return parent, depth


def is_connected(g: Graph) -> bool:
    if not g.vertices:
        return True
    parent, _ = _bfs(g, g.vertices[0])
    return len(parent) == len(g.vertices)


def _require_connected(g: Graph) -> None:
    if not is_connected(g):
        raise NotConnected(f"graph {g.name or ''} is not connected".replace("  ", " "))


@dataclass(frozen=True)
class BipartiteCertificate:
    """Either a proper 2-coloring (``coloring``) or an odd closed walk (``odd_cycle``)."""

    coloring: Mapping[str, int] | None = None
    odd_cycle: tuple[str, ...] | None = None

    @property
    def bipartite(self) -> bool:
        return self.coloring is not None

    def __bool__(self) -> bool:
        return self.bipartite

    def check(self, g: Graph) -> bool:
        if self.coloring is not None:
            return all(self.coloring[u] != self.coloring[v] for u, v in g.edges)
        c = self.odd_cycle
        return (
            c is not None
            and len(c) % 2 == 0  # odd number of steps
            and c[0] == c[-1]
            and all(g.adjacent(a, b) for a, b in zip(c, c[1:]))
        )


def _tree_path(parent: Mapping[str, str | None], v: str) -> list[str]:
    path = [v]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])  # type: ignore[arg-type]
    path.reverse()
    return path


def is_bipartite(g: Graph) -> BipartiteCertificate:
    _require_connected(g)
    if not g.vertices:
        return BipartiteCertificate(coloring={})
    root = g.vertices[0]
    parent, depth = _bfs(g, root)
    color = {v: d % 2 for v, d in depth.items()}
    for u, v in g.edges:
        if color[u] == color[v]:
            # root -> u, edge u v, v -> root: odd length since depths share parity
            walk = _tree_path(parent, u) + _tree_path(parent, v)[::-1]
            return BipartiteCertificate(odd_cycle=tuple(walk))
    return BipartiteCertificate(coloring=color)


def cover_vertex(v: str, layer: int) -> str:
    return f"{v}{COVER_SEP}{layer}"


def bipartite_cover(g: Graph) -> tuple[Graph, dict[str, str]]:
    """The double cover ``G x {0,1}`` with parity-swapping edges, and its projection."""
    _require_connected(g)
    if is_bipartite(g).bipartite:
        raise AlreadyBipartite("the bipartite cover of a bipartite graph is disconnected")
    edges = []
    for u, v in g.edges:
        edges.append((cover_vertex(u, 0), cover_vertex(v, 1)))
        edges.append((cover_vertex(u, 1), cover_vertex(v, 0)))
    projection = {cover_vertex(v, i): v for v in g.vertices for i in (0, 1)}
    name = f"cover({g.name})" if g.name else None
    return Graph(projection, edges, name=name), projection


def walks_of_length(g: Graph, length: int) -> Iterator[tuple[str, ...]]:
    """All walks with ``length`` steps, in lexicographic order."""
    if length < 0:
        return
    stack: list[tuple[str, ...]] = [(v,) for v in reversed(g.vertices)]
    while stack:
        w = stack.pop()
        if len(w) == length + 1:
            yield w
            continue
        for nb in reversed(g.neighbors(w[-1])):
            stack.append(w + (nb,))


def strip_vertex(walk: Sequence[str]) -> str:
    return STRIP_SEP.join(walk)


def strip_walk(vertex: str) -> tuple[str, ...]:
    return tuple(vertex.split(STRIP_SEP))


def strip_graph(g: Graph, n: int) -> Graph:
    """Graph of walks of length ``n - 1`` on ``g`` under pointwise adjacency."""
    if n < 1:
        raise ValueError("strip width must be positive")
    walks = list(walks_of_length(g, n - 1))
    walk_set = set(walks)
    edges = []
    for p in walks:
        for q in product(*(g.neighbors(v) for v in p)):
            if q in walk_set and p <= q:
                edges.append((strip_vertex(p), strip_vertex(q)))
    name = f"strip({g.name},{n})" if g.name else None
    return Graph((strip_vertex(w) for w in walks), edges, name=name)


# ---------------------------------------------------------------------------
# spanning trees


@dataclass(frozen=True)
class Tree:
    """A spanning tree of ``graph`` rooted at ``root``."""

    graph: Graph
    root: str
    edges: frozenset[tuple[str, str]]
    parent: Mapping[str, str | None] = field(compare=False, repr=False)

    @classmethod
    def from_edges(cls, g: Graph, root: str, edges: Iterable[Sequence[str]]) -> "Tree":
        keys = frozenset(_edge_key(str(e[0]), str(e[1])) for e in edges)
        for u, v in keys:
            if u == v or not g.adjacent(u, v):
                raise NotSpanningTree(f"({u},{v}) is not a non-loop edge of the graph")
        if root not in g:
            raise NotSpanningTree(f"root {root!r} is not a vertex")
        if len(keys) != len(g.vertices) - 1:
            raise NotSpanningTree("a spanning tree has |V| - 1 edges")
        tg = Graph(g.vertices, keys)
        parent, _ = _bfs(tg, root)
        if len(parent) != len(g.vertices):
            raise NotSpanningTree("edges do not connect every vertex")
        return cls(g, root, keys, parent)

    def contains_edge(self, u: str, v: str) -> bool:
        return _edge_key(u, v) in self.edges

    def path_from_root(self, v: str) -> tuple[str, ...]:
        """The unique simple tree walk from the root to ``v``."""
        return tuple(_tree_path(self.parent, v))

    def path_to_root(self, v: str) -> tuple[str, ...]:
        return self.path_from_root(v)[::-1]

    def rerooted(self, root: str) -> "Tree":
        return Tree.from_edges(self.graph, root, self.edges)


def spanning_tree(g: Graph, a: str | None = None) -> Tree:
    """BFS spanning tree from ``a`` (default: first vertex), lexicographic tie-breaking."""
    _require_connected(g)
    if a is None:
        a = g.vertices[0]
    if a not in g:
        raise NotSpanningTree(f"root {a!r} is not a vertex")
    parent, _ = _bfs(g, a)
    edges = frozenset(_edge_key(v, p) for v, p in parent.items() if p is not None)
    return Tree(g, a, edges, parent)


# ---------------------------------------------------------------------------
# squares


def square_tuples(g: Graph) -> list[tuple[str, str, str, str, str]]:
    """All non-backtracking closed walks of length 4, as sorted vertex tuples."""
    out = []
    for s0 in g.vertices:
        for s1 in g.neighbors(s0):
            for s2 in g.neighbors(s1):
                if s2 == s0:
                    continue
                for s3 in g.neighbors(s2):
                    if s3 != s1 and g.adjacent(s3, s0):
                        out.append((s0, s1, s2, s3, s0))
    out.sort()
    return out


def squares_by_base(g: Graph) -> dict[str, list[tuple[str, ...]]]:
    table: dict[str, list[tuple[str, ...]]] = {v: [] for v in g.vertices}
    for s in square_tuples(g):
        table[s[0]].append(s)
    return table


def square_orbit_representatives(g: Graph) -> list[tuple[str, ...]]:
    """One square per orbit of rotation and reversal: the lexicographically least member."""
    seen = set()
    reps = []
    for s in square_tuples(g):
        body = s[:4]
        orbit = set()
        for seq in (body, body[::-1]):
            for r in range(4):
                rot = seq[r:] + seq[:r]
                orbit.add(rot + rot[:1])
        rep = min(orbit)
        if rep not in seen:
            seen.add(rep)
            reps.append(rep)
    reps.sort()
    return reps


def enumerate_squares(g: Graph) -> list:
    """All squares of ``g`` as :class:`~homshift.walks.Walk` objects, canonically ordered."""
    from .walks import Walk

    return [Walk(g, s, check=False) for s in square_tuples(g)]
