"""Named graphs used throughout the examples and tests."""

from __future__ import annotations

import re
from pathlib import Path

from .errors import ParseError
from .graphs import Graph


def complete_graph(n: int) -> Graph:
    vs = [str(i) for i in range(n)]
    return Graph(vs, [(u, v) for i, u in enumerate(vs) for v in vs[i + 1:]], name=f"K{n}")


def cycle_graph(n: int) -> Graph:
    vs = [str(i) for i in range(n)]
    return Graph(vs, [(vs[i], vs[(i + 1) % n]) for i in range(n)], name=f"C{n}")


def path_graph(n: int) -> Graph:
    """Path with ``n`` vertices."""
    vs = [str(i) for i in range(n)]
    return Graph(vs, [(vs[i], vs[i + 1]) for i in range(n - 1)], name=f"P{n}")


def hard_core() -> Graph:
    return Graph(["0", "1"], [("0", "0"), ("0", "1")], name="hard-core")


def iceberg(m: int) -> Graph:
    """Vertices ``i`` with ``1 <= |i| <= m``; ``i ~ j`` iff ``i * j < -1``."""
    if m < 2:
        raise ValueError("iceberg model needs M > 1")
    ints = [i for i in range(-m, m + 1) if i != 0]
    edges = [(str(i), str(j)) for i in ints for j in ints if i < j and i * j < -1]
    return Graph([str(i) for i in ints], edges, name=f"iceberg({m})")


def two_point() -> Graph:
    """Single edge between 0 and 1."""
    return Graph(["0", "1"], [("0", "1")], name="two-point")


# Transcribed from the drawing of the graph: vertex positions are listed for
# reference, edges follow the line segments of the picture.
KENKATABAMI_POSITIONS = {
    "omega": (0.0, 0.0),
    "mu1": (1.0, 1.72),
    "mu2": (-1.0, 1.72),
    "mu3": (-2.0, 0.0),
    "mu4": (-1.0, -1.72),
    "mu5": (1.0, -1.72),
    "mu6": (2.0, 0.0),
    "gamma1": (-3.0, 1.72),
    "gamma2": (0.0, -3.44),
    "gamma3": (3.0, 1.72),
    "delta1": (0.0, 3.44),
    "delta2": (-3.0, -1.72),
    "delta3": (3.0, -1.72),
    "eps1": (0.0, 5.88),
    "eps2": (-5.225, -2.945),
    "eps3": (5.225, -2.945),
}

KENKATABAMI_EDGES = [
    ("mu3", "omega"), ("omega", "mu6"),
    ("mu3", "gamma1"), ("gamma1", "mu2"),
    ("mu6", "gamma3"), ("gamma3", "mu1"),
    ("mu2", "omega"), ("omega", "mu1"),
    ("mu4", "omega"), ("omega", "mu5"),
    ("mu4", "gamma2"), ("gamma2", "mu5"),
    ("mu2", "delta1"), ("delta1", "mu1"),
    ("gamma1", "eps1"), ("eps1", "delta1"),
    ("eps1", "gamma3"),
    ("mu3", "delta2"), ("delta2", "mu4"),
    ("mu6", "delta3"), ("delta3", "mu5"),
    ("delta3", "eps3"), ("eps3", "gamma2"),
    ("eps3", "gamma3"),
    ("delta2", "eps2"), ("eps2", "gamma2"),
    ("eps2", "gamma1"),
]

# The outer hexagon eps1 gamma1 eps2 gamma2 eps3 gamma3.
KENKATABAMI_EXTERIOR = ("eps1", "gamma1", "eps2", "gamma2", "eps3", "gamma3", "eps1")


def kenkatabami(loop: bool = False) -> Graph:
    edges = list(KENKATABAMI_EDGES)
    if loop:
        edges.append(("omega", "omega"))
    return Graph(KENKATABAMI_POSITIONS, edges, name="kenkatabami+loop" if loop else "kenkatabami")


_FIXED = {
    "K3": lambda: complete_graph(3),
    "K4": lambda: complete_graph(4),
    "C4": lambda: cycle_graph(4),
    "C5": lambda: cycle_graph(5),
    "C6": lambda: cycle_graph(6),
    "hard-core": hard_core,
    "kenkatabami": kenkatabami,
    "kenkatabami+loop": lambda: kenkatabami(loop=True),
    "two-point": two_point,
}

BUILTIN_NAMES = tuple(_FIXED) + ("iceberg(M)",)


def builtin(name: str) -> Graph:
    if name in _FIXED:
        return _FIXED[name]()
    m = re.fullmatch(r"iceberg\((\d+)\)", name)
    if m:
        return iceberg(int(m.group(1)))
    raise ParseError(f"unknown builtin graph {name!r}; known: {', '.join(BUILTIN_NAMES)}")


def load_graph(ref: str) -> Graph:
    """Resolve ``builtin:NAME``, a bare builtin name, or a path to an edge-list file."""
    if ref.startswith("builtin:"):
        return builtin(ref[len("builtin:"):])
    path = Path(ref)
    if path.is_file():
        return Graph.parse(path.read_text(), name=path.stem)
    try:
        return builtin(ref)
    except ParseError:
        raise ParseError(f"{ref!r} is neither a graph file nor a builtin name") from None
