"""Computational toolkit for graph homshifts on Z^d.

Square groups of finite graphs, square-move decompositions, pattern filling,
edge cocycles and their obstructions, and the explicit two-dimensional
constructions (rectangles, annuli, strip gluing, box extension).
"""

from __future__ import annotations

__version__ = "0.1.0"
SCHEMA_VERSION = "1"

from .errors import HomshiftError  # noqa: E402
from .graphs import Graph  # noqa: E402
from .patterns import Pattern, PeriodicConfig  # noqa: E402
from .walks import Walk  # noqa: E402

__all__ = ["Graph", "HomshiftError", "Pattern", "PeriodicConfig", "SCHEMA_VERSION", "Walk", "__version__"]
