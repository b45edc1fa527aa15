"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`HomshiftError`,
so callers (notably the CLI) can separate input problems from bugs.
"""

from __future__ import annotations


class HomshiftError(Exception):
    """Base class for library errors."""


class ParseError(HomshiftError):
    pass


class NotConnected(HomshiftError):
    pass


class AlreadyBipartite(HomshiftError):
    pass


class NotSpanningTree(HomshiftError):
    pass


class NotAWalk(HomshiftError):
    pass


class EndpointMismatch(HomshiftError):
    pass


class TrivialCycle(HomshiftError):
    pass


class NotACycle(HomshiftError):
    pass


class OddLengthCycle(HomshiftError):
    pass


class UnknownGenerator(HomshiftError):
    pass


class InadmissibleInput(HomshiftError):
    pass


class NotAnEdge(HomshiftError):
    pass


class NotARectangleBoundary(HomshiftError):
    pass


class InadmissiblePerturbation(HomshiftError):
    pass


class DimensionMismatch(HomshiftError):
    pass


class NotGibbsEquivalent(HomshiftError):
    pass


class InadmissibleBoundary(HomshiftError):
    pass


class TraceInvalid(HomshiftError):
    pass


class NotOneMove(HomshiftError):
    pass


class LengthOrder(HomshiftError):
    pass


class LengthMismatch(HomshiftError):
    pass


class BasepointMismatch(HomshiftError):
    pass


class DiagonalInadmissible(HomshiftError):
    pass


class RaggedWalk(HomshiftError):
    pass


class Backtracking(HomshiftError):
    pass


class HypothesisFails(HomshiftError):
    pass


class BudgetExhausted(HomshiftError):
    pass


class PrerequisiteMissing(HomshiftError):
    pass


class DisagreeOnCore(HomshiftError):
    pass
