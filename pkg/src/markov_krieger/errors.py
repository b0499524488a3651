"""Exception hierarchy.

Every error carries a machine-readable ``code`` (the class name by default)
and an optional ``detail`` mapping that the CLI copies into its reports.
"""

from __future__ import annotations


class MarkovKriegerError(Exception):
    """Base class for all library errors."""

    exit_code = 2

    def __init__(self, message: str = "", **detail):
        super().__init__(message or type(self).__name__)
        self.detail = detail

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self), "detail": dict(self.detail)}


# sft_core
class InvalidAdjacency(MarkovKriegerError):
    pass


class NotPrimitiveWithinCap(MarkovKriegerError):
    pass


class UnknownSymbol(MarkovKriegerError):
    pass


class InadmissibleTransition(MarkovKriegerError):
    def __init__(self, position: int, message: str = ""):
        super().__init__(message or f"transition at position {position} is not allowed",
                         position=position)
        self.position = position


class LengthMismatch(MarkovKriegerError):
    pass


class EndpointMismatch(MarkovKriegerError):
    pass


class IdenticalBlocks(MarkovKriegerError):
    pass


# markov_measure
class NotStochastic(MarkovKriegerError):
    pass


class SupportMismatch(MarkovKriegerError):
    pass


class DoeblinViolation(MarkovKriegerError):
    pass


class AnchorNotStationary(MarkovKriegerError):
    pass


class OverlappingRanges(MarkovKriegerError):
    pass


class InvalidSegments(MarkovKriegerError):
    pass


class IndexBeyondRepresentation(MarkovKriegerError):
    """A concrete index reached a region whose boundaries are only known symbolically."""


class InequalityViolated(MarkovKriegerError):
    """A proven bound failed numerically; indicates an implementation bug."""

    exit_code = 4


# equivalence
class AdjacencyMismatch(MarkovKriegerError):
    pass


class InadmissibleWord(MarkovKriegerError):
    pass


# classifier
class TailsUnknown(MarkovKriegerError):
    pass


class AssumptionViolated(MarkovKriegerError):
    pass


# cocycles
class SpacingViolation(MarkovKriegerError):
    def __init__(self, k: int, message: str = ""):
        super().__init__(message or f"spacing constraint fails at k={k}", k=k)
        self.k = k


class LengthViolation(MarkovKriegerError):
    def __init__(self, k: int, message: str = ""):
        super().__init__(message or f"pair length exceeds the bound at k={k}", k=k)
        self.k = k


class PairInvalid(MarkovKriegerError):
    def __init__(self, k: int, message: str = ""):
        super().__init__(message or f"pair {k} is not admissible", k=k)
        self.k = k


class OutsideDomain(MarkovKriegerError):
    pass


class NoneFoundWithinLen(MarkovKriegerError):
    pass


class NotApplicable(MarkovKriegerError):
    pass


class InsufficientWindow(MarkovKriegerError):
    pass


# examples
class InvalidInterleaving(MarkovKriegerError):
    pass


class SeedInvalid(MarkovKriegerError):
    pass


# simulate
class TailsEqual(MarkovKriegerError):
    pass


class DegenerateVariance(MarkovKriegerError):
    pass


# cli
class ConfigError(MarkovKriegerError):
    """The configuration does not match the schema."""
