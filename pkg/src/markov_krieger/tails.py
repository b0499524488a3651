"""Descriptors for the right tail of a transition sequence.

The left tail is always one exact matrix. The right tail is one of

* :class:`ConstantTail` -- a single matrix forever;
* :class:`PlateauTail` -- a base matrix interrupted by plateaus of other
  matrices, possibly infinitely many of them (then a ``frontier`` marks
  where concrete knowledge stops, and series facts come as certificates);
* :class:`AlternatingTail` -- cycles through several matrices on blocks of
  growing length, so no limit exists;
* :class:`OpaqueTail` -- an arbitrary rule, about which nothing is decided.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import IndexBeyondRepresentation, InvalidSegments
from .linalg import frozen, matrices_equal

CONVERGES = "Converges"
DIVERGES = "Diverges"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Certificate:
    """A declared fact about an infinite series attached to a tail family."""

    status: str
    description: str

    def __post_init__(self):
        if self.status not in (CONVERGES, DIVERGES, INCONCLUSIVE):
            raise ValueError(f"bad certificate status {self.status!r}")

    def to_dict(self):
        return {"status": self.status, "description": self.description}


@dataclass(frozen=True, eq=False)
class ConstantTail:
    matrix: np.ndarray
    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "matrix", frozen(self.matrix))

    def matrix_at(self, n: int, start: int) -> np.ndarray:
        return self.matrix

    def run_at(self, n: int, start: int):
        return start, None, self.matrix

    def concrete_matrices(self):
        return [self.matrix]

    def same_as(self, other) -> bool:
        return isinstance(other, ConstantTail) and matrices_equal(self.matrix, other.matrix)


@dataclass(frozen=True, eq=False)
class Plateau:
    start: int
    stop: int
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", frozen(self.matrix))
        if self.stop <= self.start:
            raise InvalidSegments(f"empty plateau [{self.start}, {self.stop})")


@dataclass(frozen=True, eq=False)
class PlateauTail:
    """Base matrix with plateaus ``[start, stop)`` carrying other matrices.

    Parameters
    ----------
    base : array_like
        The matrix used off the plateaus.
    plateaus : sequence of Plateau
        Concrete plateaus in increasing order.
    frontier : int, optional
        If set, the plateau list continues beyond what is stored and no
        index ``>= frontier`` can be resolved. ``None`` means the stored
        plateaus are all there is.
    deviation : Certificate, optional
        Status of ``sum_k ||Q_k - base||^2`` over all plateaus.
    weighted_deviation : Certificate, optional
        Status of ``sum_k len_k ||Q_k - base||^2``.
    entry_infimum : float, optional
        Certified lower bound on allowed entries of every plateau matrix,
        stored or not.
    converges_to_base : bool
        Whether the plateau matrices are declared to tend to ``base``.
    family : dict, optional
        Free-form metadata describing where the tail came from.
    """

    base: np.ndarray
    plateaus: tuple = ()
    frontier: Optional[int] = None
    deviation: Optional[Certificate] = None
    weighted_deviation: Optional[Certificate] = None
    entry_infimum: Optional[float] = None
    converges_to_base: bool = True
    family: Optional[dict] = None
    kind = "plateau"

    def __post_init__(self):
        object.__setattr__(self, "base", frozen(self.base))
        plats = tuple(self.plateaus)
        for a, b in zip(plats, plats[1:]):
            if b.start < a.stop:
                raise InvalidSegments("plateaus must be ordered and disjoint")
        if self.frontier is not None and plats and plats[-1].stop > self.frontier:
            raise InvalidSegments("stored plateaus extend past the frontier")
        object.__setattr__(self, "plateaus", plats)
        object.__setattr__(self, "_starts", [p.start for p in plats])

    @property
    def finite(self) -> bool:
        return self.frontier is None

    def _check(self, n: int):
        if self.frontier is not None and n >= self.frontier:
            raise IndexBeyondRepresentation(
                f"index {n} lies beyond the representable frontier", index=str(n))

    def _locate(self, n: int) -> int:
        # index of the last plateau starting at or before n, or -1
        import bisect

        return bisect.bisect_right(self._starts, n) - 1

    def matrix_at(self, n: int, start: int) -> np.ndarray:
        self._check(n)
        k = self._locate(n)
        if k >= 0 and n < self.plateaus[k].stop:
            return self.plateaus[k].matrix
        return self.base

    def run_at(self, n: int, start: int):
        """The maximal stored piece ``[a, b)`` containing ``n``; ``b`` may be None."""
        self._check(n)
        k = self._locate(n)
        if k >= 0 and n < self.plateaus[k].stop:
            p = self.plateaus[k]
            return p.start, p.stop, p.matrix
        a = self.plateaus[k].stop if k >= 0 else start
        if k + 1 < len(self.plateaus):
            b = self.plateaus[k + 1].start
        else:
            b = self.frontier
        return a, b, self.base

    def concrete_matrices(self):
        return [self.base] + [p.matrix for p in self.plateaus]

    def same_as(self, other) -> bool:
        if not isinstance(other, PlateauTail):
            return False
        if self.frontier != other.frontier or len(self.plateaus) != len(other.plateaus):
            return False
        if not matrices_equal(self.base, other.base):
            return False
        for a, b in zip(self.plateaus, other.plateaus):
            if a.start != b.start or a.stop != b.stop or not matrices_equal(a.matrix, b.matrix):
                return False
        if self.frontier is not None:
            # beyond the frontier only the family description can tell them apart
            return self.family is not None and self.family == other.family
        return True


@dataclass(frozen=True, eq=False)
class AlternatingTail:
    """Cycle through ``matrices`` on consecutive blocks.

    Block ``m`` (counting from 0) has length ``first_length + m * increment``
    and uses ``matrices[m % len(matrices)]``.
    """

    matrices: tuple
    first_length: int = 1
    increment: int = 1
    kind = "alternating"

    def __post_init__(self):
        mats = tuple(frozen(m) for m in self.matrices)
        if len(mats) < 2:
            raise InvalidSegments("an alternating tail needs at least two matrices")
        if all(matrices_equal(mats[0], m) for m in mats[1:]):
            raise InvalidSegments("alternating tail matrices must not all coincide")
        if self.first_length < 1 or self.increment < 0:
            raise InvalidSegments("block lengths must be positive")
        object.__setattr__(self, "matrices", mats)

    def _cumulative(self, m: int) -> int:
        # total length of the first m blocks
        return m * self.first_length + self.increment * m * (m - 1) // 2

    def _block_of(self, offset: int) -> int:
        lo, hi = 0, 1
        while self._cumulative(hi) <= offset:
            hi *= 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._cumulative(mid) <= offset:
                lo = mid
            else:
                hi = mid
        return lo

    def run_at(self, n: int, start: int):
        m = self._block_of(n - start)
        a = start + self._cumulative(m)
        b = start + self._cumulative(m + 1)
        return a, b, self.matrices[m % len(self.matrices)]

    def matrix_at(self, n: int, start: int) -> np.ndarray:
        return self.run_at(n, start)[2]

    def concrete_matrices(self):
        return list(self.matrices)

    def same_as(self, other) -> bool:
        return (isinstance(other, AlternatingTail)
                and self.first_length == other.first_length
                and self.increment == other.increment
                and len(self.matrices) == len(other.matrices)
                and all(matrices_equal(a, b) for a, b in zip(self.matrices, other.matrices)))


@dataclass(frozen=True, eq=False)
class OpaqueTail:
    """An arbitrary rule ``n -> matrix``; tail questions stay undecided.

    ``infimum`` is a caller-certified lower bound on allowed entries and is
    required for the Doeblin check. ``name`` identifies the rule for
    serialisation.
    """

    rule: Callable[[int], np.ndarray]
    infimum: Optional[float] = None
    name: str = "opaque"
    kind = "opaque"
    _cache: dict = field(default_factory=dict, repr=False)

    def matrix_at(self, n: int, start: int) -> np.ndarray:
        hit = self._cache.get(n)
        if hit is None:
            hit = frozen(self.rule(n))
            self._cache[n] = hit
        return hit

    def run_at(self, n: int, start: int):
        return n, n + 1, self.matrix_at(n, start)

    def concrete_matrices(self):
        return []

    def same_as(self, other) -> bool:
        return self is other
