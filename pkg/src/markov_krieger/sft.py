"""Subshifts of finite type: adjacency matrices, primitivity, blocks.

Symbols are stored as integer indices into the ordered state set; the
string names only appear at the API boundary (configs and reports).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EndpointMismatch,
    IdenticalBlocks,
    InadmissibleTransition,
    InvalidAdjacency,
    LengthMismatch,
    NotPrimitiveWithinCap,
    UnknownSymbol,
)


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """A square 0/1 matrix with no zero row or column.

    Parameters
    ----------
    entries : array_like
        The ``d x d`` matrix of zeros and ones, ``d >= 2``.
    states : sequence of str, optional
        Names of the symbols. Defaults to ``"0", "1", ...``.
    """

    entries: np.ndarray
    states: tuple[str, ...] = field(default=())

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidAdjacency("adjacency matrix must be square")
        if arr.shape[0] < 2:
            raise InvalidAdjacency("need at least two states")
        if not np.isin(arr, (0, 1)).all():
            raise InvalidAdjacency("entries must be 0 or 1")
        arr = arr.astype(np.int64)
        if (arr.sum(axis=1) == 0).any() or (arr.sum(axis=0) == 0).any():
            raise InvalidAdjacency("every row and column needs at least one 1")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        states = tuple(str(s) for s in self.states) or tuple(str(i) for i in range(arr.shape[0]))
        if len(states) != arr.shape[0] or len(set(states)) != len(states):
            raise InvalidAdjacency("state names must be distinct and match the matrix size")
        object.__setattr__(self, "states", states)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], states: Sequence[str] | None = None):
        return cls(np.array(rows), tuple(states or ()))

    @classmethod
    def full(cls, d: int) -> "AdjacencyMatrix":
        return cls(np.ones((d, d), dtype=np.int64))

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def allowed(self, s: int, t: int) -> bool:
        return bool(self.entries[s, t])

    def index(self, symbol) -> int:
        """Map a state name or an integer index to the integer index."""
        if isinstance(symbol, (int, np.integer)) and not isinstance(symbol, bool):
            if 0 <= symbol < self.size:
                return int(symbol)
            raise UnknownSymbol(f"symbol index {symbol} out of range")
        try:
            return self.states.index(str(symbol))
        except ValueError:
            raise UnknownSymbol(f"unknown symbol {symbol!r}") from None

    def to_rows(self) -> list[list[int]]:
        return self.entries.tolist()

    def __eq__(self, other):
        if not isinstance(other, AdjacencyMatrix):
            return NotImplemented
        return self.states == other.states and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.states, self.entries.tobytes()))


GOLDEN_MEAN = AdjacencyMatrix.from_rows([[1, 0, 1], [1, 0, 1], [0, 1, 0]])


def _boolean_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a @ b > 0).astype(np.int64)


@dataclass(frozen=True)
class PrimitivityCertificate:
    exponent: int


def primitivity_index(adjacency: AdjacencyMatrix, cap: int | None = None) -> PrimitivityCertificate:
    """Smallest ``M`` with every entry of the Boolean power ``A^M`` positive.

    Parameters
    ----------
    adjacency : AdjacencyMatrix
    cap : int, optional
        Search bound; ``d**2 + 1`` by default, which always suffices for a
        primitive ``d x d`` matrix.

    Raises
    ------
    NotPrimitiveWithinCap
        If no power up to ``cap`` is positive.

    Examples
    --------
    >>> primitivity_index(GOLDEN_MEAN).exponent
    3
    """
    a = adjacency.entries
    d = a.shape[0]
    if cap is None:
        cap = d * d + 1
    if cap < 1:
        raise ValueError("cap must be positive")
    power = a.copy()
    for m in range(1, cap + 1):
        if (power > 0).all():
            return PrimitivityCertificate(m)
        power = _boolean_product(power, a)
    raise NotPrimitiveWithinCap(f"no positive power up to {cap}", cap=cap)


def boolean_power(adjacency: AdjacencyMatrix, m: int) -> np.ndarray:
    power = np.eye(adjacency.size, dtype=np.int64)
    for _ in range(m):
        power = _boolean_product(power, adjacency.entries)
    return power


@dataclass(frozen=True)
class Block:
    """A finite admissible word, stored as integer symbols."""

    symbols: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if not self.symbols:
            raise ValueError("a block needs at least one symbol")

    @property
    def length(self) -> int:
        return len(self.symbols)

    @property
    def first(self) -> int:
        return self.symbols[0]

    @property
    def last(self) -> int:
        return self.symbols[-1]

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def to_list(self) -> list[int]:
        return list(self.symbols)


@dataclass(frozen=True)
class Cylinder:
    """The set of points showing ``block`` at coordinates ``base_index, ...``."""

    base_index: int
    block: Block

    @property
    def stop(self) -> int:
        # one past the last coordinate
        return self.base_index + self.block.length


@dataclass(frozen=True)
class AdmissiblePair:
    first: Block
    second: Block

    @property
    def length(self) -> int:
        return self.first.length

    def swapped(self) -> "AdmissiblePair":
        return AdmissiblePair(self.second, self.first)


def validate_block(adjacency: AdjacencyMatrix, symbols: Iterable) -> Block:
    """Check that consecutive symbols are allowed and return the block.

    Raises
    ------
    InadmissibleTransition
        With the position of the first forbidden transition.
    """
    idx = [adjacency.index(s) for s in symbols]
    if not idx:
        raise ValueError("a block needs at least one symbol")
    for pos in range(len(idx) - 1):
        if not adjacency.allowed(idx[pos], idx[pos + 1]):
            raise InadmissibleTransition(pos)
    return Block(tuple(idx))


def make_admissible_pair(first: Block, second: Block,
                         adjacency: AdjacencyMatrix | None = None) -> AdmissiblePair:
    """Package two blocks as an admissible pair.

    The blocks must have equal length, share the first and the last symbol,
    and differ. Passing ``adjacency`` re-validates both blocks.
    """
    if adjacency is not None:
        first = validate_block(adjacency, first.symbols)
        second = validate_block(adjacency, second.symbols)
    if first.length != second.length:
        raise LengthMismatch(f"lengths {first.length} and {second.length} differ")
    if first.first != second.first or first.last != second.last:
        raise EndpointMismatch("blocks must share first and last symbols")
    if first.symbols == second.symbols:
        raise IdenticalBlocks("the two blocks coincide")
    # equal endpoints and distinct interiors force length >= 3
    return AdmissiblePair(first, second)


def enumerate_blocks(adjacency: AdjacencyMatrix, alpha, beta, length: int) -> list[Block]:
    """All admissible blocks of a given length from ``alpha`` to ``beta``.

    Output is sorted lexicographically by interior symbols; its size equals
    the ``(alpha, beta)`` entry of ``A^(length-1)``.
    """
    if length < 2:
        raise ValueError("length must be at least 2")
    a = adjacency.entries
    start = adjacency.index(alpha)
    end = adjacency.index(beta)
    d = adjacency.size
    # reach[r][s]: can s reach `end` in exactly r steps
    reach = [np.zeros(d, dtype=bool) for _ in range(length)]
    reach[0][end] = True
    for r in range(1, length):
        reach[r] = (a @ reach[r - 1].astype(np.int64)) > 0
    out: list[Block] = []

    def extend(prefix: list[int]):
        remaining = length - len(prefix)
        if remaining == 0:
            out.append(Block(tuple(prefix)))
            return
        last = prefix[-1]
        for s in range(d):
            if a[last, s] and reach[remaining - 1][s]:
                prefix.append(s)
                extend(prefix)
                prefix.pop()

    if reach[length - 1][start]:
        extend([start])
    return out


def concat_blocks(adjacency: AdjacencyMatrix, left: Block, right: Block) -> Block:
    """Concatenate two blocks, re-checking the junction transition."""
    if not adjacency.allowed(left.last, right.first):
        raise InadmissibleTransition(left.length - 1, "junction transition is not allowed")
    return Block(left.symbols + right.symbols)


def is_golden_mean(adjacency: AdjacencyMatrix) -> bool:
    """True when the matrix equals the Golden Mean matrix up to relabeling."""
    if adjacency.size != 3:
        return False
    from itertools import permutations

    g = GOLDEN_MEAN.entries
    a = adjacency.entries
    for perm in permutations(range(3)):
        p = list(perm)
        if np.array_equal(a[np.ix_(p, p)], g):
            return True
    return False
