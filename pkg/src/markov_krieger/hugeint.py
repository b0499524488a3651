"""Integers too large to write down.

The example constructor produces integers such as ``2N + ceil((7/3)**N)``
with ``N`` around ``10**101``. Such a value is stored as a
:class:`SymbolicInt`: its defining formula, the operands it was built from,
a certified concrete lower bound (capped at ``10**LOWER_CAP_DIGITS``) and a
rough tower-of-tens estimate for display. Comparisons against ordinary ints
succeed whenever the lower bound decides them and raise otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import IndexBeyondRepresentation

LOWER_CAP_DIGITS = 1000
LOWER_CAP = 10 ** LOWER_CAP_DIGITS
# concrete powers are expanded only below this many decimal digits,
# which stays under the default int-to-str limit of 4300
CONCRETE_DIGITS = 4000


@dataclass(frozen=True, eq=False)
class SymbolicInt:
    """A positive integer known through its construction.

    Parameters
    ----------
    name : str
        Label used in formulas of later values, e.g. ``"M_3"``.
    kind : str
        ``"scaled"`` (``factor * a``), ``"quadratic_step"``
        (``a + x**2 - x + 1``) or ``"ceil_power"`` (``2a + ceil(base**a)``).
    operands : tuple
        The ints or SymbolicInts the value is built from.
    lower : int
        Certified lower bound.
    tower : (int, float)
        ``(h, t)`` meaning roughly ``10^10^...^t`` with ``h`` tens.
    factor, base : Fraction, optional
        Parameters of the ``scaled`` and ``ceil_power`` kinds.
    """

    name: str
    kind: str
    operands: tuple
    lower: int
    tower: tuple
    factor: Optional[Fraction] = None
    base: Optional[Fraction] = None

    @property
    def formula(self) -> str:
        ops = [_label(o) for o in self.operands]
        if self.kind == "scaled":
            return f"{self.factor}*{ops[0]}"
        if self.kind == "quadratic_step":
            return f"{ops[0]} + {ops[1]}^2 - {ops[1]} + 1"
        if self.kind == "ceil_power":
            return f"2*{ops[0]} + ceil(({self.base})^{ops[0]})"
        return self.kind

    def magnitude(self) -> str:
        h, t = self.tower
        if h > 3:
            return f"(10^)x{h} {t:.4g}"
        return "10^" * h + f"{t:.4g}"

    # comparisons with ordinary integers through the certified lower bound
    def _undecided(self, other):
        raise IndexBeyondRepresentation(
            f"cannot compare {self.name} with {other}: only {self.name} >= 10^"
            f"{len(str(self.lower)) - 1} is certified", name=self.name)

    def __gt__(self, other):
        if isinstance(other, int):
            if other < self.lower:
                return True
            self._undecided(other)
        return NotImplemented

    def __ge__(self, other):
        if isinstance(other, int):
            if other <= self.lower:
                return True
            self._undecided(other)
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, int):
            if other <= self.lower:
                return False
            self._undecided(other)
        return NotImplemented

    def __le__(self, other):
        if isinstance(other, int):
            if other < self.lower:
                return False
            self._undecided(other)
        return NotImplemented

    def __int__(self):
        raise IndexBeyondRepresentation(f"{self.name} has no concrete representation",
                                        name=self.name)

    def __repr__(self):
        return f"SymbolicInt({self.name} = {self.formula} ~ {self.magnitude()})"

    def to_dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind, "formula": self.formula,
               "operands": [_label(o) if isinstance(o, SymbolicInt) else str(o) for o in self.operands],
               "lower_bound_digits": len(str(self.lower)), "magnitude": self.magnitude()}
        if self.factor is not None:
            out["factor"] = str(self.factor)
        if self.base is not None:
            out["base"] = str(self.base)
        return out


HugeInt = Union[int, SymbolicInt]


def _label(x) -> str:
    return x.name if isinstance(x, SymbolicInt) else str(x)


def is_concrete(x) -> bool:
    return isinstance(x, int)


def lower_bound(x: HugeInt) -> int:
    return x if isinstance(x, int) else x.lower


def tower_of(x: HugeInt) -> tuple:
    if isinstance(x, SymbolicInt):
        return x.tower
    if x < 10 ** 300:
        return (0, float(x))
    # math.log10 accepts ints of any size
    return (1, math.log10(x))


def _cap(v: int) -> int:
    return min(v, LOWER_CAP)


def scaled(name: str, factor: Fraction, a: HugeInt) -> HugeInt:
    """``factor * a`` for a positive integer-valued product."""
    factor = Fraction(factor)
    if isinstance(a, int):
        v = factor * a
        if v.denominator != 1:
            raise ValueError("scaled value is not an integer")
        return int(v)
    if factor.denominator != 1:
        raise ValueError("symbolic scaling needs an integer factor")
    h, t = a.tower
    tower = (h, t + math.log10(factor)) if h == 1 else (h, t)
    return SymbolicInt(name, "scaled", (a,), _cap(int(factor) * a.lower), tower, factor=factor)


def quadratic_step(name: str, a: HugeInt, x: HugeInt) -> HugeInt:
    """``a + x**2 - x + 1``."""
    if isinstance(a, int) and isinstance(x, int):
        return a + x * x - x + 1
    xl = min(lower_bound(x), 10 ** (LOWER_CAP_DIGITS // 2 + 1))
    lower = _cap(lower_bound(a) + xl * xl - xl + 1)
    h, t = tower_of(x)
    tower = (h, 2 * t) if h == 1 else (h, t)
    return SymbolicInt(name, "quadratic_step", (a, x), lower, tower)


def ceil_power(name: str, base: Fraction, n: HugeInt) -> HugeInt:
    """``2n + ceil(base**n)`` for a rational ``base > 1``."""
    base = Fraction(base)
    if base <= 1:
        raise ValueError("base must exceed 1")
    digits_per_step = math.log10(base)
    # int/float comparison is exact and never converts a huge n
    if isinstance(n, int) and n <= CONCRETE_DIGITS / digits_per_step:
        num, den = base.numerator ** n, base.denominator ** n
        return 2 * n + (-(-num // den))
    # certified lower bound: find a small exponent already past the cap
    nl = lower_bound(n)
    probe = min(nl, int((LOWER_CAP_DIGITS + 10) / digits_per_step) + 1)
    num, den = base.numerator ** probe, base.denominator ** probe
    lower = _cap(2 * nl + (-(-num // den)))
    h, t = tower_of(n)
    if h == 0:
        tower = (1, t * digits_per_step)
    elif h == 1:
        tower = (2, t + math.log10(digits_per_step))
    else:
        tower = (h + 1, t)
    return SymbolicInt(name, "ceil_power", (n,), lower, tower, base=base)


@dataclass(frozen=True)
class SymbolicRatio:
    """The positive number ``numerator / denominator`` with a huge denominator."""

    numerator: Fraction
    denominator: HugeInt

    def as_fraction(self) -> Fraction:
        if isinstance(self.denominator, int):
            return Fraction(self.numerator) / self.denominator
        raise IndexBeyondRepresentation("ratio has a symbolic denominator")

    def approx(self) -> float:
        if isinstance(self.denominator, int):
            return float(Fraction(self.numerator) / self.denominator)
        return 0.0

    @property
    def formula(self) -> str:
        return f"{self.numerator}/{_label(self.denominator)}"
