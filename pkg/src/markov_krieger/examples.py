"""Plateau example measures and their inductive constructor.

An example input consists of ``q``, parameters ``p_1, p_2, ...`` and
interleaved integers ``M_0 < N_1 < M_1 < N_2 < ...``. The transition matrix
at time ``n`` is ``Q_k`` (a template filled with ``p_k``) for
``n in [M_{k-1}, N_k)`` and the base matrix ``Q`` (the same template with
``p = 1/2``) everywhere else.

Four series conditions decide the behaviour of such a measure:

* ``sum_k (p_k - 1/2)**2`` finite: the shift is nonsingular;
* ``sum_k (N_k - M_{k-1}) (p_k - 1/2)**2`` infinite: the measure is not
  equivalent to the stationary ``Q`` chain;
* ``1 < lambda(p_k)**M_{k-1} <= exp(r_k)`` with ``sum r_k`` finite, and
* ``sum_k (M_k - 2 N_k) lambda(p_1)**(-N_k)`` infinite: together these give
  conservativeness.

:func:`inductive_construct` builds inputs meeting all four, with the
minimal integers at every step. After two rounds the integers have more than
``10**100`` digits and are carried as :class:`~markov_krieger.hugeint.SymbolicInt`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath
import numpy as np

from .equivalence import SeriesVerdict
from .errors import InvalidInterleaving, OutsideDomain, SeedInvalid
from .hugeint import (
    HugeInt,
    SymbolicInt,
    SymbolicRatio,
    ceil_power,
    is_concrete,
    lower_bound,
    quadratic_step,
    scaled,
)
from .measure import MarkovMeasure, TransitionSequence
from .sft import GOLDEN_MEAN, AdjacencyMatrix
from .tails import CONVERGES, DIVERGES, INCONCLUSIVE, Certificate, Plateau, PlateauTail

FULLSHIFT2 = "Fullshift2"
GOLDEN = "GoldenMean"
FAMILIES = (FULLSHIFT2, GOLDEN)

HALF = Fraction(1, 2)


def lambda_ratio(p):
    """``p / (1 - p)``; exact for Fractions."""
    if not 0 < p < 1:
        raise OutsideDomain(f"p = {p} is not in (0, 1)")
    return p / (1 - p)


def inverse_lambda(x):
    """The ``p`` with ``lambda_ratio(p) == x``."""
    if x <= 0:
        raise OutsideDomain("lambda must be positive")
    return x / (1 + x)


@dataclass(frozen=True)
class PValue:
    """A parameter ``p`` in (0, 1).

    Stored either exactly (``exact``) or through its log-odds
    ``log(p / (1 - p)) = numerator / denominator`` (``log_odds``), which is
    how the constructor produces it.
    """

    exact: Optional[Fraction] = None
    log_odds: Optional[SymbolicRatio] = None

    def __post_init__(self):
        if (self.exact is None) == (self.log_odds is None):
            raise ValueError("give exactly one of exact and log_odds")
        if self.exact is not None:
            object.__setattr__(self, "exact", Fraction(self.exact))
            if not 0 < self.exact < 1:
                raise OutsideDomain(f"p = {self.exact} is not in (0, 1)")

    @property
    def symbolic(self) -> bool:
        return self.log_odds is not None and not is_concrete(self.log_odds.denominator)

    def log_odds_fraction(self) -> Optional[Fraction]:
        if self.log_odds is not None and not self.symbolic:
            return self.log_odds.as_fraction()
        return None

    def deviation(self) -> float:
        """``p - 1/2`` as a float; 0.0 when it underflows."""
        if self.exact is not None:
            return float(self.exact - HALF)
        return 0.5 * math.tanh(self.log_odds.approx() / 2)

    def value(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return 0.5 + self.deviation()

    def log_lambda(self):
        """``log lambda(p)`` as an mpmath number, or None if symbolic."""
        if self.exact is not None:
            lam = lambda_ratio(self.exact)
            return mpmath.log(mpmath.mpf(lam.numerator) / lam.denominator)
        eps = self.log_odds_fraction()
        if eps is None:
            return None
        return mpmath.mpf(eps.numerator) / eps.denominator

    @property
    def formula(self) -> str:
        if self.exact is not None:
            return str(self.exact)
        return f"inverse_lambda(exp({self.log_odds.formula}))"

    def to_dict(self) -> dict:
        if self.exact is not None:
            return {"exact": str(self.exact)}
        lo = self.log_odds
        den = lo.denominator
        return {"log_odds": {"numerator": str(lo.numerator),
                             "denominator": den.name if isinstance(den, SymbolicInt) else str(den)},
                "approx": repr(self.value())}


@dataclass(frozen=True)
class DecayClass:
    """Declared asymptotic class of a sequence.

    ``kind`` is ``"zero"`` (eventually 0 / 1/2), ``"geometric"`` (rate is the
    ratio), ``"power"`` (rate is the exponent ``a`` in ``k**-a``, or
    ``k**a`` for growth), or ``"bounded"``.
    """

    kind: str
    rate: Optional[float] = None

    def to_dict(self):
        return {"kind": self.kind, "rate": self.rate}


@dataclass(frozen=True)
class ConstructorSeeds:
    p1: Fraction = Fraction(7, 10)
    M0: int = 1
    N1: int = 2
    M1: int = 3
    r_scale: Fraction = Fraction(1)
    r_ratio: Fraction = Fraction(1, 2)

    def r(self, k: int) -> Fraction:
        return self.r_scale * self.r_ratio ** k

    def to_dict(self):
        return {"p1": str(self.p1), "seeds": [self.M0, self.N1, self.M1],
                "r_scale": str(self.r_scale), "r_ratio": str(self.r_ratio)}


@dataclass(frozen=True)
class ExampleInput:
    """Parameters ``q``, ``p_1..p_K``, ``M_0..M_K`` and ``N_1..N_K``.

    Index conventions: ``p[k-1]`` is ``p_k``, ``N[k-1]`` is ``N_k`` and
    ``M[k]`` is ``M_k``.

    Parameters
    ----------
    continues : bool
        Whether more plateaus follow the stored ones. A finite input
        (``False``) uses the base matrix after ``N_K``.
    delta0 : float, optional
        Declared bound with every ``p_k`` in ``(delta0, 1 - delta0)``.
    deviation_decay, length_growth : DecayClass, optional
        Declared classes of ``p_k - 1/2`` and ``N_k - M_{k-1}`` for inputs
        that continue.
    allowance : sequence, optional
        ``r_k`` for the exponent condition, one per stored ``k``.
    allowance_summable : bool
        Whether the full allowance sequence is declared summable.
    seeds, rounds : optional
        Set for constructor outputs.
    """

    q: Fraction
    p: tuple
    M: tuple
    N: tuple
    continues: bool = False
    delta0: Optional[float] = None
    deviation_decay: Optional[DecayClass] = None
    length_growth: Optional[DecayClass] = None
    allowance: Optional[tuple] = None
    allowance_summable: bool = False
    seeds: Optional[ConstructorSeeds] = None
    rounds: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "q", Fraction(self.q))
        object.__setattr__(self, "p", tuple(v if isinstance(v, PValue) else PValue(exact=Fraction(v))
                                            for v in self.p))
        object.__setattr__(self, "M", tuple(self.M))
        object.__setattr__(self, "N", tuple(self.N))
        if not 0 < self.q < 1:
            raise OutsideDomain("q must lie in (0, 1)")
        K = len(self.p)
        if len(self.N) != K or len(self.M) not in (K, K + 1):
            raise InvalidInterleaving(f"need {K} values of N and {K} or {K + 1} of M")
        if not is_concrete(self.M[0]) or self.M[0] < 1:
            raise InvalidInterleaving("M_0 must be a positive integer")
        chain = [self.M[0]]
        for k in range(1, K + 1):
            chain.append(self.N[k - 1])
            if k < len(self.M):
                chain.append(self.M[k])
        for a, b in zip(chain, chain[1:]):
            # symbolic values are ordered by construction
            if is_concrete(a) and is_concrete(b) and not a < b:
                raise InvalidInterleaving(f"sequence not strictly increasing at {a} >= {b}")
        if self.delta0 is not None:
            for k, v in enumerate(self.p, 1):
                x = v.value()
                if not self.delta0 < x < 1 - self.delta0:
                    raise OutsideDomain(f"p_{k} = {x} violates the declared Doeblin bound")

    @property
    def is_constructed(self) -> bool:
        return self.seeds is not None

    @property
    def K(self) -> int:
        return len(self.p)

    @property
    def entry_infimum(self) -> float:
        vals = [float(self.q), 1 - float(self.q), 0.5]
        if self.is_constructed:
            # every constructed p_k lies in (1/2, p_1]
            vals.append(1 - float(self.seeds.p1))
        else:
            for v in self.p:
                vals += [v.value(), 1 - v.value()]
            if self.continues and self.delta0 is not None:
                vals.append(self.delta0)
        return min(vals)

    def to_dict(self) -> dict:
        if self.is_constructed:
            return {"constructor": dict(self.seeds.to_dict(), rounds=self.rounds), "q": str(self.q)}
        out = {"q": str(self.q), "p": [v.to_dict()["exact"] for v in self.p],
               "M": [str(m) for m in self.M], "N": [str(n) for n in self.N],
               "continues": self.continues}
        if self.delta0 is not None:
            out["delta0"] = self.delta0
        if self.deviation_decay is not None:
            out["deviation_decay"] = self.deviation_decay.to_dict()
        if self.length_growth is not None:
            out["length_growth"] = self.length_growth.to_dict()
        if self.allowance is not None:
            out["allowance"] = [str(Fraction(r)) for r in self.allowance]
            out["allowance_summable"] = self.allowance_summable
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExampleInput":
        q = Fraction(data.get("q", "2/5"))
        if "constructor" in data:
            c = data["constructor"]
            M0, N1, M1 = c.get("seeds", [1, 2, 3])
            seeds = ConstructorSeeds(Fraction(c.get("p1", "7/10")), int(M0), int(N1), int(M1),
                                     Fraction(c.get("r_scale", "1")), Fraction(c.get("r_ratio", "1/2")))
            return inductive_construct(int(c.get("rounds", 3)), seeds, q)

        def decay(d):
            return None if d is None else DecayClass(d["kind"], d.get("rate"))

        allowance = data.get("allowance")
        return cls(q, [Fraction(x) for x in data["p"]], [int(m) for m in data["M"]],
                   [int(n) for n in data["N"]], continues=bool(data.get("continues", False)),
                   delta0=data.get("delta0"), deviation_decay=decay(data.get("deviation_decay")),
                   length_growth=decay(data.get("length_growth")),
                   allowance=None if allowance is None else tuple(Fraction(r) for r in allowance),
                   allowance_summable=bool(data.get("allowance_summable", False)))

    def summary(self) -> dict:
        """Human-readable listing of every stored value."""
        def show(x):
            return x.to_dict() if isinstance(x, SymbolicInt) else str(x)
        return {"q": str(self.q), "p": [v.to_dict() for v in self.p],
                "M": [show(m) for m in self.M], "N": [show(n) for n in self.N]}


# ---------------------------------------------------------------------------
# templates and measures


def transition_templates(family: str, p: float, q: float) -> np.ndarray:
    """The plateau matrix for parameter ``p``; ``p = 1/2`` gives the base."""
    if family == FULLSHIFT2:
        return np.array([[p, 1 - p], [q, 1 - q]])
    if family == GOLDEN:
        return np.array([[p, 0.0, 1 - p], [q, 0.0, 1 - q], [0.0, 1.0, 0.0]])
    raise ValueError(f"unknown family {family!r}")


def family_adjacency(family: str) -> AdjacencyMatrix:
    if family == FULLSHIFT2:
        return AdjacencyMatrix.full(2)
    if family == GOLDEN:
        return GOLDEN_MEAN
    raise ValueError(f"unknown family {family!r}")


def build_example_measure(inp: ExampleInput, family: str = FULLSHIFT2) -> MarkovMeasure:
    """Markov measure with ``P_n = Q_k`` on ``[M_{k-1}, N_k)`` and ``Q`` elsewhere.

    Plateaus whose endpoints are concrete are stored; the first plateau
    with a symbolic endpoint sets the frontier beyond which indices cannot
    be resolved. For inputs that continue, the series certificates of the
    plateau tail come from :func:`check_nonsingularity_condition` and
    :func:`check_nonequivalence_condition`.
    """
    q = float(inp.q)
    base = transition_templates(family, 0.5, q)
    plateaus = []
    frontier = None
    for k in range(1, inp.K + 1):
        start, stop = inp.M[k - 1], inp.N[k - 1]
        if not is_concrete(start):
            frontier = lower_bound(start)
            break
        if not is_concrete(stop):
            frontier = start
            break
        plateaus.append(Plateau(start, stop, transition_templates(family, inp.p[k - 1].value(), q)))
    else:
        if inp.continues:
            if len(inp.M) > inp.K:
                nxt = inp.M[inp.K]
                frontier = nxt if is_concrete(nxt) else lower_bound(nxt)
            else:
                frontier = inp.N[-1]
    deviation = weighted = None
    if frontier is not None:
        dv = check_nonsingularity_condition(inp)
        wv = check_nonequivalence_condition(inp)
        deviation = Certificate(dv.status, dv.basis.get("description", ""))
        weighted = Certificate(wv.status, wv.basis.get("description", ""))
    tail = PlateauTail(base, tuple(plateaus), frontier=frontier, deviation=deviation,
                       weighted_deviation=weighted, entry_infimum=inp.entry_infimum,
                       converges_to_base=True,
                       family={"family": family, "input": inp.to_dict()})
    transitions = TransitionSequence(base, 0, (), tail)
    return MarkovMeasure(family_adjacency(family), transitions)


# ---------------------------------------------------------------------------
# series conditions


def _mp_float(x: HugeInt):
    return mpmath.mpf(x) if is_concrete(x) else None


def _concrete_terms(inp: ExampleInput, weighted: bool):
    total = mpmath.mpf(0)
    used = 0
    for k in range(1, inp.K + 1):
        v = inp.p[k - 1]
        if v.symbolic:
            break
        dev = mpmath.mpf(v.deviation()) if v.exact is None else \
            mpmath.mpf((v.exact - HALF).numerator) / (v.exact - HALF).denominator
        term = dev * dev
        if weighted:
            length = None
            if is_concrete(inp.N[k - 1]) and is_concrete(inp.M[k - 1]):
                length = inp.N[k - 1] - inp.M[k - 1]
            if length is None:
                break
            term *= mpmath.mpf(length)
        total += term
        used += 1
    return float(total), used


def _symbolic(status: str, description: str, partial: float, used: int) -> SeriesVerdict:
    return SeriesVerdict(status, partial, used, {"kind": "SymbolicTail", "description": description})


def _numeric(partial: float, used: int, note: str) -> SeriesVerdict:
    return SeriesVerdict(INCONCLUSIVE, partial, used,
                         {"kind": "NumericHeuristic", "description": f"{used} stored terms", "note": note})


def _deviation_series_status(dev: DecayClass, growth: Optional[DecayClass]) -> Optional[tuple]:
    """Status of ``sum len_k dev_k**2`` (``growth=None`` means ``len_k = 1``)."""
    if dev.kind == "zero":
        return CONVERGES, "deviations vanish eventually"
    g = growth or DecayClass("bounded")
    if dev.kind == "geometric":
        rho = float(dev.rate)
        if g.kind in ("bounded", "power"):
            return CONVERGES, f"geometric deviations (ratio {rho}) beat {g.kind} lengths"
        if g.kind == "geometric":
            prod = float(g.rate) * rho * rho
            return (CONVERGES if prod < 1 else DIVERGES), f"length ratio times squared deviation ratio = {prod:.6g}"
    if dev.kind == "power":
        a = float(dev.rate)
        if g.kind == "bounded":
            return (CONVERGES if 2 * a > 1 else DIVERGES), f"terms ~ k^-{2 * a:g}"
        if g.kind == "power":
            e = 2 * a - float(g.rate)
            return (CONVERGES if e > 1 else DIVERGES), f"terms ~ k^-{e:g}"
        if g.kind == "geometric" and float(g.rate) > 1:
            return DIVERGES, "geometric lengths against power deviations"
    return None


def check_nonsingularity_condition(inp: ExampleInput) -> SeriesVerdict:
    """Status of ``sum_k (p_k - 1/2)**2``."""
    partial, used = _concrete_terms(inp, weighted=False)
    if inp.is_constructed:
        # log-odds of p_k is r_{k-1} / (2 M_{k-1}), so |p_k - 1/2| <= r_{k-1} / 8
        ratio = inp.seeds.r_ratio
        return _symbolic(CONVERGES, f"|p_k - 1/2| <= r_(k-1)/8 with r geometric of ratio {ratio}",
                         partial, used)
    if not inp.continues:
        return _symbolic(CONVERGES, "finitely many plateaus", partial, used)
    if inp.deviation_decay is not None:
        got = _deviation_series_status(inp.deviation_decay, None)
        if got is not None:
            return _symbolic(got[0], got[1], partial, used)
    return _numeric(partial, used, "no declared decay class")


def _step_two_floor(inp: ExampleInput) -> Fraction:
    # (N - M)(lambda - 1)^2 >= 1 and lambda <= lambda(p_1) give
    # (N - M)(p - 1/2)^2 = (N - M)(lambda - 1)^2 / (4 (lambda + 1)^2) >= 1 / (4 (lambda(p_1) + 1)^2)
    lam1 = lambda_ratio(inp.seeds.p1)
    return 1 / (4 * (lam1 + 1) ** 2)


def check_nonequivalence_condition(inp: ExampleInput) -> SeriesVerdict:
    """Status of ``sum_k (N_k - M_{k-1}) (p_k - 1/2)**2``."""
    partial, used = _concrete_terms(inp, weighted=True)
    if inp.is_constructed:
        floor = _step_two_floor(inp)
        return _symbolic(DIVERGES, f"every term with k >= 2 is at least {floor}", partial, used)
    if not inp.continues:
        return _symbolic(CONVERGES, "finitely many plateaus", partial, used)
    if inp.deviation_decay is not None:
        got = _deviation_series_status(inp.deviation_decay, inp.length_growth)
        if got is not None:
            return _symbolic(got[0], got[1], partial, used)
    return _numeric(partial, used, "no declared decay or growth class")


@dataclass
class ConservativenessReport:
    eq19_passed: bool
    eq19_trace: list
    eq20: SeriesVerdict
    reasons: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.eq19_passed and self.eq20.status == DIVERGES

    def to_dict(self) -> dict:
        return {"passed": self.passed, "exponent_condition": {"passed": self.eq19_passed,
                                                              "trace": self.eq19_trace},
                "ratio_series": self.eq20.to_dict(), "reasons": list(self.reasons)}


def _exponent_value(inp: ExampleInput, k: int):
    """``M_{k-1} * log lambda(p_k)`` as an exact Fraction, mpf, or None."""
    v = inp.p[k - 1]
    m = inp.M[k - 1]
    if v.log_odds is not None:
        lo = v.log_odds
        if lo.denominator is m:
            return Fraction(lo.numerator)
        if is_concrete(m) and not v.symbolic:
            return m * lo.as_fraction()
        return None
    if not is_concrete(m):
        return None
    return mpmath.mpf(m) * v.log_lambda()


def _allowance(inp: ExampleInput, k: int):
    if inp.is_constructed:
        if k == 1:
            # the seed step has no constraint; it is granted exactly what it uses
            return _exponent_value(inp, 1), "seed"
        return inp.seeds.r(k - 1), f"r_{k - 1}"
    if inp.allowance is None or k > len(inp.allowance):
        return None, "missing"
    return Fraction(inp.allowance[k - 1]), f"r_{k}"


def _as_mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _le(a, b) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a <= b
    return _as_mp(a) <= _as_mp(b)


def _ratio_terms(inp: ExampleInput):
    """Concrete terms ``(M_k - 2 N_k) lambda(p_1)**(-N_k)``."""
    p1 = inp.p[0]
    terms = []
    for k in range(1, inp.K + 1):
        if k >= len(inp.M):
            break
        m, n = inp.M[k], inp.N[k - 1]
        if not (is_concrete(m) and is_concrete(n)):
            break
        if p1.exact is not None and n < 5000:
            lam = lambda_ratio(p1.exact)
            val = Fraction(m - 2 * n) * Fraction(lam.denominator ** n, lam.numerator ** n)
            terms.append((k, val))
        else:
            terms.append((k, mpmath.mpf(m - 2 * n) * mpmath.exp(-n * p1.log_lambda())))
    return terms


def _is_step_three(inp: ExampleInput, k: int) -> bool:
    m = inp.M[k]
    lam1 = lambda_ratio(inp.seeds.p1)
    return isinstance(m, SymbolicInt) and m.kind == "ceil_power" and m.operands[0] is inp.N[k - 1] \
        and m.base == lam1


def check_conservativeness_conditions(inp: ExampleInput) -> ConservativenessReport:
    """Check ``1 < lambda(p_k)**M_{k-1} <= exp(r_k)`` per stored ``k`` and
    the divergence of ``sum (M_k - 2N_k) lambda(p_1)**(-N_k)``."""
    trace = []
    ok = True
    reasons = []
    for k in range(1, inp.K + 1):
        val = _exponent_value(inp, k)
        allow, label = _allowance(inp, k)
        entry = {"k": k, "allowance": label}
        if val is None or allow is None:
            entry["status"] = "undetermined"
            ok = False
        else:
            positive = val > 0
            within = _le(val, allow)
            entry.update(exponent=float(val), bound=float(allow), status="pass" if positive and within else "fail")
            ok &= positive and within
        trace.append(entry)
    if inp.continues and not (inp.is_constructed or inp.allowance_summable):
        ok = False
        reasons.append("allowance sequence not declared summable")

    terms = _ratio_terms(inp)
    partial = float(sum(_as_mp(t) for _, t in terms))
    if inp.is_constructed:
        concrete_ok = all(t >= 1 for k, t in terms if k >= 2)
        symbolic_ok = all(_is_step_three(inp, k) for k in range(len(terms) + 1, min(inp.K, len(inp.M) - 1) + 1))
        if concrete_ok and symbolic_ok:
            eq20 = _symbolic(DIVERGES, "every term with k >= 2 is at least 1", partial, len(terms))
        else:
            eq20 = _numeric(partial, len(terms), "a step-three term fell below 1")
    elif not inp.continues:
        eq20 = _symbolic(CONVERGES, "finite sum", partial, len(terms))
    else:
        eq20 = _numeric(partial, len(terms), "no declared class for the ratio series")
    if eq20.status != DIVERGES:
        reasons.append("ratio series not shown to diverge")
    if not ok:
        reasons.append("exponent condition not met")
    return ConservativenessReport(ok, trace, eq20, reasons)


# ---------------------------------------------------------------------------
# constructor


def _validate_seeds(seeds: ConstructorSeeds):
    if not HALF < seeds.p1 < 1:
        raise SeedInvalid("p_1 must lie in (1/2, 1)")
    if not 1 <= seeds.M0 < seeds.N1 < seeds.M1:
        raise SeedInvalid("seeds must satisfy 1 <= M_0 < N_1 < M_1")
    ratio, scale = Fraction(seeds.r_ratio), Fraction(seeds.r_scale)
    if scale <= 0 or not 0 < ratio < 1 or ratio.numerator != 1:
        raise SeedInvalid("r_k = scale * ratio**k needs scale > 0 and ratio = 1/m with m >= 2")
    if (2 * ratio.denominator / scale).denominator != 1:
        raise SeedInvalid("2 / r_k must be an integer for every k")
    # the minimal-N closed form needs every log-odds at most 1; the
    # first one is the largest and every later p must stay below p_1
    first = seeds.r(1) / (2 * seeds.M1)
    if first > 1 or math.exp(float(first)) >= float(lambda_ratio(seeds.p1)):
        raise SeedInvalid("r_1 / (2 M_1) is too large")


def inductive_construct(rounds: int = 3, seeds: Optional[ConstructorSeeds] = None,
                        q=Fraction(2, 5)) -> ExampleInput:
    """Run ``rounds`` steps of the three-step construction.

    Round ``k`` (``k = 1..rounds``) takes ``M_k`` and produces

    1. ``p_{k+1}`` with log-odds ``r_k / (2 M_k)``, so that
       ``lambda(p_{k+1})**M_k = exp(r_k / 2)``;
    2. the least ``N_{k+1}`` with ``(N_{k+1} - M_k)(1 - lambda(p_{k+1}))**2 >= 1``,
       which is ``M_k + X**2 - X + 1`` for ``X = 2 M_k / r_k``;
    3. the least ``M_{k+1}`` with ``(M_{k+1} - 2N_{k+1}) lambda(p_1)**(-N_{k+1}) >= 1``,
       which is ``2 N_{k+1} + ceil(lambda(p_1)**N_{k+1})``.

    Parameters
    ----------
    rounds : int
    seeds : ConstructorSeeds, optional
        Defaults to ``p_1 = 7/10``, ``(M_0, N_1, M_1) = (1, 2, 3)`` and
        ``r_k = 2**-k``.
    q : Fraction
    """
    seeds = seeds or ConstructorSeeds()
    _validate_seeds(seeds)
    if rounds < 0:
        raise SeedInvalid("rounds must be nonnegative")
    lam1 = lambda_ratio(seeds.p1)
    p = [PValue(exact=seeds.p1)]
    M: list = [seeds.M0, seeds.M1]
    N: list = [seeds.N1]
    for k in range(1, rounds + 1):
        r = seeds.r(k)
        m = M[k]
        p.append(PValue(log_odds=SymbolicRatio(r / 2, m)))
        x = scaled(f"X_{k}", 2 / r, m)
        n_next = quadratic_step(f"N_{k + 1}", m, x)
        N.append(n_next)
        M.append(ceil_power(f"M_{k + 1}", lam1, n_next))
    return ExampleInput(q, tuple(p), tuple(M), tuple(N), continues=True,
                        delta0=None, seeds=seeds, rounds=rounds)


def power_decay_input(plateaus: int = 60, amplitude: float = 0.3, exponent: float = 0.6,
                      base_length: int = 40, growth: float = 0.4, gap: int = 10,
                      q=Fraction(2, 5)) -> ExampleInput:
    """A moderate family with ``p_k = 1/2 + amplitude * k**-exponent``.

    Plateau ``k`` has length ``base_length * ceil(k**growth)`` and plateaus
    are separated by ``gap`` base-matrix steps. With the defaults the shift
    is nonsingular (``2 * 0.6 > 1``) while the weighted series diverges
    (``2 * 0.6 - 0.4 <= 1``), and every index stays at a size where float
    arithmetic resolves the deviations. Used by the CLT and drift probes.
    """
    p, M, N = [], [1], []
    for k in range(1, plateaus + 1):
        p.append(Fraction(0.5 + amplitude * k ** -exponent).limit_denominator(10 ** 12))
        N.append(M[-1] + base_length * math.ceil(k ** growth))
        M.append(N[-1] + gap)
    return ExampleInput(q, tuple(p), tuple(M), tuple(N), continues=True,
                        delta0=min(0.5 - amplitude, float(q), 1 - float(q)) / 2,
                        deviation_decay=DecayClass("power", exponent),
                        length_growth=DecayClass("power", growth))
