"""Independent re-check of constructor output.

Every round ``k`` must satisfy three inequalities, each with the minimal
integer:

1. ``1 < lambda(p_{k+1})**M_k <= exp(r_k)``;
2. ``(N_{k+1} - M_k)(1 - lambda(p_{k+1}))**2 >= 1`` while ``N_{k+1} - 1`` fails;
3. ``(M_{k+1} - 2N_{k+1}) lambda(p_1)**(-N_{k+1}) >= 1`` while ``M_{k+1} - 1`` fails.

Concrete values are checked with outward-rounded interval arithmetic
(recomputing ``p`` and ``lambda`` from scratch) or exact integers. Symbolic
values are checked structurally: the audit confirms that each one was built
from the expected operands, and then relies on polynomial certificates that are
themselves verified here with exact rational arithmetic.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import iv

from .examples import ExampleInput, lambda_ratio
from .hugeint import SymbolicInt, is_concrete, lower_bound

_IV_LOCK = threading.Lock()


# ---------------------------------------------------------------------------
# polynomial certificates for the closed form of N


def _poly_mul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def closed_form_certificates() -> dict:
    """Verify the facts behind ``N = M + X**2 - X + 1`` for ``x = 1/X <= 1``.

    With ``g(x) = (e**x - 1)/x`` we have ``1 + x/2 <= g(x) <= 1 + x/2 + x**2/3``
    on ``(0, 1]`` (the upper bound because ``sum_{j>=2} 1/(j+1)! = e - 5/2 < 1/3``).
    Then

    * ``(X**2 - X + 1)(e**x - 1)**2 = (1 - x + x**2) g**2`` is at least
      ``(1 - x + x**2)(1 + x/2)**2``, a polynomial with constant term 1 and
      nonnegative higher coefficients;
    * ``(X**2 - X)(e**x - 1)**2 = (1 - x) g**2`` is at most
      ``(1 - x)(1 + x/2 + x**2/3)**2``, with constant term 1 and negative
      higher coefficients.
    """
    e_upper = _e_upper_bound()
    tail_ok = e_upper - Fraction(5, 2) < Fraction(1, 3)
    low = _poly_mul([Fraction(1), Fraction(-1), Fraction(1)],
                    _poly_mul([Fraction(1), Fraction(1, 2)], [Fraction(1), Fraction(1, 2)]))
    g_up = [Fraction(1), Fraction(1, 2), Fraction(1, 3)]
    high = _poly_mul([Fraction(1), Fraction(-1)], _poly_mul(g_up, g_up))
    lower_ok = low[0] == 1 and all(c >= 0 for c in low[1:]) and any(c > 0 for c in low[1:])
    upper_ok = high[0] == 1 and all(c <= 0 for c in high[1:]) and any(c < 0 for c in high[1:])
    return {"tail_bound": tail_ok, "sufficient": lower_ok, "minimal": upper_ok,
            "lower_poly": [str(c) for c in low], "upper_poly": [str(c) for c in high],
            "holds": tail_ok and lower_ok and upper_ok}


def _e_upper_bound(terms: int = 12) -> Fraction:
    # sum_{j<n} 1/j! + 2/n! exceeds e since the remainder is below 2/n!
    s, term = Fraction(0), Fraction(1)
    for j in range(terms):
        s += term
        term /= j + 1
    return s + 2 * term


# ---------------------------------------------------------------------------
# interval helpers


@contextmanager
def _precision(bits: int):
    # iv precision is global state in mpmath
    with _IV_LOCK:
        old = iv.prec
        iv.prec = bits
        try:
            yield
        finally:
            iv.prec = old


def _iv_frac(x: Fraction):
    x = Fraction(x)
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def _lambda_interval(log_odds: Fraction):
    # rebuild p from the log-odds, then lambda from p
    eps = _iv_frac(log_odds)
    p = 1 / (1 + iv.exp(-eps))
    return p / (1 - p)


@dataclass
class InequalityCheck:
    name: str
    holds: bool
    minimal: bool | None
    method: str
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "holds": self.holds, "minimal": self.minimal,
                "method": self.method, "detail": dict(self.detail)}


@dataclass
class RoundAudit:
    k: int
    checks: list

    @property
    def holds(self) -> bool:
        return all(c.holds and c.minimal is not False for c in self.checks)

    def to_dict(self):
        return {"k": self.k, "holds": self.holds, "checks": [c.to_dict() for c in self.checks]}


def _check_exponent(inp: ExampleInput, k: int) -> InequalityCheck:
    m = inp.M[k]
    pv = inp.p[k]
    r = inp.seeds.r(k)
    lo = pv.log_odds
    if lo is None:
        return InequalityCheck("exponent", False, None, "missing", {"reason": "p not given by log-odds"})
    if is_concrete(m) and not pv.symbolic:
        eps = lo.as_fraction()
        with _precision(2 * max(m.bit_length(), 64) + 160):
            lam = _lambda_interval(eps)
            val = iv.mpf(m) * iv.log(lam)
            holds = bool(val.a > 0) and bool(val.b <= _iv_frac(r).a)
            value = float(val.mid)
        return InequalityCheck("exponent", holds, None, "interval",
                               {"value": value, "bound": float(r)})
    # symbolic: log lambda = numerator / M_k exactly, so the power is exp(numerator)
    structural = lo.denominator is m and 0 < Fraction(lo.numerator) <= r
    return InequalityCheck("exponent", structural, None, "structural",
                           {"value": float(lo.numerator), "bound": float(r)})


def _check_plateau_length(inp: ExampleInput, k: int, cert: dict) -> InequalityCheck:
    m, n = inp.M[k], inp.N[k]
    pv = inp.p[k]
    if is_concrete(m) and is_concrete(n) and not pv.symbolic:
        eps = pv.log_odds.as_fraction()
        bits = 2 * max(n.bit_length(), 64) + 160
        with _precision(bits):
            lam = _lambda_interval(eps)
            gap = (1 - lam) ** 2
            at = iv.mpf(n - m) * gap
            below = iv.mpf(n - 1 - m) * gap
            holds = bool(at.a >= 1)
            minimal = bool(below.b < 1)
            detail = {"value_minus_one": float((at - 1).mid), "previous_minus_one": float((below - 1).mid),
                      "precision_bits": bits}
        return InequalityCheck("plateau_length", holds, minimal, "interval", detail)
    # symbolic: N = M + X^2 - X + 1 with X = 1/eps an integer >= 1
    ok = (isinstance(n, SymbolicInt) and n.kind == "quadratic_step" and n.operands[0] is m)
    if ok:
        x = n.operands[1]
        eps_num = Fraction(pv.log_odds.numerator)
        if isinstance(x, SymbolicInt):
            ok = x.kind == "scaled" and x.operands[0] is m and x.factor * eps_num == 1
        else:
            ok = is_concrete(m) and Fraction(x) == Fraction(m) / eps_num
        ok = ok and pv.log_odds.denominator is m and lower_bound(x) >= 1
    return InequalityCheck("plateau_length", ok and cert["sufficient"] and cert["tail_bound"],
                           ok and cert["minimal"] and cert["tail_bound"], "structural",
                           {"certificate": "closed_form"})


def _check_ratio(inp: ExampleInput, k: int) -> InequalityCheck:
    m_next, n = inp.M[k + 1], inp.N[k]
    lam1 = lambda_ratio(inp.seeds.p1)
    a, b = lam1.numerator, lam1.denominator
    if is_concrete(m_next) and is_concrete(n):
        an, bn = a ** n, b ** n
        holds = (m_next - 2 * n) * bn >= an
        minimal = (m_next - 1 - 2 * n) * bn < an
        return InequalityCheck("ratio", holds, minimal, "exact")
    ok = (isinstance(m_next, SymbolicInt) and m_next.kind == "ceil_power"
          and m_next.operands[0] is n and m_next.base == lam1)
    # ceil(y) >= y and ceil(y) - 1 < y
    return InequalityCheck("ratio", ok, ok, "structural", {"certificate": "ceiling"})


def audit_round(inp: ExampleInput, k: int, cert: dict | None = None) -> RoundAudit:
    """Check round ``k`` (which produced ``p_{k+1}``, ``N_{k+1}``, ``M_{k+1}``)."""
    if not inp.is_constructed:
        raise ValueError("only constructor output can be audited")
    if not 1 <= k <= inp.rounds:
        raise ValueError(f"round {k} outside 1..{inp.rounds}")
    cert = cert or closed_form_certificates()
    return RoundAudit(k, [_check_exponent(inp, k), _check_plateau_length(inp, k, cert),
                          _check_ratio(inp, k)])


def audit_construction(inp: ExampleInput) -> list[RoundAudit]:
    if not inp.is_constructed:
        raise ValueError("only constructor output can be audited")
    cert = closed_form_certificates()
    return [audit_round(inp, k, cert) for k in range(1, inp.rounds + 1)]
