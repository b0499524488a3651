"""Hellinger-type coefficients and the series tests built on them.

For two Markov measures ``nu`` (matrices ``P_n``) and ``mu`` (``Q_n``) on
the same SFT the coefficient at ``n`` is

    sum_{s,u,v,t} ( sqrt(Phat_{-n}(u,s) P_n(v,t)) - sqrt(Qhat_{-n}(u,s) Q_n(v,t)) )**2

and ``nu << mu`` exactly when these coefficients are summable. A finite
program cannot sum an infinite series, so every test here returns a
:class:`SeriesVerdict` whose ``Converges``/``Diverges`` status always comes
from the declared tail structure, never from the size of a partial sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import AdjacencyMismatch, InadmissibleWord, InequalityViolated
from .linalg import as_stochastic, matrices_equal, matrix_key
from .measure import MarkovMeasure, homogeneous_measure
from .tails import (
    CONVERGES,
    DIVERGES,
    INCONCLUSIVE,
    AlternatingTail,
    ConstantTail,
    OpaqueTail,
    PlateauTail,
)

DEFAULT_HORIZON = 10_000
LIMIT_TOL = 1e-10


def log_bracket(a: float, b: float) -> tuple[float, float]:
    """Bounds ``(a - b)/a <= log(a/b) <= (a - b)/b`` for positive ``a, b``.

    Both inequalities are strict unless ``a == b``.
    """
    if a <= 0 or b <= 0:
        raise ValueError("log_bracket needs positive arguments")
    return (a - b) / a, (a - b) / b


@dataclass(frozen=True)
class CoefficientTerm:
    n: int
    value: float


@dataclass
class SeriesVerdict:
    """Outcome of a truncated nonnegative series test.

    ``basis`` records where the status came from: ``SymbolicTail`` when the
    declared tails decide it, ``NumericHeuristic`` when only the partial sums
    are available (then the status is always ``Inconclusive``).
    """

    status: str
    partial_sum: float
    terms_used: int
    basis: dict
    residuals: dict = field(default_factory=dict)
    reason: Optional[str] = None

    def to_dict(self) -> dict:
        out = {"status": self.status, "partial_sum": self.partial_sum,
               "terms_used": self.terms_used, "basis": dict(self.basis),
               "residuals": dict(self.residuals)}
        if self.reason is not None:
            out["reason"] = self.reason
        return out


@dataclass(frozen=True)
class LikelihoodState:
    n: int
    density: float
    increment: float


def _check_same(nu: MarkovMeasure, mu: MarkovMeasure):
    if nu.adjacency != mu.adjacency:
        raise AdjacencyMismatch("measures live on different SFTs")


@lru_cache(maxsize=4096)
def _cached_term(left_nu, right_nu, left_mu, right_mu) -> float:
    return float(_components(left_nu.arr, right_nu.arr, left_mu.arr, right_mu.arr).sum())


def _components(left_nu, right_nu, left_mu, right_mu) -> np.ndarray:
    # index order (s, u, v, t); the left factors are indexed (u, s)
    a = np.sqrt(np.einsum("us,vt->suvt", left_nu, right_nu))
    b = np.sqrt(np.einsum("us,vt->suvt", left_mu, right_mu))
    return (a - b) ** 2


class _Hashable:
    """Wrap an array so it can pass through ``lru_cache``."""

    __slots__ = ("arr", "key")

    def __init__(self, arr):
        self.arr = np.asarray(arr)
        self.key = matrix_key(self.arr)

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        return self.key == other.key

    def __array__(self, dtype=None, copy=None):
        return self.arr if dtype is None else self.arr.astype(dtype)


def dn2_components(nu: MarkovMeasure, mu: MarkovMeasure, n: int) -> np.ndarray:
    """All squared differences at index ``n`` as an array indexed ``[s, u, v, t]``."""
    _check_same(nu, mu)
    return _components(nu.reverse_matrix(-n), nu.matrix(n), mu.reverse_matrix(-n), mu.matrix(n))


def dn2_term(nu: MarkovMeasure, mu: MarkovMeasure, n: int) -> CoefficientTerm:
    """The ``n``-th coefficient of the equivalence series.

    Examples
    --------
    >>> from markov_krieger.sft import AdjacencyMatrix
    >>> m = homogeneous_measure(AdjacencyMatrix.full(2), [[.5, .5], [.4, .6]])
    >>> dn2_term(m, m, 3).value
    0.0
    """
    if n < 1:
        raise ValueError("n must be positive")
    value = float(dn2_components(nu, mu, n).sum())
    d = nu.size
    if value < 0 or value > 2 * d * d + 1e-12:
        raise InequalityViolated("coefficient outside [0, 2 d^2]", n=n, value=value)
    return CoefficientTerm(n, value)


def _shift_term(mu: MarkovMeasure, n: int) -> float:
    # coefficient comparing mu with its shift: factors at n against n + 1
    return _cached_term(
        _Hashable(mu.reverse_matrix(-n)), _Hashable(mu.matrix(n)),
        _Hashable(mu.reverse_matrix(-(n + 1))), _Hashable(mu.matrix(n + 1)))


def _pair_term(nu: MarkovMeasure, mu: MarkovMeasure, n: int) -> float:
    return _cached_term(
        _Hashable(nu.reverse_matrix(-n)), _Hashable(nu.matrix(n)),
        _Hashable(mu.reverse_matrix(-n)), _Hashable(mu.matrix(n)))


def _run_end(measure: MarkovMeasure, n: int) -> float:
    b = measure._run(n)[1]
    return float("inf") if b is None else b


def _pair_partial_sum(nu: MarkovMeasure, mu: MarkovMeasure, horizon: int) -> float:
    """Sum of the first ``horizon`` pair coefficients, one evaluation per run.

    Once ``-n`` is inside both left tails the reverse factors are constant,
    so the coefficient only changes where a forward run ends.
    """
    settled = -min(nu.left_cutoff, mu.left_cutoff) + 1
    total, n = 0.0, 1
    while n <= horizon:
        term = _pair_term(nu, mu, n)
        if n >= settled:
            end = int(min(_run_end(nu, n), _run_end(mu, n), horizon + 1))
        else:
            end = n + 1
        total += term * (end - n)
        n = end
    return total


def _shift_partial_sum(mu: MarkovMeasure, horizon: int) -> float:
    settled = -mu.left_cutoff + 1
    total, n = 0.0, 1
    while n <= horizon:
        term = _shift_term(mu, n)
        end = n + 1
        if n >= settled:
            b = _run_end(mu, n)
            if n + 1 < b:
                end = int(min(b - 1, horizon + 1))
        total += term * (end - n)
        n = end
    return total


def _same_structure(nu: MarkovMeasure, mu: MarkovMeasure) -> bool:
    if nu is mu:
        return True
    a, b = nu.transitions, mu.transitions
    if a.left_cutoff != b.left_cutoff or len(a.segments) != len(b.segments):
        return False
    if not matrices_equal(a.left_tail, b.left_tail):
        return False
    for s, t in zip(a.segments, b.segments):
        if s.start != t.start or s.stop != t.stop or not matrices_equal(s.matrix, t.matrix):
            return False
    return a.right_tail.same_as(b.right_tail)


def _bhattacharyya(a, b) -> float:
    return float(np.sqrt(np.asarray(a) * np.asarray(b)).sum())


def _declared_limit(tail):
    if isinstance(tail, ConstantTail):
        return tail.matrix
    if isinstance(tail, PlateauTail) and (tail.finite or tail.converges_to_base):
        return tail.base
    return None


def _right_tail_status(ta, tb) -> tuple[str, str]:
    """Status of ``sum_n H(P_n, Q_n)`` from the two declared right tails."""
    if ta.same_as(tb):
        return CONVERGES, "right tails coincide"
    if isinstance(ta, OpaqueTail) or isinstance(tb, OpaqueTail):
        return INCONCLUSIVE, "opaque right tail"
    if isinstance(tb, PlateauTail) and not isinstance(ta, PlateauTail):
        ta, tb = tb, ta
    if isinstance(tb, AlternatingTail) and not isinstance(ta, AlternatingTail):
        ta, tb = tb, ta
    if isinstance(ta, ConstantTail) and isinstance(tb, ConstantTail):
        return DIVERGES, "distinct constant right tails give a constant positive term"
    if isinstance(ta, PlateauTail) and isinstance(tb, ConstantTail):
        if not matrices_equal(ta.base, tb.matrix):
            return DIVERGES, "plateau base differs from the constant tail and recurs forever"
        if ta.finite:
            return CONVERGES, "finitely many plateaus over a matching base"
        cert = ta.weighted_deviation
        if cert is None:
            return INCONCLUSIVE, "plateau family has no weighted deviation certificate"
        return cert.status, f"plateau family: {cert.description}"
    if isinstance(ta, PlateauTail) and isinstance(tb, PlateauTail):
        if ta.finite and tb.finite:
            if matrices_equal(ta.base, tb.base):
                return CONVERGES, "finitely many differing plateaus over a common base"
            return DIVERGES, "distinct bases recur forever"
        return INCONCLUSIVE, "two infinite plateau families"
    if isinstance(ta, AlternatingTail):
        if isinstance(tb, ConstantTail) or (isinstance(tb, PlateauTail) and tb.finite):
            return DIVERGES, "alternating tail differs from the other limit on infinitely many blocks"
        return INCONCLUSIVE, "alternating tail against a non-constant tail"
    return INCONCLUSIVE, "no rule for this pair of tails"


def _representable(horizon: int, *measures: MarkovMeasure) -> int:
    # partial sums read P_{n+1}, so stop two short of any stored frontier
    for m in measures:
        frontier = getattr(m.transitions.right_tail, "frontier", None)
        if frontier is not None:
            horizon = min(horizon, max(0, int(frontier) - 2))
    return horizon


def _numeric_basis(horizon):
    return {"kind": "NumericHeuristic", "description": f"partial sums up to n={horizon}"}


def equivalence_test(nu: MarkovMeasure, mu: MarkovMeasure, horizon: int = DEFAULT_HORIZON,
                     tail_policy: str = "declared") -> SeriesVerdict:
    """Decide whether ``nu`` and ``mu`` are equivalent.

    Parameters
    ----------
    horizon : int
        Number of terms in the reported partial sum, clipped below any
        stored frontier of a right tail.
    tail_policy : {"declared", "none"}
        ``"declared"`` reads the status from the tail descriptors;
        ``"none"`` only reports partial sums and returns ``Inconclusive``.
    """
    _check_same(nu, mu)
    horizon = _representable(horizon, nu, mu)
    total = _pair_partial_sum(nu, mu, horizon)
    if tail_policy == "none":
        return SeriesVerdict(INCONCLUSIVE, total, horizon, _numeric_basis(horizon))
    if _same_structure(nu, mu):
        return SeriesVerdict(CONVERGES, total, horizon,
                             {"kind": "SymbolicTail", "description": "identical measures"})
    left_nu, left_mu = nu.transitions.left_tail, mu.transitions.left_tail
    if not matrices_equal(left_nu, left_mu):
        # left factors settle to the two reversed left tails; each term is at
        # least 2d(d - BC) with BC their Bhattacharyya overlap
        far = -min(nu.left_cutoff, mu.left_cutoff) + 2
        bc = _bhattacharyya(nu.reverse_matrix(-far), mu.reverse_matrix(-far))
        d = nu.size
        return SeriesVerdict(DIVERGES, total, horizon, {
            "kind": "SymbolicTail",
            "description": f"left tails differ; terms bounded below by {2 * d * (d - bc):.6g}"})
    status, why = _right_tail_status(nu.transitions.right_tail, mu.transitions.right_tail)
    basis = {"kind": "SymbolicTail", "description": why} if status != INCONCLUSIVE \
        else dict(_numeric_basis(horizon), note=why)
    return SeriesVerdict(status, total, horizon, basis)


def _residuals(mu: MarkovMeasure, horizon: int) -> dict:
    lo = max(1, horizon // 2)
    right = left = 0.0
    for n in range(lo, horizon + 1):
        right = max(right, float(np.max(np.abs(mu.matrix(n + 1) - mu.matrix(n)))))
        left = max(left, float(np.max(np.abs(mu.reverse_matrix(-n) - mu.reverse_matrix(-(n + 1))))))
    return {"window": [lo, horizon], "forward": right, "reverse": left}


def nonsingularity_test(mu: MarkovMeasure, horizon: int = DEFAULT_HORIZON,
                        tail_policy: str = "declared") -> SeriesVerdict:
    """Decide whether the shift is nonsingular for ``mu``.

    The residuals report ``max |P_{n+1} - P_n|`` and the matching reverse
    quantity over the second half of the horizon; both must tend to zero
    for a nonsingular shift.
    """
    horizon = _representable(horizon, mu)
    total = _shift_partial_sum(mu, horizon)
    res = _residuals(mu, min(horizon, 2000))
    if tail_policy == "none":
        return SeriesVerdict(INCONCLUSIVE, total, horizon, _numeric_basis(horizon), res)
    tail = mu.transitions.right_tail
    if isinstance(tail, ConstantTail):
        status, why = CONVERGES, "constant right tail: terms vanish eventually"
    elif isinstance(tail, PlateauTail):
        if tail.finite:
            status, why = CONVERGES, "finitely many plateaus"
        elif tail.deviation is None:
            status, why = INCONCLUSIVE, "plateau family has no deviation certificate"
        else:
            # a plateau contributes two jumps of size ||Q_k - base||
            status, why = tail.deviation.status, f"plateau family: {tail.deviation.description}"
    elif isinstance(tail, AlternatingTail):
        status, why = DIVERGES, "consecutive distinct matrices recur on every cycle"
    else:
        status, why = INCONCLUSIVE, "opaque right tail"
    basis = {"kind": "SymbolicTail", "description": why} if status != INCONCLUSIVE \
        else dict(_numeric_basis(horizon), note=why)
    return SeriesVerdict(status, total, horizon, basis, res)


def homogeneous_equivalence_test(mu: MarkovMeasure, Q, horizon: int = DEFAULT_HORIZON,
                                 tail_policy: str = "declared") -> SeriesVerdict:
    """Decide whether ``mu`` is equivalent to the stationary measure of ``Q``.

    The declared limits of ``P_n`` at both ends are compared with ``Q``
    first (tolerance 1e-10); a mismatch returns ``Diverges`` with reason
    ``LimitMismatch`` and no partial sum.
    """
    Q = as_stochastic(Q, mu.adjacency, label="Q")
    limits = {"left": mu.transitions.left_tail, "right": _declared_limit(mu.transitions.right_tail)}
    if not matrices_equal(limits["left"], Q, LIMIT_TOL):
        return SeriesVerdict(DIVERGES, 0.0, 0, {"kind": "SymbolicTail",
                             "description": "left limit differs from Q"}, reason="LimitMismatch")
    tail = mu.transitions.right_tail
    if isinstance(tail, AlternatingTail):
        return SeriesVerdict(DIVERGES, 0.0, 0, {"kind": "SymbolicTail",
                             "description": "right tail has no limit"}, reason="LimitMismatch")
    if limits["right"] is None:
        return SeriesVerdict(INCONCLUSIVE, 0.0, 0, dict(_numeric_basis(0), note="right limit unknown"),
                             reason="TailsUnknown")
    if not matrices_equal(limits["right"], Q, LIMIT_TOL):
        return SeriesVerdict(DIVERGES, 0.0, 0, {"kind": "SymbolicTail",
                             "description": "right limit differs from Q"}, reason="LimitMismatch")
    return equivalence_test(mu, homogeneous_measure(mu.adjacency, Q), horizon, tail_policy)


def _word_indices(measure: MarkovMeasure, word) -> list[int]:
    idx = [measure.adjacency.index(s) for s in word]
    for k in range(len(idx) - 1):
        if not measure.adjacency.allowed(idx[k], idx[k + 1]):
            raise InadmissibleWord(f"transition at offset {k} is not allowed", position=k)
    return idx


def likelihood_density(nu: MarkovMeasure, mu: MarkovMeasure, word: Sequence, n: int) -> float:
    """``d nu_n / d mu_n`` on the cylinder of ``word`` placed on ``[-n, n]``."""
    _check_same(nu, mu)
    x = _word_indices(nu, word)
    if len(x) != 2 * n + 1:
        raise InadmissibleWord("word length must be 2n + 1")
    value = float(nu.coordinate_distribution(-n)[x[0]] / mu.coordinate_distribution(-n)[x[0]])
    for k in range(2 * n):
        i = -n + k
        value *= float(nu.matrix(i)[x[k], x[k + 1]] / mu.matrix(i)[x[k], x[k + 1]])
    return value


def kls_likelihood(nu: MarkovMeasure, mu: MarkovMeasure, word: Sequence) -> LikelihoodState:
    """Density ``m_n`` and increment ``M_n = m_n / m_{n-1}`` at a word on ``[-n, n]``.

    The increment is evaluated from its closed form, a ratio of one reverse
    and one forward transition per measure, not by dividing densities.
    """
    x = _word_indices(nu, word)
    if len(x) % 2 == 0 or len(x) < 3:
        raise InadmissibleWord("word must have odd length at least 3")
    n = (len(x) - 1) // 2
    density = likelihood_density(nu, mu, word, n)
    # x[0] is X_{-n}, x[1] is X_{-(n-1)}, x[-2] is X_{n-1}, x[-1] is X_n
    num = nu.reverse_matrix(-(n - 1))[x[1], x[0]] * nu.matrix(n - 1)[x[-2], x[-1]]
    den = mu.reverse_matrix(-(n - 1))[x[1], x[0]] * mu.matrix(n - 1)[x[-2], x[-1]]
    return LikelihoodState(n, density, float(num / den))


def conditional_root_expectation(nu: MarkovMeasure, mu: MarkovMeasure, n: int,
                                 boundary: tuple) -> float:
    """``E_mu(sqrt(M_n) | X_{-(n-1)} = u, X_{n-1} = v)`` by direct summation."""
    _check_same(nu, mu)
    u, v = (nu.adjacency.index(b) for b in boundary)
    Pr, P = nu.reverse_matrix(-(n - 1)), nu.matrix(n - 1)
    Qr, Q = mu.reverse_matrix(-(n - 1)), mu.matrix(n - 1)
    total = 0.0
    for s in range(nu.size):
        for t in range(nu.size):
            w = Qr[u, s] * Q[v, t]
            if w > 0:
                total += np.sqrt(Pr[u, s] * P[v, t] / w) * w
    return float(total)


def conditional_root_identity(nu: MarkovMeasure, mu: MarkovMeasure, n: int,
                              boundary: tuple) -> float:
    """The same expectation through ``1 - (1/2) sum_{s,t} d^2(s, u, v, t)``.

    The coefficients are taken at index ``n - 1``: both the reverse and the
    forward factor of ``M_n`` live one step inside the window ``[-n, n]``.
    """
    u, v = (nu.adjacency.index(b) for b in boundary)
    comp = dn2_components(nu, mu, n - 1)
    return float(1.0 - 0.5 * comp[:, u, v, :].sum())
