"""Admissible permutations, their derivatives and the D_k sequences.

An admissible pair ``(B, B')`` consists of two distinct blocks of equal
length sharing their first and last symbols. Exchanging ``B`` at coordinates
``i..i+L-1`` with ``B'`` at ``j..j+L-1`` changes a point only inside two
windows. Because the endpoints agree, the Radon-Nikodym derivative of the
exchange is the constant

    P_i(B') P_j(B) / (P_i(B) P_j(B'))

where ``P_i(B)`` is the product of the transition probabilities along ``B``
placed at ``i``. A configuration is a sequence of such exchanges with
``j_k`` increasing to the right and ``i_k`` decreasing to the left.
``D_k`` is the log-derivative of the ``k``-th one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .equivalence import homogeneous_equivalence_test, log_bracket
from .errors import (
    InsufficientWindow,
    LengthMismatch,
    LengthViolation,
    NoneFoundWithinLen,
    NotApplicable,
    OutsideDomain,
    OverlappingRanges,
    PairInvalid,
    SpacingViolation,
    SupportMismatch,
    TailsEqual,
    MarkovKriegerError,
)
from .linalg import as_stochastic, matrices_equal
from .measure import MarkovMeasure
from .sft import (
    AdjacencyMatrix,
    AdmissiblePair,
    Block,
    Cylinder,
    enumerate_blocks,
    is_golden_mean,
    make_admissible_pair,
    primitivity_index,
)
from .tails import CONVERGES

ASYMMETRIC = "Asymmetric"
SYMMETRIC = "Symmetric"
FORWARD = "forward"    # B at i, B' at j
SWAPPED = "swapped"    # B' at i, B at j

CROSS_TOL = 1e-12


def _pair(first, second) -> AdmissiblePair:
    b1 = first if isinstance(first, Block) else Block(tuple(first))
    b2 = second if isinstance(second, Block) else Block(tuple(second))
    return AdmissiblePair(b1, b2)


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class AdmissibleConfiguration:
    """A finite prefix of an admissible configuration.

    ``pairs[k-1]`` is placed as ``B_k`` at ``i_indices[k-1] < 0`` and
    ``B'_k`` at ``j_indices[k-1] > 0``.
    """

    pairs: tuple
    j_indices: tuple
    i_indices: tuple
    L: int
    M: int
    selector: tuple = ()
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.pairs)

    def spec(self, k: int, kind: str = ASYMMETRIC) -> "PermutationSpec":
        """The permutation of the ``k``-th entry (``k`` counts from 1)."""
        return PermutationSpec(kind, self.pairs[k - 1], self.i_indices[k - 1], self.j_indices[k - 1])

    def prefix(self, K: int) -> "AdmissibleConfiguration":
        return AdmissibleConfiguration(self.pairs[:K], self.j_indices[:K], self.i_indices[:K],
                                       self.L, self.M, self.selector[:K], dict(self.provenance))

    def coordinates(self, K: Optional[int] = None) -> list[int]:
        K = len(self) if K is None else K
        out = []
        for k in range(K):
            L = self.pairs[k].length
            out += list(range(self.i_indices[k], self.i_indices[k] + L))
            out += list(range(self.j_indices[k], self.j_indices[k] + L))
        return sorted(out)

    def to_dict(self) -> dict:
        return {"L": self.L, "M": self.M,
                "pairs": [[p.first.to_list(), p.second.to_list()] for p in self.pairs],
                "j": [int(j) if abs(j) < 2 ** 63 else str(j) for j in self.j_indices],
                "i": [int(i) for i in self.i_indices],
                "selector": list(self.selector), "provenance": dict(self.provenance)}


def validate_configuration(adjacency: AdjacencyMatrix, pairs: Sequence, j_indices: Sequence,
                           i_indices: Sequence, L: Optional[int] = None,
                           M: Optional[int] = None, **extra) -> AdmissibleConfiguration:
    """Check a configuration prefix and return it.

    ``L`` defaults to the longest pair and ``M`` to the primitivity
    exponent of ``adjacency``. Error indices count from 1.

    Raises
    ------
    PairInvalid, LengthViolation, SpacingViolation
    """
    pairs = [p if isinstance(p, AdmissiblePair) else _pair(*p) for p in pairs]
    j_indices, i_indices = list(j_indices), list(i_indices)
    if not len(pairs) == len(j_indices) == len(i_indices):
        raise LengthMismatch("pairs, j and i must have the same length")
    M = primitivity_index(adjacency).exponent if M is None else M
    checked = []
    for k, p in enumerate(pairs, 1):
        try:
            checked.append(make_admissible_pair(p.first, p.second, adjacency))
        except MarkovKriegerError as exc:
            raise PairInvalid(k, f"pair {k}: {exc}") from exc
    if L is None:
        L = max((p.length for p in checked), default=1)
    for k, p in enumerate(checked, 1):
        if p.length > L:
            raise LengthViolation(k, f"pair {k} has length {p.length} > {L}")
    gap = L + M
    for k, j in enumerate(j_indices, 1):
        if j <= 0:
            raise SpacingViolation(k, f"j_{k} = {j} is not positive")
        if k > 1 and j - j_indices[k - 2] < gap:
            raise SpacingViolation(k, f"j_{k} - j_{k - 1} < {gap}")
    for k, i in enumerate(i_indices, 1):
        if i >= 0:
            raise SpacingViolation(k, f"i_{k} = {i} is not negative")
        if k > 1 and i_indices[k - 2] - i < gap:
            raise SpacingViolation(k, f"i_{k - 1} - i_{k} < {gap}")
    return AdmissibleConfiguration(tuple(checked), tuple(j_indices), tuple(i_indices), L, M, **extra)


# ---------------------------------------------------------------------------
# permutations


@dataclass(frozen=True)
class PermutationSpec:
    kind: str
    pair: AdmissiblePair
    i: int
    j: int

    def __post_init__(self):
        if self.kind not in (ASYMMETRIC, SYMMETRIC):
            raise ValueError(f"bad permutation kind {self.kind!r}")
        if abs(self.i - self.j) < self.pair.length:
            raise OverlappingRanges("the two block ranges overlap")

    def cells(self):
        """Cylinder lists of the forward and swapped cells."""
        B, Bp = self.pair.first, self.pair.second
        fwd = [Cylinder(self.i, B), Cylinder(self.j, Bp)]
        swp = [Cylinder(self.i, Bp), Cylinder(self.j, B)]
        return fwd, swp


def four_factors(mu: MarkovMeasure, pair: AdmissiblePair, i: int, j: int) -> tuple:
    """``(P_i(B), P_i(B'), P_j(B), P_j(B'))``."""
    B, Bp = pair.first, pair.second
    return (mu.block_weight(i, B), mu.block_weight(i, Bp), mu.block_weight(j, B), mu.block_weight(j, Bp))


def log_derivative(mu: MarkovMeasure, spec: PermutationSpec) -> float:
    """``log`` of the forward-cell derivative, summed factor by factor."""
    B, Bp = spec.pair.first, spec.pair.second
    total = 0.0
    for l in range(B.length - 1):
        Pi, Pj = mu.matrix(spec.i + l), mu.matrix(spec.j + l)
        total += math.log(Pi[Bp[l], Bp[l + 1]]) + math.log(Pj[B[l], B[l + 1]])
        total -= math.log(Pi[B[l], B[l + 1]]) + math.log(Pj[Bp[l], Bp[l + 1]])
    return total


def rn_derivative(mu: MarkovMeasure, spec: PermutationSpec, cell: str = FORWARD) -> float:
    """Value of the derivative of the permutation on the given domain cell.

    The asymmetric kind is only defined on the forward cell; the symmetric
    kind returns the reciprocal on the swapped cell.
    """
    bi, bpi, bj, bpj = four_factors(mu, spec.pair, spec.i, spec.j)
    forward = (bpi * bj) / (bi * bpj)
    if cell == FORWARD:
        return forward
    if cell == SWAPPED and spec.kind == SYMMETRIC:
        return 1.0 / forward
    raise OutsideDomain(f"cell {cell!r} is not in the domain of a {spec.kind} permutation")


def measure_ratio(mu: MarkovMeasure, spec: PermutationSpec) -> float:
    """``mu(swapped cell) / mu(forward cell)`` from cylinder measures."""
    fwd, swp = spec.cells()
    return mu.multi_cylinder_measure(swp) / mu.multi_cylinder_measure(fwd)


def cell_of(spec: PermutationSpec, word: Sequence[int], offset: int = 0) -> Optional[str]:
    """Which cell (if any) a word on coordinates ``offset, offset+1, ...`` lies in."""
    L = spec.pair.length
    lo, hi = min(spec.i, spec.j), max(spec.i, spec.j) + L
    if lo < offset or hi > offset + len(word):
        raise InsufficientWindow("word does not cover both block ranges")
    at_i = tuple(word[spec.i - offset:spec.i - offset + L])
    at_j = tuple(word[spec.j - offset:spec.j - offset + L])
    B, Bp = spec.pair.first.symbols, spec.pair.second.symbols
    if at_i == B and at_j == Bp:
        return FORWARD
    if at_i == Bp and at_j == B:
        return SWAPPED
    return None


def apply_permutation(spec: PermutationSpec, word: Sequence[int], offset: int = 0) -> tuple:
    """Exchange the two blocks in a word covering both ranges.

    Raises
    ------
    OutsideDomain
        If the word is not in the permutation's domain.
    """
    cell = cell_of(spec, word, offset)
    if cell is None or (cell == SWAPPED and spec.kind == ASYMMETRIC):
        raise OutsideDomain("word is outside the domain of the permutation")
    out = list(word)
    L = spec.pair.length
    a, b = spec.i - offset, spec.j - offset
    out[a:a + L], out[b:b + L] = list(word[b:b + L]), list(word[a:a + L])
    return tuple(out)


# ---------------------------------------------------------------------------
# D_k


@dataclass
class DkSequence:
    values: list
    surrogate: list
    brackets: list
    bound: float
    configuration: AdmissibleConfiguration

    def to_dict(self) -> dict:
        return {"values": list(self.values), "surrogate": list(self.surrogate),
                "brackets": [list(b) for b in self.brackets], "bound": self.bound}


def dk_bound(mu: MarkovMeasure, L: int) -> float:
    """``|D_k| <= 2 (L - 1) log(1/delta)``: each side has ``2(L-1)`` factors in ``[delta, 1]``."""
    return 2 * (L - 1) * math.log(1.0 / mu.delta)


def dk_sequence(cfg: AdmissibleConfiguration, mu: MarkovMeasure, K: Optional[int] = None) -> DkSequence:
    """``D_k`` for ``k <= K`` with the first-order surrogate and its brackets.

    The surrogate is ``P_i(B')P_j(B) - P_i(B)P_j(B')`` and
    ``(a - b)/a <= D_k <= (a - b)/b`` for ``a``, ``b`` the two products.
    """
    K = len(cfg) if K is None else K
    if K > len(cfg):
        raise InsufficientWindow(f"configuration has only {len(cfg)} entries")
    values, surrogate, brackets = [], [], []
    for k in range(1, K + 1):
        spec = cfg.spec(k)
        bi, bpi, bj, bpj = four_factors(mu, spec.pair, spec.i, spec.j)
        a, b = bpi * bj, bi * bpj
        values.append(log_derivative(mu, spec))
        surrogate.append(a - b)
        brackets.append(log_bracket(a, b))
    return DkSequence(values, surrogate, brackets, dk_bound(mu, cfg.L), cfg)


def convergent_case_report(cfg: AdmissibleConfiguration, mu: MarkovMeasure,
                           K: Optional[int] = None) -> dict:
    """Diagnostics for ``D_k -> 0`` and ``sum D_k**2 = infinity``.

    Reports the running suprema ``sup_{k >= K0} |D_k|`` for a few ``K0``,
    the partial sums of ``D_k**2`` and, for configurations built from a
    family with a certified weighted-deviation series, its status.
    """
    seq = dk_sequence(cfg, mu, K)
    vals = np.abs(np.array(seq.values, dtype=float))
    n = len(vals)
    sums = np.cumsum(vals ** 2).tolist()
    starts = sorted({max(1, n * f // 4) for f in range(4)}) if n else []
    sup = {int(s): float(vals[s - 1:].max()) for s in starts}
    return {"D": list(seq.values), "sup_tail": sup, "partial_sums": sums,
            "nondecreasing": all(b >= a for a, b in zip(sums, sums[1:])),
            "series_status": cfg.provenance.get("series_status", "Inconclusive")}


# ---------------------------------------------------------------------------
# distinguishing pairs


@dataclass(frozen=True)
class DistinguishingPair:
    pair: AdmissiblePair
    alpha: int
    beta: int
    cross: float

    def to_dict(self):
        return {"first": self.pair.first.to_list(), "second": self.pair.second.to_list(),
                "alpha": self.alpha, "beta": self.beta, "cross": self.cross}


def path_weight(P: np.ndarray, symbols: Sequence[int]) -> float:
    w = 1.0
    for a, b in zip(symbols, symbols[1:]):
        w *= float(P[a, b])
    return w


def find_distinguishing_pair(P, Q, max_len: int = 6) -> DistinguishingPair:
    """First admissible pair whose path cross-ratio differs under ``P`` and ``Q``.

    Searches lengths ``3..max_len``, then ``(alpha, beta)`` and then pairs of
    blocks lexicographically, returning the first pair with
    ``|P(B)Q(B') - Q(B)P(B')| > 1e-12``.

    Raises
    ------
    TailsEqual
        If ``P == Q``.
    NoneFoundWithinLen
        If no pair of length at most ``max_len`` separates them.
    """
    P, Q = as_stochastic(P, label="P"), as_stochastic(Q, label="Q")
    if P.shape != Q.shape or not np.array_equal(P > 0, Q > 0):
        raise SupportMismatch("P and Q must have the same support")
    if matrices_equal(P, Q):
        raise TailsEqual("P and Q coincide")
    A = AdjacencyMatrix((P > 0).astype(np.int64))
    d = A.size
    for L in range(3, max_len + 1):
        for alpha in range(d):
            for beta in range(d):
                blocks = enumerate_blocks(A, alpha, beta, L)
                if len(blocks) < 2:
                    continue
                wp = np.array([path_weight(P, b.symbols) for b in blocks])
                wq = np.array([path_weight(Q, b.symbols) for b in blocks])
                cross = np.outer(wp, wq) - np.outer(wq, wp)
                hits = np.argwhere(np.triu(np.abs(cross) > CROSS_TOL, 1))
                if len(hits):
                    a, b = hits[0]
                    return DistinguishingPair(AdmissiblePair(blocks[a], blocks[b]), alpha, beta,
                                              float(cross[a, b]))
    raise NoneFoundWithinLen(f"no distinguishing pair of length <= {max_len}", max_len=max_len)


# ---------------------------------------------------------------------------
# configuration builder following the proof recipes

TWO_STATE_FULLSHIFT = "TwoStateFullshift"
TWO_STATE_SFT = "TwoStateSFT"
GOLDEN_MEAN_FAMILY = "GoldenMean"


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def detect_family(adjacency: AdjacencyMatrix) -> str:
    if adjacency.size == 2:
        return TWO_STATE_FULLSHIFT if adjacency.entries.all() else TWO_STATE_SFT
    if is_golden_mean(adjacency):
        return GOLDEN_MEAN_FAMILY
    raise NotApplicable("only two-state SFTs and the Golden Mean SFT have a recipe")


def _golden_labels(adjacency: AdjacencyMatrix) -> tuple:
    """Relabeling ``(a, b, c)`` with ``a->a, a->c, b->a, b->c, c->b`` allowed."""
    from itertools import permutations

    A = adjacency.entries
    for a, b, c in permutations(range(3)):
        want = {(a, a), (a, c), (b, a), (b, c), (c, b)}
        have = {(s, t) for s in range(3) for t in range(3) if A[s, t]}
        if want == have:
            return a, b, c
    raise NotApplicable("not the Golden Mean SFT")


def _coherent_positions(mu: MarkovMeasure, value, depth: int, gap: int, K: int,
                        max_runs: int = 100_000):
    """Greedy ``j_k >= 1`` whose windows ``[j, j+depth)`` have constant nonzero sign.

    Runs of a constant matrix are handled in bulk; only windows crossing a
    run boundary are checked one by one. Picks are collected for both signs
    and the sign with the larger sum of squared values is returned.
    """
    picks = {1: [], -1: []}
    weight = {1: 0.0, -1: 0.0}

    def take(s, lo, hi):
        # greedy picks for sign s among every position in [lo, hi]
        out = picks[s]
        n = lo if not out else max(lo, out[-1] + gap)
        while len(out) < K and n <= hi:
            out.append(n)
            n += gap

    def window_sign(n):
        signs = {_sign(value(mu.matrix(n + t))) for t in range(depth)}
        return signs.pop() if len(signs) == 1 else 0

    n = 1
    for _ in range(max_runs):
        if len(picks[1]) >= K and len(picks[-1]) >= K:
            break
        try:
            a, b, mat = mu._run(n)
        except MarkovKriegerError:
            break
        a = max(a, n)
        s = _sign(value(mat))
        if b is None:
            if s:
                weight[s] = math.inf
                take(s, a, a + K * gap)
            break
        if s and b - depth >= a:
            weight[s] += (b - depth - a + 1) * value(mat) ** 2
            take(s, a, b - depth)
        for m in range(max(a, b - depth + 1), b):
            try:
                ws = window_sign(m)
            except MarkovKriegerError:
                ws = 0
            if ws:
                weight[ws] += value(mu.matrix(m)) ** 2
                take(ws, m, m)
        n = b
    s = 1 if weight[1] >= weight[-1] else -1
    return picks[s], s, weight


def _negative_positions(mu: MarkovMeasure, j_list, value, s: int, L: int, gap: int,
                        residual=None, max_steps: int = 200_000):
    """Greedy ``i_k <= -L`` with ``sign(value(P_{j_k}) - value(P_{i_k})) = s``."""
    out = []
    n = -L
    steps = 0
    for k, j in enumerate(j_list, 1):
        target = value(mu.matrix(j))
        while steps < max_steps:
            steps += 1
            ok = _sign(target - value(mu.matrix(n))) == s
            if ok and residual is not None:
                ok = residual(n) <= 2.0 ** (-k)
            if ok:
                out.append(n)
                n -= gap
                break
            n -= 1
        else:
            raise NotApplicable(f"no admissible i_{k} within {max_steps} steps")
    return out


def build_configuration(mu: MarkovMeasure, K: int, family: Optional[str] = None) -> AdmissibleConfiguration:
    """Configuration of length ``K`` following the proof recipes.

    The measure must have equal one-sided limits ``Q`` and a divergent
    equivalence series against the stationary ``Q`` chain.

    Raises
    ------
    NotApplicable
        If the measure has nothing to chase (equivalent to the ``Q`` chain
        or no declared limit), or if the truncated horizon does not contain
        enough sign-coherent indices.
    """
    from .classifier import tail_behavior

    A = mu.adjacency
    family = family or detect_family(A)
    tb = tail_behavior(mu)
    if tb.mode != "ConvergentBoth" or not matrices_equal(tb.left, tb.right, 1e-10):
        raise NotApplicable("needs equal one-sided limits")
    Q = np.asarray(tb.right)
    series = homogeneous_equivalence_test(mu, Q, horizon=2000)
    if series.status == CONVERGES:
        raise NotApplicable("measure is equivalent to the stationary chain of its limit")
    M = mu.primitivity

    if family == TWO_STATE_FULLSHIFT:
        return _build_fullshift(mu, Q, K, M, series.status)
    if family == TWO_STATE_SFT:
        return _build_two_state_sft(mu, Q, K, M, series.status)
    if family == GOLDEN_MEAN_FAMILY:
        return _build_golden(mu, Q, K, M, series.status)
    raise NotApplicable(f"unknown family {family!r}")


def _dev_weight(mu, Q, entry, horizon=2000):
    return sum((float(mu.matrix(n)[entry]) - float(Q[entry])) ** 2 for n in range(1, horizon + 1))


def _build_fullshift(mu, Q, K, M, status):
    # use the row whose diagonal deviates more
    alpha = 0 if _dev_weight(mu, Q, (0, 0)) >= _dev_weight(mu, Q, (1, 1)) else 1
    beta = 1 - alpha
    q = float(Q[alpha, alpha])
    L = 3
    gap = L + M

    def value(P):
        return float(P[alpha, alpha]) - q

    j_list, s, _ = _coherent_positions(mu, value, 2, gap, K)
    if len(j_list) < K:
        raise NotApplicable(f"only {len(j_list)} sign-coherent indices found", found=len(j_list))
    i_list = _negative_positions(mu, j_list, value, s, L, gap)
    pairs = [_pair([alpha, alpha, alpha], [alpha, beta, alpha]),
             _pair([alpha, alpha, beta], [alpha, beta, beta])]
    chosen, selector = [], []
    for i, j in zip(i_list, j_list):
        Pi, Pj = mu.matrix(i + 1), mu.matrix(j + 1)
        t0 = math.log(Pi[beta, alpha] / Pj[beta, alpha])
        t1 = math.log(Pi[beta, beta] / Pj[beta, beta])
        g = 1 if _sign(t0) != s and _sign(t1) == s else 0
        selector.append(g)
        chosen.append(pairs[g])
    prov = {"family": TWO_STATE_FULLSHIFT, "alpha": alpha, "beta": beta, "sign": s,
            "series_status": status}
    return validate_configuration(mu.adjacency, chosen, j_list, i_list, L=L, M=M,
                                  selector=tuple(selector), provenance=prov)


def _build_two_state_sft(mu, Q, K, M, status):
    A = mu.adjacency.entries
    # alpha has the self-loop, beta -> beta is forbidden
    alpha = 0 if A[0, 0] else 1
    beta = 1 - alpha
    q = float(Q[alpha, alpha])
    L = 3
    gap = L + M

    def value(P):
        return float(P[alpha, alpha]) - q

    j_list, s, _ = _coherent_positions(mu, value, 2, gap, K)
    if len(j_list) < K:
        raise NotApplicable(f"only {len(j_list)} sign-coherent indices found", found=len(j_list))
    i_list = _negative_positions(mu, j_list, value, s, L, gap)
    pair = _pair([alpha, beta, alpha], [alpha, alpha, alpha])
    prov = {"family": TWO_STATE_SFT, "alpha": alpha, "beta": beta, "sign": s, "series_status": status}
    return validate_configuration(mu.adjacency, [pair] * K, j_list, i_list, L=L, M=M,
                                  selector=(0,) * K, provenance=prov)


def _build_golden(mu, Q, K, M, status):
    a, b, c = _golden_labels(mu.adjacency)
    L = 4
    gap = L + M
    row_a = _dev_weight(mu, Q, (a, a))
    row_b = _dev_weight(mu, Q, (b, a))
    if row_a >= row_b:
        # case 1: the a-row deviates
        q = float(Q[a, a])

        def value(P):
            return float(P[a, a]) - q

        j_list, s, _ = _coherent_positions(mu, value, 3, gap, K)
        if len(j_list) < K:
            raise NotApplicable(f"only {len(j_list)} sign-coherent indices found", found=len(j_list))
        i_list = _negative_positions(mu, j_list, value, s, L, gap)
        pairs = [_pair([a, a, a, a], [a, c, b, a]), _pair([a, a, a, c], [a, c, b, c])]
        chosen, selector = [], []
        for i, j in zip(i_list, j_list):
            Pi, Pj = mu.matrix(i + 2), mu.matrix(j + 2)
            t0 = math.log(Pi[b, a] / Pj[b, a])
            t1 = math.log(Pi[b, c] / Pj[b, c])
            g = 1 if _sign(t0) != s and _sign(t1) == s else 0
            selector.append(g)
            chosen.append(pairs[g])
        prov = {"family": GOLDEN_MEAN_FAMILY, "case": 1, "labels": [a, b, c], "sign": s,
                "series_status": status}
        return validate_configuration(mu.adjacency, chosen, j_list, i_list, L=L, M=M,
                                      selector=tuple(selector), provenance=prov)
    # case 2: only the b-row deviates in a non-summable way
    qb = float(Q[b, a])
    qa = float(Q[a, a])

    def value(P):
        return float(P[b, a]) - qb

    def residual(n):
        r1 = math.log(qa / float(mu.matrix(n + 1)[a, a]))
        r2 = math.log((1 - qa) / (1 - float(mu.matrix(n + 2)[a, a])))
        return r1 * r1 + r2 * r2

    j_list, s, _ = _coherent_positions(mu, value, 3, gap, K)
    if len(j_list) < K:
        raise NotApplicable(f"only {len(j_list)} sign-coherent indices found", found=len(j_list))
    # i_k must satisfy sign(p'_{i_k} - p'_{j_k}) = -s, i.e. the same rule with value(j) - value(i)
    i_list = _negative_positions(mu, j_list, value, s, L, gap, residual=residual)
    pair = _pair([b, a, a, c], [b, c, b, c])
    prov = {"family": GOLDEN_MEAN_FAMILY, "case": 2, "labels": [a, b, c], "sign": s,
            "series_status": status}
    return validate_configuration(mu.adjacency, [pair] * K, j_list, i_list, L=L, M=M,
                                  selector=(0,) * K, provenance=prov)


# ---------------------------------------------------------------------------
# the Y_k chain


class WindowSamples:
    """Sampled words on consecutive coordinates ``start, start+1, ...``."""

    def __init__(self, start: int, words: np.ndarray):
        self.start = int(start)
        self.words = np.asarray(words)

    def values(self, coords: Sequence[int]) -> np.ndarray:
        idx = np.asarray(coords) - self.start
        if len(idx) and (idx.min() < 0 or idx.max() >= self.words.shape[1]):
            raise InsufficientWindow("samples do not cover the requested coordinates")
        return self.words[:, idx]


def yk_samples(cfg: AdmissibleConfiguration, K: int, source) -> np.ndarray:
    """``Y_k = 1[B at i_k, B' at j_k] - 1[B' at i_k, B at j_k]`` per trajectory.

    ``source`` must provide ``values(coords) -> array (n_traj, len(coords))``.
    Returns an integer array of shape ``(n_traj, K)``.
    """
    if K > len(cfg):
        raise InsufficientWindow(f"configuration has only {len(cfg)} entries")
    cols = []
    for k in range(1, K + 1):
        spec = cfg.spec(k)
        L = spec.pair.length
        at_i = source.values(list(range(spec.i, spec.i + L)))
        at_j = source.values(list(range(spec.j, spec.j + L)))
        B = np.array(spec.pair.first.symbols)
        Bp = np.array(spec.pair.second.symbols)
        fwd = (at_i == B).all(axis=1) & (at_j == Bp).all(axis=1)
        swp = (at_i == Bp).all(axis=1) & (at_j == B).all(axis=1)
        cols.append(fwd.astype(np.int64) - swp.astype(np.int64))
    return np.stack(cols, axis=1) if cols else np.zeros((0, 0), dtype=np.int64)


@dataclass(frozen=True)
class YMarginal:
    plus: float
    minus: float

    @property
    def mean(self) -> float:
        return self.plus - self.minus

    @property
    def variance(self) -> float:
        return self.plus + self.minus - self.mean ** 2


def y_marginal(cfg: AdmissibleConfiguration, mu: MarkovMeasure, k: int) -> YMarginal:
    """Exact ``P(Y_k = 1)`` and ``P(Y_k = -1)``."""
    fwd, swp = cfg.spec(k).cells()
    return YMarginal(mu.multi_cylinder_measure(fwd), mu.multi_cylinder_measure(swp))


class _BridgeCache:
    """Memoised bridges, block weights and marginals for repeated chain measures."""

    def __init__(self, mu: MarkovMeasure):
        self.mu = mu
        self.cache = {}
        self.weights = {}
        self.marginals = {}

    def __call__(self, a: int, b: int) -> np.ndarray:
        key = (a, b)
        hit = self.cache.get(key)
        if hit is None:
            hit = self.mu.bridge(a, b)
            self.cache[key] = hit
        return hit

    def weight(self, cyl: Cylinder) -> float:
        key = (cyl.base_index, cyl.block.symbols)
        hit = self.weights.get(key)
        if hit is None:
            hit = self.mu.block_weight(cyl.base_index, cyl.block)
            self.weights[key] = hit
        return hit

    def marginal(self, n: int) -> np.ndarray:
        hit = self.marginals.get(n)
        if hit is None:
            hit = self.mu.coordinate_distribution(n)
            self.marginals[n] = hit
        return hit


def _chain_measure(mu: MarkovMeasure, parts: list, bridge: _BridgeCache) -> float:
    parts = sorted(parts, key=lambda c: c.base_index)
    first = parts[0]
    value = float(bridge.marginal(first.base_index)[first.block.first]) * bridge.weight(first)
    for x, y in zip(parts, parts[1:]):
        value *= float(bridge(x.stop - 1, y.base_index)[x.block.last, y.block.first])
        value *= bridge.weight(y)
    return value


def log_sum_moments(cfg: AdmissibleConfiguration, mu: MarkovMeasure, k0: int, K: int,
                    D: Optional[Sequence[float]] = None) -> dict:
    """Exact mean and variance of ``S = sum_{k=k0}^{K} D_k Y_k``.

    Uses ``E[Y_a Y_b]`` from four-cylinder measures, so the cost is
    quadratic in ``K - k0``.
    """
    if D is None:
        D = dk_sequence(cfg, mu, K).values
    bridge = _BridgeCache(mu)
    ks = list(range(k0, K + 1))
    cells = {k: cfg.spec(k).cells() for k in ks}
    mean = 0.0
    second = 0.0
    marg = {}
    for k in ks:
        fwd, swp = cells[k]
        p, m = _chain_measure(mu, fwd, bridge), _chain_measure(mu, swp, bridge)
        marg[k] = (p, m)
        mean += D[k - 1] * (p - m)
        second += D[k - 1] ** 2 * (p + m)
    for x, a in enumerate(ks):
        for b in ks[x + 1:]:
            fa, sa = cells[a]
            fb, sb = cells[b]
            joint = (_chain_measure(mu, fa + fb, bridge) - _chain_measure(mu, fa + sb, bridge)
                     - _chain_measure(mu, sa + fb, bridge) + _chain_measure(mu, sa + sb, bridge))
            second += 2 * D[a - 1] * D[b - 1] * joint
    return {"mean": mean, "variance": second - mean ** 2, "marginals": marg}


def expected_log_derivative(cfg: AdmissibleConfiguration, mu: MarkovMeasure, k: int) -> float:
    """``D_k E(Y_k)``, the mean of the log-derivative of the ``k``-th symmetric permutation."""
    D = log_derivative(mu, cfg.spec(k))
    return D * y_marginal(cfg, mu, k).mean
