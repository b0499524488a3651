"""Non-homogeneous Markov measures on a subshift of finite type.

A measure is given by transition matrices ``P_n`` (one per integer ``n``)
and coordinate distributions ``pi_n`` with ``pi_n P_n = pi_{n+1}``. Below
``left_cutoff`` every ``P_n`` equals one fixed matrix and ``pi_n`` is its
stationary vector, so the whole chain ``pi_n`` is determined exactly by
forward propagation.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AnchorNotStationary,
    DoeblinViolation,
    InequalityViolated,
    InvalidSegments,
    OverlappingRanges,
)
from .linalg import (
    as_stochastic,
    frozen,
    matrix_power,
    stationary_vector,
    vector_power,
)
from .sft import AdjacencyMatrix, Block, Cylinder, primitivity_index
from .tails import ConstantTail, OpaqueTail, PlateauTail


@dataclass(frozen=True, eq=False)
class Segment:
    start: int
    stop: int
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", frozen(self.matrix))


class TransitionSequence:
    """The rule ``n -> P_n``.

    Parameters
    ----------
    left_tail : array_like
        ``P_n`` for every ``n <= left_cutoff``.
    left_cutoff : int
    segments : sequence of (start, stop, matrix)
        Contiguous half-open intervals starting at ``left_cutoff + 1``.
    right_tail : tail descriptor, optional
        Applies from the end of the last segment on. Defaults to a
        constant tail equal to ``left_tail``.
    """

    def __init__(self, left_tail, left_cutoff: int = 0, segments: Sequence = (), right_tail=None):
        self.left_tail = frozen(left_tail)
        self.left_cutoff = int(left_cutoff)
        segs = []
        expected = self.left_cutoff + 1
        for seg in segments:
            if not isinstance(seg, Segment):
                seg = Segment(int(seg[0]), int(seg[1]), seg[2])
            if seg.start != expected or seg.stop <= seg.start:
                raise InvalidSegments(
                    f"segment [{seg.start}, {seg.stop}) does not continue at {expected}")
            segs.append(seg)
            expected = seg.stop
        self.segments = tuple(segs)
        self.right_start = expected
        self.right_tail = right_tail if right_tail is not None else ConstantTail(self.left_tail)

    def run_at(self, n: int):
        """Maximal stored constant piece ``(a, b, matrix)`` containing ``n``.

        ``a`` is None for the left tail and ``b`` is None for an endless run.
        """
        if n <= self.left_cutoff:
            return None, self.left_cutoff + 1, self.left_tail
        if n < self.right_start:
            for seg in self.segments:
                if seg.start <= n < seg.stop:
                    return seg.start, seg.stop, seg.matrix
        return self.right_tail.run_at(n, self.right_start)

    def matrix(self, n: int) -> np.ndarray:
        if n <= self.left_cutoff:
            return self.left_tail
        if n < self.right_start:
            return self.run_at(n)[2]
        return self.right_tail.matrix_at(n, self.right_start)

    def concrete_matrices(self) -> list:
        out = [self.left_tail] + [s.matrix for s in self.segments]
        return out + list(self.right_tail.concrete_matrices())


def validate_doeblin(adjacency: AdjacencyMatrix, transitions: TransitionSequence) -> float:
    """Largest ``delta`` with ``P_n(s, t) >= delta`` on every allowed entry.

    Raises
    ------
    SupportMismatch
        If some stored matrix has the wrong zero pattern.
    DoeblinViolation
        If allowed entries are not bounded away from zero, or the tail
        gives no certified bound.

    Examples
    --------
    >>> from markov_krieger.sft import AdjacencyMatrix
    >>> validate_doeblin(AdjacencyMatrix.full(2),
    ...                  TransitionSequence([[.5, .5], [.4, .6]]))
    0.4
    """
    allowed = adjacency.entries.astype(bool)
    mats = transitions.concrete_matrices()
    for i, m in enumerate(mats):
        as_stochastic(m, adjacency, label=f"matrix #{i}")
    delta = min(float(m[allowed].min()) for m in mats) if mats else 1.0
    tail = transitions.right_tail
    if isinstance(tail, PlateauTail) and not tail.finite:
        if tail.entry_infimum is None:
            raise DoeblinViolation("plateau family carries no certified entry infimum",
                                   family=str(tail.family))
        delta = min(delta, float(tail.entry_infimum))
    elif isinstance(tail, OpaqueTail):
        if tail.infimum is None:
            raise DoeblinViolation("opaque tail carries no certified entry infimum",
                                   family=tail.name)
        delta = min(delta, float(tail.infimum))
    if not delta > 0:
        raise DoeblinViolation("allowed entries approach zero", delta=delta)
    return delta


@dataclass(frozen=True)
class ReverseTransition:
    index: int
    matrix: np.ndarray


@dataclass(frozen=True)
class MixingConstant:
    delta: float
    exponent: int
    value: float
    warning: bool = False


def mixing_constant(delta: float, exponent: int) -> MixingConstant:
    """``C = delta**M / (1 - delta**M)``.

    ``warning`` is set when ``delta**M >= 1/2``, where the value is not
    below 1 and the sandwich inequality becomes vacuous on one side.
    """
    if not 0 < delta < 1 or exponent < 1:
        raise ValueError("need 0 < delta < 1 and M >= 1")
    dm = delta ** exponent
    return MixingConstant(delta, exponent, dm / (1.0 - dm), warning=dm >= 0.5)


class MarkovMeasure:
    """A Doeblin Markov measure on an SFT, anchored at the left tail.

    Parameters
    ----------
    adjacency : AdjacencyMatrix
    transitions : TransitionSequence
    anchor : array_like, optional
        Must equal the stationary vector of the left tail if given.
    """

    def __init__(self, adjacency: AdjacencyMatrix, transitions: TransitionSequence, anchor=None):
        self.adjacency = adjacency
        self.transitions = transitions
        self.delta = validate_doeblin(adjacency, transitions)
        self.primitivity = primitivity_index(adjacency).exponent
        lam = stationary_vector(transitions.left_tail)
        if anchor is not None:
            given = np.asarray(anchor, dtype=float)
            if given.shape != lam.shape or abs(given.sum() - 1.0) > 1e-12 \
                    or np.max(np.abs(given - lam)) > 1e-12:
                raise AnchorNotStationary("anchor is not the stationary vector of the left tail")
        self.anchor = lam
        self.anchor_index = transitions.left_cutoff
        self._lock = threading.Lock()
        # pi at the start of each run, keyed by run start
        self._run_pi = {transitions.left_cutoff + 1: lam}
        self._run_order = [transitions.left_cutoff + 1]
        self._opaque_checked = set()

    # -- basic accessors --------------------------------------------------
    @property
    def size(self) -> int:
        return self.adjacency.size

    @property
    def left_cutoff(self) -> int:
        return self.transitions.left_cutoff

    def matrix(self, n: int) -> np.ndarray:
        m = self.transitions.matrix(n)
        if isinstance(self.transitions.right_tail, OpaqueTail) and n >= self.transitions.right_start \
                and n not in self._opaque_checked:
            as_stochastic(m, self.adjacency, label=f"P_{n}")
            if self.transitions.right_tail.infimum is not None and \
                    m[self.adjacency.entries.astype(bool)].min() < self.transitions.right_tail.infimum:
                raise DoeblinViolation(f"P_{n} goes below the declared infimum", index=n)
            self._opaque_checked.add(n)
        return m

    def _run(self, n: int):
        a, b, mat = self.transitions.run_at(n)
        if isinstance(self.transitions.right_tail, OpaqueTail) and n >= self.transitions.right_start:
            mat = self.matrix(n)
        return a, b, mat

    # -- coordinate distributions ----------------------------------------
    def _pi_at_run_start(self, a: int) -> np.ndarray:
        with self._lock:
            hit = self._run_pi.get(a)
            if hit is not None:
                return hit
            cur = self._run_order[-1]
            vec = self._run_pi[cur]
            while cur < a:
                start, stop, mat = self._run(cur)
                if stop is None or stop > a:
                    raise AssertionError("run starts are not aligned")
                vec = frozen(vector_power(vec, mat, stop - cur))
                cur = stop
                self._run_pi[cur] = vec
                self._run_order.append(cur)
            return self._run_pi[a]

    def coordinate_distribution(self, n: int) -> np.ndarray:
        """``pi_n``, the distribution of ``X_n``.

        Examples
        --------
        >>> m = homogeneous_measure(AdjacencyMatrix.full(2), [[.5, .5], [.4, .6]])
        >>> np.round(m.coordinate_distribution(7) * 9, 12).tolist()
        [4.0, 5.0]
        """
        if n <= self.left_cutoff + 1:
            return self.anchor
        a, b, mat = self._run(n - 1)
        if a is None:
            return self.anchor
        base = self._pi_at_run_start(a)
        if n - a == 0:
            return base
        return frozen(vector_power(base, mat, n - a))

    # -- products and reversals ------------------------------------------
    def transition_product(self, n: int, k: int) -> np.ndarray:
        """``P_n P_{n+1} ... P_{n+k}``, the law of ``X_{n+k+1}`` given ``X_n``."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        out = np.eye(self.size)
        cur, last = n, n + k
        while cur <= last:
            a, b, mat = self._run(cur)
            stop = last + 1 if b is None else min(b, last + 1)
            out = out @ matrix_power(mat, stop - cur)
            cur = stop
        return out

    def bridge(self, a: int, b: int) -> np.ndarray:
        """Law of ``X_b`` given ``X_a`` for ``b >= a`` (identity when equal)."""
        if b < a:
            raise ValueError("bridge needs b >= a")
        if b == a:
            return np.eye(self.size)
        return self.transition_product(a, b - 1 - a)

    def reverse_transition(self, n: int) -> ReverseTransition:
        """``Phat_n(s, t) = pi_{n-1}(t) P_{n-1}(t, s) / pi_n(s)``."""
        prev = self.coordinate_distribution(n - 1)
        cur = self.coordinate_distribution(n)
        mat = (self.matrix(n - 1).T * prev[None, :]) / cur[:, None]
        return ReverseTransition(n, frozen(mat))

    def reverse_matrix(self, n: int) -> np.ndarray:
        return self.reverse_transition(n).matrix

    # -- cylinders --------------------------------------------------------
    def block_weight(self, i: int, block: Block | Sequence[int]) -> float:
        """Product of the transition probabilities along a block placed at ``i``."""
        syms = block.symbols if isinstance(block, Block) else tuple(block)
        w = 1.0
        for l in range(len(syms) - 1):
            w *= float(self.matrix(i + l)[syms[l], syms[l + 1]])
        return w

    def cylinder_measure(self, cylinder: Cylinder) -> float:
        i = cylinder.base_index
        b = cylinder.block
        return float(self.coordinate_distribution(i)[b.first]) * self.block_weight(i, b)

    def multi_cylinder_measure(self, parts: Iterable[Cylinder]) -> float:
        """Measure of an intersection of cylinders on disjoint coordinate ranges."""
        parts = sorted(parts, key=lambda c: c.base_index)
        if not parts:
            return 1.0
        for a, b in zip(parts, parts[1:]):
            if b.base_index < a.stop:
                raise OverlappingRanges(
                    f"cylinders at {a.base_index} and {b.base_index} overlap")
        value = self.cylinder_measure(parts[0])
        for a, b in zip(parts, parts[1:]):
            link = self.bridge(a.stop - 1, b.base_index)[a.block.last, b.block.first]
            value *= float(link) * self.block_weight(b.base_index, b.block)
        return value

    # -- bounds -----------------------------------------------------------
    def mixing_constant(self) -> MixingConstant:
        return mixing_constant(self.delta, self.primitivity)

    def cylinder_bounds(self, block: Block) -> tuple[float, float]:
        """Certified bounds on ``mu(B(i))`` valid for every ``i``.

        The lower bound is ``delta**(M + L)``. The upper bound is
        ``(1 - delta**M) * (1 - delta)**b`` where ``b`` counts the block's
        transitions leaving a state with at least two allowed successors;
        forced transitions carry probability one and cannot be bounded by
        ``1 - delta``.
        """
        d, M = self.delta, self.primitivity
        out_degree = self.adjacency.entries.sum(axis=1)
        branching = sum(1 for s in block.symbols[:-1] if out_degree[s] >= 2)
        return d ** (M + block.length), (1 - d ** M) * (1 - d) ** branching

    def __repr__(self):
        return (f"MarkovMeasure(states={self.adjacency.states}, delta={self.delta:.6g}, "
                f"M={self.primitivity}, tail={self.transitions.right_tail.kind})")


def homogeneous_measure(adjacency: AdjacencyMatrix, matrix) -> MarkovMeasure:
    """The stationary Markov measure of a single matrix."""
    q = as_stochastic(matrix, adjacency)
    return MarkovMeasure(adjacency, TransitionSequence(q, 0, (), ConstantTail(q)))


def window_distribution(measure: MarkovMeasure, start: int, length: int) -> np.ndarray:
    """Joint law of ``(X_start, ..., X_{start+length-1})`` as a dense tensor.

    Built by repeated multiplication; intended for windows of at most
    about 14 coordinates on small alphabets.
    """
    joint = np.array(measure.coordinate_distribution(start), dtype=float)
    for off in range(length - 1):
        P = measure.matrix(start + off)
        joint = joint[..., :, None] * P.reshape((1,) * (joint.ndim - 1) + P.shape)
    return joint


def enumerate_window(measure: MarkovMeasure, start: int, length: int):
    """Yield ``(word, probability)`` for all admissible words on a window."""
    A = measure.adjacency
    for word in itertools.product(range(A.size), repeat=length):
        if all(A.allowed(word[k], word[k + 1]) for k in range(length - 1)):
            p = float(measure.coordinate_distribution(start)[word[0]])
            for k in range(length - 1):
                p *= float(measure.matrix(start + k)[word[k], word[k + 1]])
            yield word, p


@dataclass
class MixingReport:
    window: tuple
    worst_lower_ratio: float
    worst_upper_ratio: float
    constant: float
    marginal_min: float
    marginal_max: float
    transition_min: float
    transition_max: float
    checks: int
    passed: bool = True

    def to_dict(self):
        return dict(self.__dict__)


def check_mixing_inequalities(measure: MarkovMeasure, window: tuple[int, int],
                              tol: float = 1e-12) -> MixingReport:
    """Verify the marginal, transition and sandwich bounds on a window.

    Every split of the window into a past part ``[n1, n]`` and a future part
    ``[m, n2]`` with ``m - n >= M`` is tested on all pairs of cylinder words,
    using joint probabilities obtained by summing the window law.

    Raises
    ------
    InequalityViolated
        With a witness, if any bound fails beyond ``tol``.
    """
    n1, n2 = window
    W = n2 - n1 + 1
    M = measure.primitivity
    dm = measure.delta ** M
    C = measure.mixing_constant().value
    checks = 0

    pis = np.array([measure.coordinate_distribution(n) for n in range(n1, n2 + 1)])
    if pis.min() < dm - tol or pis.max() > 1 - dm + tol:
        raise InequalityViolated("marginal bound fails", window=[n1, n2],
                                 min=float(pis.min()), max=float(pis.max()))
    checks += pis.size

    tmin, tmax = 1.0, 0.0
    for n in range(n1, n2 + 1):
        for N in range(M, n2 - n + 1):
            T = measure.transition_product(n, N)
            tmin, tmax = min(tmin, float(T.min())), max(tmax, float(T.max()))
            checks += T.size
    if tmin < dm - tol or tmax > 1 - dm + tol:
        raise InequalityViolated("transition bound fails", window=[n1, n2], min=tmin, max=tmax)

    joint = window_distribution(measure, n1, W)
    worst_lo, worst_hi = np.inf, 0.0
    for past_end in range(W):
        for fut_start in range(past_end + M, W):
            past_axes = tuple(range(past_end + 1, W))
            fut_axes = tuple(range(0, fut_start))
            pE = joint.sum(axis=past_axes).reshape(-1)
            pF = joint.sum(axis=fut_axes).reshape(-1)
            mid = tuple(range(past_end + 1, fut_start))
            pEF = (joint.sum(axis=mid) if mid else joint).reshape(pE.size, pF.size)
            prod = np.outer(pE, pF)
            mask = prod > 0
            ratio = pEF[mask] / prod[mask]
            checks += int(mask.sum())
            lo_fail = pEF < C * prod - tol * prod
            hi_fail = pEF > prod / C + tol * prod
            if lo_fail.any() or hi_fail.any():
                e, f = np.argwhere(lo_fail | hi_fail)[0]
                raise InequalityViolated(
                    "sandwich bound fails", window=[n1, n2], past_end=n1 + past_end,
                    future_start=n1 + fut_start, event=[int(e), int(f)],
                    joint=float(pEF[e, f]), product=float(prod[e, f]))
            if ratio.size:
                worst_lo = min(worst_lo, float(ratio.min()))
                worst_hi = max(worst_hi, float(ratio.max()))
    return MixingReport((n1, n2), worst_lo, worst_hi, C, float(pis.min()), float(pis.max()),
                        tmin, tmax, checks)
