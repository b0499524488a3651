"""Krieger-type decision procedure for Markov shifts.

The classifier reads the declared tails of the transition sequence and
follows a short decision tree:

1. no right limit: type III_1;
2. both limits exist but differ: the shift cannot be conservative;
3. both limits equal ``Q``: equivalence with the stationary ``Q`` chain
   decides between II_1 (with that chain as the invariant measure) and III_1.

Conservativeness is an assumption supplied by the caller. The classifier can
refute it (branch 2) but never proves it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .equivalence import (
    DEFAULT_HORIZON,
    LIMIT_TOL,
    SeriesVerdict,
    _declared_limit,
    homogeneous_equivalence_test,
    nonsingularity_test,
)
from .errors import AssumptionViolated, TailsUnknown
from .linalg import STATIONARY_TOL, as_stochastic, matrices_equal, stationary_residual, stationary_vector
from .measure import MarkovMeasure
from .sft import AdjacencyMatrix, is_golden_mean
from .tails import CONVERGES, DIVERGES, AlternatingTail, OpaqueTail

# verdict names
TYPE_II1 = "TypeII1"
TYPE_III1 = "TypeIII1"
NOT_CONSERVATIVE = "NotConservative"
INCONCLUSIVE_VERDICT = "Inconclusive"

PROVEN = "Proven"
BEYOND_PROVEN_SCOPE = "BeyondProvenScope"

STATIONARY_MISMATCH_TOL = 1e-10


@dataclass(frozen=True)
class TailBehavior:
    """Limits of ``P_n`` at both ends as far as the declared tails tell.

    ``mode`` is ``ConvergentBoth``, ``DivergentRight``, ``DivergentLeft`` or
    ``Unknown``. ``left``/``right`` hold the limits when they exist and
    ``witnesses`` the distinct partial limits of a divergent side.
    """

    mode: str
    left: Optional[np.ndarray] = None
    right: Optional[np.ndarray] = None
    witnesses: tuple = ()

    def to_dict(self) -> dict:
        out = {"mode": self.mode}
        if self.left is not None:
            out["left"] = np.asarray(self.left).tolist()
        if self.right is not None:
            out["right"] = np.asarray(self.right).tolist()
        if self.witnesses:
            out["witnesses"] = [np.asarray(w).tolist() for w in self.witnesses]
        return out


def tail_behavior(mu: MarkovMeasure) -> TailBehavior:
    """Read the one-sided limits of the transition matrices.

    The left tail is a single exact matrix, so the left limit always exists
    and ``DivergentLeft`` cannot occur for measures built by this package.
    """
    left = mu.transitions.left_tail
    tail = mu.transitions.right_tail
    if isinstance(tail, OpaqueTail):
        return TailBehavior("Unknown", left=left)
    if isinstance(tail, AlternatingTail):
        return TailBehavior("DivergentRight", left=left, witnesses=tuple(tail.matrices))
    right = _declared_limit(tail)
    if right is None:
        return TailBehavior("Unknown", left=left)
    return TailBehavior("ConvergentBoth", left=left, right=right)


@dataclass(frozen=True)
class NecessaryCheck:
    passed: bool
    reason: Optional[str] = None
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"status": "Pass" if self.passed else "Fail"}
        if self.reason:
            out["reason"] = self.reason
        if self.detail:
            out["detail"] = dict(self.detail)
        return out


def conservativeness_necessary(mu: MarkovMeasure) -> NecessaryCheck:
    """Refute conservativeness when the two one-sided limits disagree.

    The stationary vectors are compared first, then the matrices entrywise
    (tolerance 1e-10). A one-sided limit that does not exist leaves nothing
    to compare and the check passes.
    """
    tb = tail_behavior(mu)
    if tb.mode == "Unknown":
        raise TailsUnknown("right tail limit is unknown")
    if tb.mode != "ConvergentBoth":
        return NecessaryCheck(True, detail={"note": f"tail mode {tb.mode}"})
    lam_left = stationary_vector(tb.left)
    lam_right = stationary_vector(tb.right)
    gap = float(np.max(np.abs(lam_left - lam_right)))
    if gap > STATIONARY_MISMATCH_TOL:
        return NecessaryCheck(False, "StationaryMismatch",
                              {"left": lam_left.tolist(), "right": lam_right.tolist(), "gap": gap})
    if not matrices_equal(tb.left, tb.right, LIMIT_TOL):
        gap = float(np.max(np.abs(np.asarray(tb.left) - np.asarray(tb.right))))
        return NecessaryCheck(False, "TransitionMismatch", {"gap": gap})
    return NecessaryCheck(True)


@dataclass(frozen=True)
class Assumptions:
    """Caller-side assumptions.

    ``nonsingular`` is ``"Asserted"`` or a :class:`SeriesVerdict` that
    verified it; ``conservative`` is ``"Asserted"``, ``"ProbedOK"`` or
    ``"ProbedFail"``.
    """

    nonsingular: object = "Asserted"
    conservative: str = "Asserted"

    def __post_init__(self):
        if self.conservative not in ("Asserted", "ProbedOK", "ProbedFail"):
            raise ValueError(f"bad conservativeness assumption {self.conservative!r}")

    def to_dict(self) -> dict:
        ns = self.nonsingular.to_dict() if isinstance(self.nonsingular, SeriesVerdict) else self.nonsingular
        return {"nonsingular": ns, "conservative": self.conservative}


@dataclass(frozen=True)
class KriegerVerdict:
    verdict: str
    reasons: tuple = ()
    scope_note: str = PROVEN
    Q: Optional[np.ndarray] = None
    invariant: Optional[np.ndarray] = None
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "reasons": list(self.reasons), "scope_note": self.scope_note}
        if self.Q is not None:
            out["Q"] = np.asarray(self.Q).tolist()
        if self.invariant is not None:
            out["invariant"] = np.asarray(self.invariant).tolist()
        ev = {}
        for k, v in self.evidence.items():
            ev[k] = v.to_dict() if hasattr(v, "to_dict") else v
        out["evidence"] = ev
        return out


def acim(Q) -> np.ndarray:
    """Stationary probability vector of a primitive stochastic matrix."""
    Q = as_stochastic(Q, label="Q")
    lam = stationary_vector(Q)
    res = stationary_residual(lam, Q)
    if res > STATIONARY_TOL:
        raise ArithmeticError(f"stationary residual {res:.3g} above tolerance")
    return lam


def dichotomy_scope(adjacency: AdjacencyMatrix) -> str:
    """Whether the II_1 / III_1 dichotomy is proven for this SFT."""
    if adjacency.size == 2 or is_golden_mean(adjacency):
        return PROVEN
    return BEYOND_PROVEN_SCOPE


def classify(mu: MarkovMeasure, assumptions: Optional[Assumptions] = None,
             horizon: int = DEFAULT_HORIZON) -> KriegerVerdict:
    """Krieger type of the shift under ``mu``.

    Parameters
    ----------
    mu : MarkovMeasure
    assumptions : Assumptions, optional
        Defaults to nonsingularity and conservativeness both asserted.
    horizon : int
        Partial-sum horizon passed to the series tests.

    Raises
    ------
    AssumptionViolated
        If the convergent branch is reached while conservativeness was
        probed and failed.
    """
    assumptions = assumptions or Assumptions()
    tb = tail_behavior(mu)
    evidence = {"tails": tb}
    if tb.mode == "Unknown":
        return KriegerVerdict(INCONCLUSIVE_VERDICT, ("TailsUnknown",), evidence=evidence)
    if tb.mode == "DivergentRight":
        return KriegerVerdict(TYPE_III1, ("NoLimit",), evidence=evidence)

    check = conservativeness_necessary(mu)
    evidence["necessary"] = check
    if not check.passed:
        return KriegerVerdict(NOT_CONSERVATIVE, (check.reason,), evidence=evidence)

    if assumptions.conservative == "ProbedFail":
        raise AssumptionViolated("conservativeness was probed and failed")
    ns = nonsingularity_test(mu, min(horizon, DEFAULT_HORIZON))
    evidence["nonsingularity"] = ns
    if ns.status == DIVERGES:
        return KriegerVerdict(INCONCLUSIVE_VERDICT, ("ShiftSingular",), evidence=evidence)

    Q = tb.right
    series = homogeneous_equivalence_test(mu, Q, horizon)
    evidence["equivalence"] = series
    if series.status == CONVERGES:
        return KriegerVerdict(TYPE_II1, ("EquivalentToStationary",), Q=np.array(Q),
                              invariant=acim(Q), evidence=evidence)
    if series.status == DIVERGES:
        return KriegerVerdict(TYPE_III1, ("SeriesDiverges",), scope_note=dichotomy_scope(mu.adjacency),
                              Q=np.array(Q), evidence=evidence)
    return KriegerVerdict(INCONCLUSIVE_VERDICT, (series.reason or "SeriesInconclusive",),
                          evidence=evidence)
