import numpy as np
import pytest

from markov_krieger.classifier import (
    BEYOND_PROVEN_SCOPE,
    INCONCLUSIVE_VERDICT,
    NOT_CONSERVATIVE,
    PROVEN,
    TYPE_II1,
    TYPE_III1,
    Assumptions,
    acim,
    classify,
    conservativeness_necessary,
    dichotomy_scope,
    tail_behavior,
)
from markov_krieger.errors import AssumptionViolated, TailsUnknown
from markov_krieger.examples import FULLSHIFT2, GOLDEN, build_example_measure, inductive_construct
from markov_krieger.measure import MarkovMeasure, TransitionSequence, homogeneous_measure
from markov_krieger.sft import GOLDEN_MEAN, AdjacencyMatrix
from markov_krieger.tails import AlternatingTail, ConstantTail, OpaqueTail
from oracles import FULL2, random_stochastic, stationary

P = np.array([[.5, .5], [.4, .6]])
R = np.array([[.3, .7], [.6, .4]])


@pytest.mark.parametrize("A", [FULL2, GOLDEN_MEAN], ids=["fullshift", "golden"])
def test_homogeneous_is_type_ii1_with_stationary_invariant(A):
    rng = np.random.default_rng(2)
    Q = random_stochastic(rng, A)
    v = classify(homogeneous_measure(A, Q))
    assert v.verdict == TYPE_II1 and v.scope_note == PROVEN
    assert np.max(np.abs(v.invariant @ Q - v.invariant)) <= 1e-12
    assert np.allclose(v.invariant, stationary(Q), atol=1e-12)


def test_finite_perturbation_stays_type_ii1():
    mu = MarkovMeasure(FULL2, TransitionSequence(P, 0, [(1, 6, R)], ConstantTail(P)))
    assert classify(mu).verdict == TYPE_II1


def test_different_limits_are_not_conservative():
    mu = MarkovMeasure(FULL2, TransitionSequence(P, 0, (), ConstantTail(R)))
    v = classify(mu)
    assert v.verdict == NOT_CONSERVATIVE and v.reasons == ("StationaryMismatch",)
    assert not conservativeness_necessary(mu).passed


def test_same_stationary_vector_but_different_matrix():
    # both have stationary vector (1/2, 1/2)
    S = np.array([[.5, .5], [.5, .5]])
    T = np.array([[.3, .7], [.7, .3]])
    mu = MarkovMeasure(FULL2, TransitionSequence(S, 0, (), ConstantTail(T)))
    assert classify(mu).reasons == ("TransitionMismatch",)


def test_alternating_tail_is_type_iii1():
    mu = MarkovMeasure(FULL2, TransitionSequence(P, 0, (), AlternatingTail((P, R), 2, 1)))
    v = classify(mu)
    assert v.verdict == TYPE_III1 and v.reasons == ("NoLimit",)
    assert tail_behavior(mu).mode == "DivergentRight"


@pytest.mark.parametrize("family", [FULLSHIFT2, GOLDEN])
def test_constructor_output_is_type_iii1(family):
    mu = build_example_measure(inductive_construct(3), family)
    v = classify(mu)
    assert v.verdict == TYPE_III1 and v.scope_note == PROVEN
    assert v.reasons == ("SeriesDiverges",)


def test_opaque_tail_is_inconclusive():
    tail = OpaqueTail(lambda n: P, infimum=0.4)
    mu = MarkovMeasure(FULL2, TransitionSequence(P, 0, (), tail))
    v = classify(mu)
    assert v.verdict == INCONCLUSIVE_VERDICT and v.reasons == ("TailsUnknown",)
    with pytest.raises(TailsUnknown):
        conservativeness_necessary(mu)


def test_probed_failure_is_reported():
    mu = homogeneous_measure(FULL2, P)
    with pytest.raises(AssumptionViolated):
        classify(mu, Assumptions(conservative="ProbedFail"))
    with pytest.raises(ValueError):
        Assumptions(conservative="Maybe")
    assert classify(mu, Assumptions(conservative="ProbedOK")).verdict == TYPE_II1


def test_scope_outside_two_symbols_and_golden_mean():
    assert dichotomy_scope(FULL2) == PROVEN
    assert dichotomy_scope(GOLDEN_MEAN) == PROVEN
    assert dichotomy_scope(AdjacencyMatrix.full(3)) == BEYOND_PROVEN_SCOPE
    A3 = AdjacencyMatrix.full(3)
    Q = np.full((3, 3), 1 / 3)
    S = np.array([[.2, .4, .4], [.4, .2, .4], [.4, .4, .2]])
    mu = MarkovMeasure(A3, TransitionSequence(Q, 0, (), AlternatingTail((Q, S), 1, 1)))
    assert classify(mu).verdict == TYPE_III1


def test_acim_checks_input():
    lam = acim(P)
    assert np.allclose(lam, [4 / 9, 5 / 9], atol=1e-15)
    with pytest.raises(Exception):
        acim([[.5, .6], [.5, .5]])


def test_to_dict_is_plain():
    d = classify(homogeneous_measure(FULL2, P)).to_dict()
    assert d["verdict"] == TYPE_II1 and isinstance(d["invariant"], list)


def test_divergent_series_beyond_proven_class_carries_scope_note():
    from markov_krieger.tails import Certificate, Plateau, PlateauTail

    A3 = AdjacencyMatrix.full(3)
    Q = np.full((3, 3), 1 / 3)
    S = np.array([[.2, .4, .4], [.4, .2, .4], [.4, .4, .2]])
    tail = PlateauTail(Q, (Plateau(5, 8, S),), frontier=20,
                       deviation=Certificate("Converges", "declared"),
                       weighted_deviation=Certificate("Diverges", "declared"),
                       entry_infimum=0.2)
    mu = MarkovMeasure(A3, TransitionSequence(Q, 0, (), tail))
    v = classify(mu)
    assert v.verdict == TYPE_III1 and v.scope_note == BEYOND_PROVEN_SCOPE
