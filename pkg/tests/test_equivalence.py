import itertools

import numpy as np
import pytest

from markov_krieger.equivalence import (
    conditional_root_expectation,
    conditional_root_identity,
    dn2_components,
    dn2_term,
    equivalence_test,
    homogeneous_equivalence_test,
    kls_likelihood,
    likelihood_density,
    log_bracket,
    nonsingularity_test,
)
from markov_krieger.errors import AdjacencyMismatch, InadmissibleWord
from markov_krieger.measure import MarkovMeasure, TransitionSequence, homogeneous_measure
from markov_krieger.sft import GOLDEN_MEAN
from markov_krieger.tails import CONVERGES, DIVERGES, INCONCLUSIVE, AlternatingTail, ConstantTail
from oracles import (
    FULL2,
    admissible_words,
    random_raw_measure,
    random_stochastic,
    root_expectation_by_enumeration,
)


def _random_word(rng, A, length):
    words = list(admissible_words(A, length))
    return words[int(rng.integers(len(words)))]


@pytest.mark.parametrize("A", [FULL2, GOLDEN_MEAN], ids=["fullshift", "golden"])
def test_root_identity_three_ways(A):
    rng = np.random.default_rng(21)
    for _ in range(60):
        raw_nu, raw_mu = random_raw_measure(rng, A), random_raw_measure(rng, A)
        nu, mu = raw_nu.build(), raw_mu.build()
        n = int(rng.integers(1, 6))
        inner = _random_word(rng, A, 2 * n - 1)
        boundary = (inner[0], inner[-1])
        brute = root_expectation_by_enumeration(raw_nu, raw_mu, n, inner)
        direct = conditional_root_expectation(nu, mu, n, boundary)
        ident = conditional_root_identity(nu, mu, n, boundary)
        assert direct == pytest.approx(brute, abs=1e-12)
        assert ident == pytest.approx(brute, abs=1e-12)


def test_likelihood_has_mean_one():
    rng = np.random.default_rng(4)
    for A in (FULL2, GOLDEN_MEAN):
        raw_nu, raw_mu = random_raw_measure(rng, A), random_raw_measure(rng, A)
        nu, mu = raw_nu.build(), raw_mu.build()
        for n in range(1, 4):
            total = 0.0
            for w in admissible_words(A, 2 * n + 1):
                total += raw_mu.word_probability(-n, w) * likelihood_density(nu, mu, w, n)
            assert total == pytest.approx(1.0, abs=1e-10)


def test_increment_closed_form_matches_density_ratio():
    rng = np.random.default_rng(8)
    raw_nu, raw_mu = random_raw_measure(rng, GOLDEN_MEAN), random_raw_measure(rng, GOLDEN_MEAN)
    nu, mu = raw_nu.build(), raw_mu.build()
    for n in range(1, 5):
        for w in list(admissible_words(GOLDEN_MEAN, 2 * n + 1))[:20]:
            st = kls_likelihood(nu, mu, w)
            ratio = st.density / likelihood_density(nu, mu, w[1:-1], n - 1) if n > 1 else \
                st.density / (raw_nu.marginal(0)[w[1]] / raw_mu.marginal(0)[w[1]])
            assert st.increment == pytest.approx(ratio, rel=1e-12)
    with pytest.raises(InadmissibleWord):
        kls_likelihood(nu, mu, (0, 1, 1))


def test_coefficients_nonnegative_and_zero_for_identical_measures():
    rng = np.random.default_rng(6)
    raw = random_raw_measure(rng, FULL2)
    mu = raw.build()
    for n in range(1, 10):
        assert dn2_term(mu, mu, n).value == 0.0
    with pytest.raises(ValueError):
        dn2_term(mu, mu, 0)
    nu = random_raw_measure(rng, FULL2).build()
    comp = dn2_components(nu, mu, 3)
    assert (comp >= 0).all() and comp.shape == (2, 2, 2, 2)


def test_series_verdicts_follow_declared_tails():
    P = np.array([[.5, .5], [.4, .6]])
    R = np.array([[.3, .7], [.6, .4]])
    mu = homogeneous_measure(FULL2, P)
    v = equivalence_test(mu, mu, horizon=200)
    assert v.status == CONVERGES and v.partial_sum == 0
    # finitely many changes
    nu = MarkovMeasure(FULL2, TransitionSequence(P, 0, [(1, 4, R)], ConstantTail(P)))
    v = equivalence_test(nu, mu, horizon=200)
    assert v.status == CONVERGES and v.partial_sum > 0
    # a different constant right tail
    nu = MarkovMeasure(FULL2, TransitionSequence(P, 0, (), ConstantTail(R)))
    assert equivalence_test(nu, mu, horizon=200).status == DIVERGES
    # no limit at all
    nu = MarkovMeasure(FULL2, TransitionSequence(P, 0, (), AlternatingTail((P, R))))
    assert equivalence_test(nu, mu, horizon=200).status == DIVERGES
    assert nonsingularity_test(nu, horizon=200).status == DIVERGES
    assert homogeneous_equivalence_test(nu, P, horizon=200).reason == "LimitMismatch"
    # differing left tails
    nu = MarkovMeasure(FULL2, TransitionSequence(R, 0, (), ConstantTail(P)))
    assert equivalence_test(nu, mu, horizon=200).status == DIVERGES
    # numeric only
    assert equivalence_test(nu, mu, horizon=50, tail_policy="none").status == INCONCLUSIVE


def test_adjacency_mismatch():
    a = homogeneous_measure(FULL2, [[.5, .5], [.4, .6]])
    b = homogeneous_measure(GOLDEN_MEAN, random_stochastic(np.random.default_rng(0), GOLDEN_MEAN))
    with pytest.raises(AdjacencyMismatch):
        equivalence_test(a, b)


def test_log_bracket():
    for a, b in itertools.product([0.1, 0.5, 2.0], repeat=2):
        lo, hi = log_bracket(a, b)
        assert lo <= np.log(a / b) + 1e-15 and np.log(a / b) <= hi + 1e-15
        if a != b:
            assert lo < np.log(a / b) < hi
    with pytest.raises(ValueError):
        log_bracket(0.0, 1.0)


def test_horizon_is_clipped_at_a_stored_frontier():
    from markov_krieger.tails import Certificate, Plateau, PlateauTail

    P = np.array([[.5, .5], [.4, .6]])
    tail = PlateauTail(P, (Plateau(5, 8, [[.3, .7], [.2, .8]]),), frontier=20,
                       deviation=Certificate(CONVERGES, "declared"),
                       weighted_deviation=Certificate(DIVERGES, "declared"), entry_infimum=0.2)
    mu = MarkovMeasure(FULL2, TransitionSequence(P, 0, (), tail))
    v = nonsingularity_test(mu, horizon=500)
    assert v.terms_used == 18 and v.status == CONVERGES
    v = homogeneous_equivalence_test(mu, P, horizon=500)
    assert v.terms_used == 18 and v.status == DIVERGES
