import numpy as np
import pytest

from markov_krieger.errors import (
    AnchorNotStationary,
    DoeblinViolation,
    InequalityViolated,
    OverlappingRanges,
    SupportMismatch,
)
from markov_krieger.measure import (
    MarkovMeasure,
    TransitionSequence,
    check_mixing_inequalities,
    enumerate_window,
    homogeneous_measure,
    mixing_constant,
    window_distribution,
)
from markov_krieger.sft import GOLDEN_MEAN, Block, Cylinder
from markov_krieger.tails import ConstantTail, Plateau, PlateauTail
from oracles import ADJACENCIES, FULL2, admissible_words, multi_cylinder_by_enumeration, random_raw_measure


@pytest.mark.parametrize("name", ["fullshift", "golden"])
def test_marginals_match_forward_propagation(name):
    rng = np.random.default_rng(11)
    for _ in range(15):
        raw = random_raw_measure(rng, ADJACENCIES[name])
        mu = raw.build()
        for n in range(raw.cutoff - 3, raw.right_start + 12):
            assert np.allclose(mu.coordinate_distribution(n), raw.marginal(n), atol=1e-13)
            assert np.array_equal(mu.matrix(n), raw.matrix_at(n))


def test_marginals_satisfy_the_compatibility_relation():
    rng = np.random.default_rng(3)
    raw = random_raw_measure(rng, GOLDEN_MEAN)
    mu = raw.build()
    for n in range(-5, 30):
        lhs = mu.coordinate_distribution(n) @ mu.matrix(n)
        assert np.allclose(lhs, mu.coordinate_distribution(n + 1), atol=1e-14)


def test_multi_cylinder_matches_gap_enumeration():
    rng = np.random.default_rng(5)
    for trial in range(30):
        A = FULL2 if trial % 2 else GOLDEN_MEAN
        raw = random_raw_measure(rng, A)
        mu = raw.build()
        start = int(rng.integers(-8, 8))
        words = list(admissible_words(A, 3))
        parts = []
        pos = start
        for _ in range(int(rng.integers(1, 4))):
            w = words[int(rng.integers(len(words)))]
            parts.append((pos, w))
            pos += 3 + int(rng.integers(0, 3))
        got = mu.multi_cylinder_measure([Cylinder(i, Block(w)) for i, w in parts])
        want = multi_cylinder_by_enumeration(raw, parts)
        assert got == pytest.approx(want, abs=1e-12)


def test_window_law_sums_to_one_and_matches_words():
    rng = np.random.default_rng(7)
    raw = random_raw_measure(rng, GOLDEN_MEAN)
    mu = raw.build()
    T = window_distribution(mu, -2, 6)
    assert T.sum() == pytest.approx(1.0, abs=1e-13)
    total = 0.0
    for word, p in enumerate_window(mu, -2, 6):
        assert p == pytest.approx(raw.word_probability(-2, word), abs=1e-14)
        total += p
    assert total == pytest.approx(1.0, abs=1e-13)


def test_bridge_and_reverse_kernels():
    rng = np.random.default_rng(9)
    raw = random_raw_measure(rng, FULL2)
    mu = raw.build()
    for a in range(-3, 6):
        for b in range(a, a + 5):
            B = mu.bridge(a, b)
            want = np.eye(2)
            for k in range(a, b):
                want = want @ raw.matrix_at(k)
            assert np.allclose(B, want, atol=1e-14)
        R = mu.reverse_matrix(a)
        assert np.allclose(R.sum(axis=1), 1.0)
        # time reversal reproduces the pair law
        pair = raw.marginal(a - 1)[:, None] * raw.matrix_at(a - 1)
        assert np.allclose(mu.coordinate_distribution(a)[:, None] * R, pair.T, atol=1e-14)


def test_mixing_inequalities_hold_on_random_measures():
    rng = np.random.default_rng(13)
    for A in (FULL2, GOLDEN_MEAN):
        raw = random_raw_measure(rng, A)
        rep = check_mixing_inequalities(raw.build(), (-3, 5))
        assert rep.passed and rep.checks > 0


def test_mixing_constant_formula_and_warning():
    c = mixing_constant(0.3, 3)
    assert c.value == 0.3 ** 3 / (1 - 0.3 ** 3)
    assert not c.warning
    assert mixing_constant(0.9, 1).warning
    with pytest.raises(ValueError):
        mixing_constant(0.0, 1)


def test_doeblin_and_support_checks():
    with pytest.raises(SupportMismatch):
        homogeneous_measure(GOLDEN_MEAN, [[.5, .5, 0], [.5, 0, .5], [0, 1, 0]])
    # a zero on an allowed entry is a support error, not a Doeblin one
    with pytest.raises(SupportMismatch):
        homogeneous_measure(FULL2, [[1.0, 0.0], [.5, .5]])
    # an unbounded plateau family with no certified infimum
    P = np.array([[.5, .5], [.4, .6]])
    tail = PlateauTail(P, (Plateau(1, 3, [[.3, .7], [.2, .8]]),), frontier=10)
    with pytest.raises(DoeblinViolation):
        MarkovMeasure(FULL2, TransitionSequence(P, 0, (), tail))
    mu = homogeneous_measure(FULL2, [[.5, .5], [.4, .6]])
    assert mu.delta == 0.4 and mu.primitivity == 1


def test_anchor_must_be_stationary():
    P = np.array([[.5, .5], [.4, .6]])
    ts = TransitionSequence(P, 0, (), ConstantTail(P))
    MarkovMeasure(FULL2, ts, anchor=[4 / 9, 5 / 9])
    with pytest.raises(AnchorNotStationary):
        MarkovMeasure(FULL2, ts, anchor=[.5, .5])


def test_overlapping_cylinders_rejected():
    mu = homogeneous_measure(FULL2, [[.5, .5], [.4, .6]])
    with pytest.raises(OverlappingRanges):
        mu.multi_cylinder_measure([Cylinder(0, Block((0, 1, 0))), Cylinder(2, Block((0, 1)))])


def test_cylinder_bounds_hold():
    rng = np.random.default_rng(17)
    raw = random_raw_measure(rng, GOLDEN_MEAN)
    mu = raw.build()
    for w in admissible_words(GOLDEN_MEAN, 4):
        lo, hi = mu.cylinder_bounds(Block(w))
        for i in range(-4, 12):
            m = mu.cylinder_measure(Cylinder(i, Block(w)))
            assert lo - 1e-15 <= m <= hi + 1e-15


def test_sandwich_ratio_stays_above_the_constant():
    mu = homogeneous_measure(FULL2, [[.9, .1], [.1, .9]])
    rep = check_mixing_inequalities(mu, (0, 6))
    assert rep.worst_lower_ratio >= rep.constant
    assert InequalityViolated.exit_code == 4
