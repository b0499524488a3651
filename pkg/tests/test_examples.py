import json
from fractions import Fraction
from importlib import resources

import mpmath
import numpy as np
import pytest

from markov_krieger.classifier import TYPE_II1, TYPE_III1, classify
from markov_krieger.cli import example_report
from markov_krieger.errors import IndexBeyondRepresentation, InvalidInterleaving, OutsideDomain, SeedInvalid
from markov_krieger.examples import (
    FULLSHIFT2,
    GOLDEN,
    ConstructorSeeds,
    ExampleInput,
    build_example_measure,
    check_conservativeness_conditions,
    check_nonequivalence_condition,
    check_nonsingularity_condition,
    inductive_construct,
    inverse_lambda,
    lambda_ratio,
    power_decay_input,
    transition_templates,
)
from markov_krieger.hugeint import SymbolicInt, is_concrete
from markov_krieger.tails import CONVERGES, DIVERGES


def _least_n_by_search(m, log_odds, prec=400):
    # smallest N with (N - m)(1 - lambda)^2 >= 1, scanning upward
    with mpmath.workprec(prec):
        gap = (1 - mpmath.exp(mpmath.mpf(log_odds.numerator) / log_odds.denominator)) ** 2
        n = m + int(mpmath.floor(1 / gap)) - 2
        while (n - m) * gap < 1:
            n += 1
        return n


def test_first_round_against_direct_search():
    inp = inductive_construct(2)
    assert inp.M[:2] == (1, 3) and inp.N[0] == 2
    eps = inp.p[1].log_odds_fraction()
    assert eps == Fraction(1, 12)
    n2 = _least_n_by_search(3, eps)
    assert inp.N[1] == n2 == 136
    # least M with (M - 2N) (3/7)^N >= 1
    assert inp.M[2] == 2 * 136 + -(-7 ** 136 // 3 ** 136)
    assert len(str(inp.M[2])) == 51


def test_second_round_is_concrete_and_third_symbolic():
    inp = inductive_construct(3)
    assert is_concrete(inp.N[2]) and len(str(inp.N[2])) == 102
    assert isinstance(inp.M[3], SymbolicInt) and inp.M[3].kind == "ceil_power"
    assert inp.M[3].magnitude().startswith("10^2.895e+101")
    with pytest.raises(IndexBeyondRepresentation):
        int(inp.M[3])


def test_p_values_decrease_toward_half():
    inp = inductive_construct(5)
    vals = [float(v.log_lambda()) for v in inp.p[:3]]
    assert vals[0] > vals[1] > vals[2] > 0
    assert inp.p[3].symbolic and inp.p[3].value() == 0.5


@pytest.mark.parametrize("family", [FULLSHIFT2, GOLDEN])
def test_constructor_conditions_and_verdict(family):
    inp = inductive_construct(3)
    assert check_nonsingularity_condition(inp).status == CONVERGES
    assert check_nonequivalence_condition(inp).status == DIVERGES
    rep = check_conservativeness_conditions(inp)
    assert rep.passed, rep.reasons
    mu = build_example_measure(inp, family)
    v = classify(mu)
    assert v.verdict == TYPE_III1 and v.scope_note == "Proven"


def test_ratio_series_terms():
    rep = check_conservativeness_conditions(inductive_construct(3))
    # first term (3 - 4)(3/7)^2 is negative, later ones are at least 1
    assert rep.eq20.partial_sum == pytest.approx(-9 / 49 + 1 + 0.0, abs=0.2)
    trace = rep.eq19_trace
    assert trace[0]["allowance"] == "seed"
    assert [t["exponent"] for t in trace[1:4]] == [0.25, 0.125, 0.0625]


def test_seed_validation():
    with pytest.raises(SeedInvalid):
        inductive_construct(2, ConstructorSeeds(p1=Fraction(2, 5)))
    with pytest.raises(SeedInvalid):
        inductive_construct(2, ConstructorSeeds(M0=2, N1=2, M1=3))
    with pytest.raises(SeedInvalid):
        inductive_construct(2, ConstructorSeeds(r_ratio=Fraction(2, 3)))
    with pytest.raises(SeedInvalid):
        inductive_construct(2, ConstructorSeeds(r_scale=Fraction(40)))


def test_input_validation():
    with pytest.raises(InvalidInterleaving):
        ExampleInput(Fraction(2, 5), [Fraction(3, 5)], [1, 5], [4, 6])
    with pytest.raises(InvalidInterleaving):
        ExampleInput(Fraction(2, 5), [Fraction(3, 5)], [1, 3], [4])
    ExampleInput(Fraction(2, 5), [Fraction(3, 5)], [1, 5], [4])
    with pytest.raises(OutsideDomain):
        ExampleInput(Fraction(3, 2), [Fraction(3, 5)], [1], [4])
    with pytest.raises(OutsideDomain):
        ExampleInput(Fraction(2, 5), [Fraction(9, 10)], [1], [4], delta0=0.2)


def test_homogeneous_special_case_is_type_ii1():
    inp = ExampleInput(Fraction(2, 5), [Fraction(1, 2)] * 3, [1, 5, 9], [3, 7, 11])
    v = classify(build_example_measure(inp))
    assert v.verdict == TYPE_II1


def test_templates():
    P = transition_templates(FULLSHIFT2, 0.7, 0.4)
    assert np.allclose(P, [[0.7, 0.3], [0.4, 0.6]])
    G = transition_templates(GOLDEN, 0.7, 0.4)
    assert np.allclose(G.sum(axis=1), 1)
    assert lambda_ratio(Fraction(7, 10)) == Fraction(7, 3)
    assert inverse_lambda(Fraction(7, 3)) == Fraction(7, 10)


def test_power_decay_family():
    inp = power_decay_input()
    assert check_nonsingularity_condition(inp).status == CONVERGES
    assert check_nonequivalence_condition(inp).status == DIVERGES
    mu = build_example_measure(inp)
    assert mu.matrix(1)[0, 0] == pytest.approx(0.8)


def test_round_trip_of_inputs():
    inp = power_decay_input(plateaus=5)
    again = ExampleInput.from_dict(json.loads(json.dumps(inp.to_dict())))
    assert again == inp
    c = inductive_construct(3)
    again = ExampleInput.from_dict(c.to_dict())
    assert again.N[:3] == c.N[:3] and again.M[:3] == c.M[:3]


def test_golden_fixture_matches():
    text = resources.files("markov_krieger").joinpath("data/constructor_golden.json").read_text()
    frozen = json.loads(text)
    fresh = json.loads(json.dumps(_plain(example_report(FULLSHIFT2, 3, ConstructorSeeds(), Fraction(2, 5)))))
    for key in ("input", "summary", "audit_holds"):
        assert fresh[key] == frozen[key]
    assert frozen["audit_holds"] is True


def _plain(x):
    from markov_krieger.cli import _plain as plain

    return plain(x)
