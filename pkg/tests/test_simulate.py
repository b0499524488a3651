import csv
import io
import json

import numpy as np
import pytest

from markov_krieger.cocycles import build_configuration, validate_configuration
from markov_krieger.errors import DegenerateVariance, InsufficientWindow, TailsEqual, TailsUnknown
from markov_krieger.examples import build_example_measure, inductive_construct, power_decay_input
from markov_krieger.measure import MarkovMeasure, TransitionSequence, homogeneous_measure
from markov_krieger.simulate import (
    CSV_FIELDS,
    SCHEMA,
    clt_probe,
    conservativeness_probe,
    divergence_probe,
    drift_check,
    endpoint_events,
    lln_probe,
    lln_rate,
    pair_indicator,
    reports_to_csv,
    reports_to_json,
    reversed_kernel,
    sample_coordinates,
    sample_trajectory,
    sample_window,
    sample_window_reversed,
    state_indicator,
    stationary_pair_mean,
)
from markov_krieger.sft import GOLDEN_MEAN
from markov_krieger.tails import AlternatingTail, ConstantTail
from oracles import FULL2, random_raw_measure, stationary

P = np.array([[.5, .5], [.4, .6]])
R = np.array([[.3, .7], [.6, .4]])


def _within(freq, prob, samples, sigmas=4.0):
    se = np.sqrt(np.maximum(prob * (1 - prob), 1e-12) / samples)
    return np.all(np.abs(freq - prob) <= sigmas * se + 0.5 / samples)


@pytest.mark.parametrize("A", [FULL2, GOLDEN_MEAN], ids=["fullshift", "golden"])
def test_single_coordinate_frequencies(A):
    rng = np.random.default_rng(60)
    raw = random_raw_measure(rng, A)
    mu = raw.build()
    n = 100_000
    w = sample_window(mu, -5, 14, n, seed=3).words
    for m in range(14):
        freq = np.bincount(w[:, m], minlength=A.size) / n
        assert _within(freq, raw.marginal(-5 + m), n)


@pytest.mark.parametrize("A", [FULL2, GOLDEN_MEAN], ids=["fullshift", "golden"])
def test_reversed_sampler_three_coordinate_law(A):
    rng = np.random.default_rng(61)
    raw = random_raw_measure(rng, A)
    mu = raw.build()
    n = 100_000
    start = raw.cutoff - 1
    w = sample_window_reversed(mu, start, 6, n, seed=4).words
    exact = raw.window_tensor(start + 2, 3)
    counts = np.zeros(exact.shape)
    np.add.at(counts, (w[:, 2], w[:, 3], w[:, 4]), 1)
    assert _within(counts / n, exact, n)
    assert counts[exact == 0].sum() == 0


def test_sparse_coordinates_joint_law():
    rng = np.random.default_rng(62)
    raw = random_raw_measure(rng, FULL2)
    mu = raw.build()
    n = 100_000
    coords = [-7, 2, 9]
    s = sample_coordinates(mu, coords, n, seed=5)
    exact = raw.window_tensor(-7, 17).sum(axis=tuple(k for k in range(17) if k not in (0, 9, 16)))
    counts = np.zeros((2, 2, 2))
    v = s.values(coords)
    np.add.at(counts, (v[:, 0], v[:, 1], v[:, 2]), 1)
    assert _within(counts / n, exact, n)
    with pytest.raises(InsufficientWindow):
        s.values([0])


def test_streams_are_deterministic_by_index():
    mu = homogeneous_measure(FULL2, P)
    a = sample_window(mu, 0, 50, 10, seed=9).words
    b = sample_window(mu, 0, 50, 10, seed=9).words
    c = sample_window(mu, 0, 50, 4, seed=9, first_index=6).words
    assert np.array_equal(a, b) and np.array_equal(a[6:], c)
    assert not np.array_equal(a, sample_window(mu, 0, 50, 10, seed=10).words)
    t = sample_trajectory(mu, 25, seed=9, index=6)
    assert t.at(-25) in (0, 1) and t.to_dict()["window"] == [-25, 25]
    assert np.array_equal(t.symbols, sample_trajectory(mu, 25, seed=9, index=6).symbols)
    with pytest.raises(InsufficientWindow):
        t.at(26)


def test_stationary_helpers():
    f = pair_indicator(2, 0, 1)
    lam = stationary(P)
    assert stationary_pair_mean(P, f) == pytest.approx(lam[0] * P[0, 1], abs=1e-15)
    Ph = reversed_kernel(P)
    assert np.allclose(Ph.sum(axis=1), 1) and np.allclose(lam @ Ph, lam)
    assert state_indicator(2, 1)[1].tolist() == [1.0, 1.0] and state_indicator(2, 1).sum() == 2


def test_lln_passes_and_negative_control_fails():
    mu = homogeneous_measure(GOLDEN_MEAN, [[.5, 0, .5], [.3, 0, .7], [0, 1, 0]])
    f = pair_indicator(3, 0, 2)
    for side in ("forward", "reverse"):
        rep = lln_probe(mu, f, N=4000, samples=100, seed=1, side=side)
        assert rep.verdict == "Pass" and rep.details["exact_within_band"]
    bad = lln_probe(mu, f, N=4000, samples=100, seed=1, predicted=rep.predicted + 0.05)
    assert bad.verdict == "Fail"
    rate = lln_rate(mu, f, samples=60, seed=2)
    assert rate.verdict == "Pass"
    with pytest.raises(ValueError):
        lln_probe(mu, f, side="sideways")


def test_conservativeness_probe_cases():
    two = MarkovMeasure(FULL2, TransitionSequence(P, 0, (), ConstantTail(R)))
    rep = conservativeness_probe(two, state_indicator(2, 0), N=2000, samples=60, seed=3)
    assert rep.verdict == "ObstructionPresent"
    assert rep.details["forward_within_band"] and rep.details["backward_within_band"]
    with pytest.raises(TailsEqual):
        conservativeness_probe(homogeneous_measure(FULL2, P), state_indicator(2, 0))
    alt = MarkovMeasure(FULL2, TransitionSequence(P, 0, (), AlternatingTail((P, R))))
    with pytest.raises(TailsUnknown):
        conservativeness_probe(alt, state_indicator(2, 0))


def test_clt_and_drift_on_power_decay_family():
    mu = build_example_measure(power_decay_input())
    cfg = build_configuration(mu, 200)
    short = clt_probe(cfg, mu, K=60, samples=4000, seed=0)
    long = clt_probe(cfg, mu, K=200, samples=4000, seed=0)
    assert short.details["mean_within_band"] and long.details["mean_within_band"]
    # the standardized sum is lattice-like for small K and smooths out as K grows
    assert long.empirical < short.empirical and long.verdict == "NormalityNotRejected"
    dr = drift_check(cfg, mu, Ks=(15, 30, 45, 60), samples=4000, seed=0)
    assert dr.verdict == "Pass" and dr.details["exact_decreasing"]


def test_degenerate_variance():
    mu = homogeneous_measure(FULL2, P)
    cfg = validate_configuration(FULL2, [((0, 0, 0), (0, 1, 0))] * 2, [1, 5], [-4, -8])
    with pytest.raises(DegenerateVariance):
        clt_probe(cfg, mu, K=2, samples=100)
    with pytest.raises(DegenerateVariance):
        drift_check(cfg, mu, Ks=(1, 2), samples=100)


def test_divergence_probe_trivial_cases():
    a = np.ones(40)
    full = divergence_probe(a, np.ones((50, 40), dtype=bool))
    assert full.verdict == "Consistent" and full.empirical == 1.0
    empty = divergence_probe(a, np.zeros((50, 40), dtype=bool))
    assert empty.verdict == "Vacuous"
    with pytest.raises(ValueError):
        divergence_probe(a, np.ones((50, 39), dtype=bool))
    with pytest.raises(ValueError):
        divergence_probe(-a, np.ones((50, 40), dtype=bool))


def test_divergence_probe_on_constructor():
    mu = build_example_measure(inductive_construct(3))
    ev = endpoint_events(mu, 0, 0, 400, 300, seed=2)
    bound = mu.mixing_constant().value * mu.delta ** 2
    rep = divergence_probe(np.ones(400), ev, seed=2, lower_bound=bound)
    assert rep.verdict == "Consistent"
    assert rep.details["liminf_above_bound"]


def test_report_serialisation():
    mu = homogeneous_measure(FULL2, P)
    reps = [lln_probe(mu, state_indicator(2, 0), N=500, samples=20, seed=0),
            lln_rate(mu, state_indicator(2, 0), Ns=(100, 400), samples=20, seed=0)]
    j = reports_to_json(reps)
    assert j["schema"] == SCHEMA and len(j["reports"]) == 2
    json.dumps(j)
    rows = list(csv.reader(io.StringIO(reports_to_csv(reps))))
    assert tuple(rows[0]) == CSV_FIELDS
    # one headline row per report plus one per series point
    assert len(rows) == 1 + 1 + 1 + 2
    assert rows[1][0] == "lln_forward" and rows[1][1] == "500"
