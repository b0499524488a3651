import json

import numpy as np
import pytest

from markov_krieger.config import (
    SCHEMA,
    build_measure,
    example_config,
    homogeneous_config,
    load_config,
    loads,
    parse_config,
    two_tailed_config,
)
from markov_krieger.errors import ConfigError
from markov_krieger.examples import FULLSHIFT2, GOLDEN, inductive_construct, power_decay_input
from markov_krieger.sft import GOLDEN_MEAN
from oracles import FULL2, random_stochastic

P = [[.5, .5], [.4, .6]]
R = [[.3, .7], [.6, .4]]


def test_round_trips():
    rng = np.random.default_rng(0)
    configs = [
        homogeneous_config(FULL2, P, seed=4, samples=50),
        homogeneous_config(GOLDEN_MEAN, random_stochastic(rng, GOLDEN_MEAN)),
        two_tailed_config(FULL2, P, R, cutoff=-2, N=500),
        example_config(GOLDEN, inductive_construct(3)),
        example_config(FULLSHIFT2, {"power_decay": {"plateaus": 20}}),
    ]
    for cfg in configs:
        again = loads(cfg.dumps())
        assert again == cfg
        assert json.loads(again.dumps()) == json.loads(cfg.dumps())


def test_random_floats_survive_exactly():
    rng = np.random.default_rng(1)
    Q = random_stochastic(rng, FULL2)
    cfg = loads(homogeneous_config(FULL2, Q).dumps())
    assert np.array_equal(np.array(cfg.measure.left_tail), Q)


def test_built_measures_match():
    mu = build_measure(two_tailed_config(FULL2, P, R, cutoff=-2))
    assert np.allclose(mu.matrix(-5), P) and np.allclose(mu.matrix(3), R)
    ex = build_measure(example_config(FULLSHIFT2, {"power_decay": {"plateaus": 20}}))
    ref = power_decay_input(plateaus=20)
    assert ex.matrix(ref.M[0])[0, 0] == pytest.approx(float(ref.p[0].value()))


def test_load_from_file(tmp_path):
    path = tmp_path / "c.json"
    cfg = homogeneous_config(FULL2, P)
    path.write_text(cfg.dumps())
    assert load_config(str(path)) == cfg


def test_with_run_ignores_missing_overrides():
    cfg = homogeneous_config(FULL2, P, seed=3)
    assert cfg.with_run(seed=None, samples=7).run.seed == 3
    assert cfg.with_run(seed=None, samples=7).run.samples == 7


@pytest.mark.parametrize("data, message", [
    ([], "JSON object"),
    ({"schema": "other/9", "sft": {"adjacency": [[1]]}}, "schema"),
    ({"measure": {}}, "sft"),
    ({"sft": {"adjacency": [[1, 1], [1, 1]]}}, "exactly one"),
    ({"sft": {"adjacency": [[1, 1], [1, 1]]}, "measure": {}}, "left_tail"),
    ({"sft": {"adjacency": [[1, 1], [1, 1]]}, "measure": {"left_tail": [[1]]}}, "shape"),
    ({"sft": {"adjacency": [[1, 1], [1, 1]]},
      "measure": {"left_tail": P, "right_tail": {"kind": "opaque"}}}, "opaque"),
    ({"sft": {"adjacency": [[1, 1], [1, 1]]},
      "measure": {"left_tail": P, "right_tail": {"kind": "spiral"}}}, "unknown tail"),
    ({"sft": {"adjacency": [[1, 1], [1, 1]]}, "example": {"family": "Tent", "input": {}}}, "family"),
    ({"sft": {"adjacency": [[1, 1], [1, 1]]}, "example": {"family": GOLDEN, "input": {}}}, "does not match"),
    ({"sft": {"adjacency": [[1, 1], [1, 1]]}, "measure": {"left_tail": P}, "run": {"seed": "x"}}, "run"),
])
def test_bad_configs(data, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(data)


def test_invalid_json_text():
    with pytest.raises(ConfigError):
        loads("{not json")
    assert json.loads(homogeneous_config(FULL2, P).dumps())["schema"] == SCHEMA
