"""JSON configuration format.

A config has up to four sections::

    {"schema": "markov-krieger/1",
     "sft": {"states": [...], "adjacency": [[...]]},
     "measure": {"left_tail": [[...]], "left_cutoff": 0, "segments": [...],
                 "right_tail": {"kind": "constant", "matrix": [[...]]}, "anchor": null},
     "example": {"family": "Fullshift2", "input": {...}},
     "run": {"horizon": 10000, "seed": 0, ...}}

Exactly one of ``measure`` and ``example`` describes the measure. Parsed
configs are frozen dataclasses of tuples, so two parses of the same text
compare equal, and :meth:`Config.to_dict` re-parses to an equal object.
Opaque tails wrap arbitrary callables and have no config form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigError
from .examples import FAMILIES, ExampleInput, build_example_measure, family_adjacency, power_decay_input
from .measure import MarkovMeasure, TransitionSequence
from .sft import AdjacencyMatrix
from .tails import AlternatingTail, ConstantTail, Plateau, PlateauTail

SCHEMA = "markov-krieger/1"


def _matrix(rows, d: int, label: str) -> tuple:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{label} is not a numeric matrix") from None
    if arr.shape != (d, d):
        raise ConfigError(f"{label} has shape {arr.shape}, expected {(d, d)}")
    return tuple(tuple(float(x) for x in row) for row in arr)


def _rows(m) -> list:
    return [list(r) for r in m]


@dataclass(frozen=True)
class TailConfig:
    kind: str
    matrix: Optional[tuple] = None
    matrices: tuple = ()
    first_length: int = 1
    increment: int = 1
    plateaus: tuple = ()          # (start, stop, matrix)

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "matrix": _rows(self.matrix)}
        if self.kind == "alternating":
            return {"kind": "alternating", "matrices": [_rows(m) for m in self.matrices],
                    "first_length": self.first_length, "increment": self.increment}
        return {"kind": "plateau", "matrix": _rows(self.matrix),
                "plateaus": [{"start": a, "stop": b, "matrix": _rows(m)} for a, b, m in self.plateaus]}

    def build(self):
        if self.kind == "constant":
            return ConstantTail(np.array(self.matrix))
        if self.kind == "alternating":
            return AlternatingTail(tuple(np.array(m) for m in self.matrices),
                                   self.first_length, self.increment)
        return PlateauTail(np.array(self.matrix),
                           tuple(Plateau(a, b, np.array(m)) for a, b, m in self.plateaus))


@dataclass(frozen=True)
class MeasureConfig:
    left_tail: tuple
    left_cutoff: int = 0
    segments: tuple = ()          # (start, stop, matrix)
    right_tail: Optional[TailConfig] = None
    anchor: Optional[tuple] = None

    def to_dict(self) -> dict:
        out = {"left_tail": _rows(self.left_tail), "left_cutoff": self.left_cutoff,
               "segments": [{"start": a, "stop": b, "matrix": _rows(m)} for a, b, m in self.segments],
               "right_tail": None if self.right_tail is None else self.right_tail.to_dict(),
               "anchor": None if self.anchor is None else list(self.anchor)}
        return out


@dataclass(frozen=True)
class ExampleConfig:
    family: str
    input: str                    # canonical JSON of the ExampleInput description

    def to_dict(self) -> dict:
        return {"family": self.family, "input": json.loads(self.input)}

    def example_input(self) -> ExampleInput:
        data = json.loads(self.input)
        if "power_decay" in data:
            return power_decay_input(**data["power_decay"])
        return ExampleInput.from_dict(data)


@dataclass(frozen=True)
class RunConfig:
    horizon: int = 10_000
    seed: int = 0
    samples: int = 200
    N: int = 10_000
    K: int = 50
    window: tuple = (-4, 5)
    sigmas: float = 4.0
    ks_threshold: float = 0.05
    probe_function: tuple = ("state", 0)

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "seed": self.seed, "samples": self.samples, "N": self.N,
                "K": self.K, "window": list(self.window),
                "tolerances": {"sigmas": self.sigmas, "ks_threshold": self.ks_threshold},
                "probe_function": list(self.probe_function)}


@dataclass(frozen=True)
class Config:
    sft: AdjacencyMatrix
    measure: Optional[MeasureConfig] = None
    example: Optional[ExampleConfig] = None
    run: RunConfig = field(default_factory=RunConfig)

    def to_dict(self) -> dict:
        out = {"schema": SCHEMA,
               "sft": {"states": list(self.sft.states), "adjacency": self.sft.to_rows()}}
        if self.measure is not None:
            out["measure"] = self.measure.to_dict()
        if self.example is not None:
            out["example"] = self.example.to_dict()
        out["run"] = self.run.to_dict()
        return out

    def dumps(self) -> str:
        # json writes floats with repr, which round-trips exactly
        return json.dumps(self.to_dict(), indent=2)

    def with_run(self, **changes) -> "Config":
        return replace(self, run=replace(self.run, **{k: v for k, v in changes.items() if v is not None}))


# ---------------------------------------------------------------------------
# parsing


def _parse_tail(data, d: int) -> TailConfig:
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError("right_tail needs a 'kind'")
    kind = data["kind"]
    if kind == "constant":
        return TailConfig("constant", matrix=_matrix(data.get("matrix"), d, "right_tail.matrix"))
    if kind == "alternating":
        mats = tuple(_matrix(m, d, f"right_tail.matrices[{k}]") for k, m in enumerate(data.get("matrices", ())))
        return TailConfig("alternating", matrices=mats, first_length=int(data.get("first_length", 1)),
                          increment=int(data.get("increment", 1)))
    if kind == "plateau":
        plats = tuple((int(p["start"]), int(p["stop"]), _matrix(p["matrix"], d, f"plateau[{k}]"))
                      for k, p in enumerate(data.get("plateaus", ())))
        return TailConfig("plateau", matrix=_matrix(data.get("matrix"), d, "right_tail.matrix"),
                          plateaus=plats)
    if kind == "opaque":
        raise ConfigError("opaque tails wrap Python callables and cannot be configured")
    raise ConfigError(f"unknown tail kind {kind!r}")


def _parse_measure(data: dict, d: int) -> MeasureConfig:
    if "left_tail" not in data:
        raise ConfigError("measure needs a left_tail")
    segs = tuple((int(s["start"]), int(s["stop"]), _matrix(s["matrix"], d, f"segments[{k}]"))
                 for k, s in enumerate(data.get("segments", ())))
    rt = data.get("right_tail")
    anchor = data.get("anchor")
    if anchor is not None:
        anchor = tuple(float(x) for x in anchor)
        if len(anchor) != d:
            raise ConfigError(f"anchor has {len(anchor)} entries, expected {d}")
    return MeasureConfig(_matrix(data["left_tail"], d, "left_tail"), int(data.get("left_cutoff", 0)),
                         segs, None if rt is None else _parse_tail(rt, d), anchor)


def _parse_example(data: dict, sft: AdjacencyMatrix) -> ExampleConfig:
    family = data.get("family")
    if family not in FAMILIES:
        raise ConfigError(f"unknown example family {family!r}; expected one of {list(FAMILIES)}")
    if family_adjacency(family) != sft:
        raise ConfigError(f"sft section does not match the {family} adjacency")
    inp = data.get("input")
    if not isinstance(inp, dict):
        raise ConfigError("example needs an 'input' object")
    return ExampleConfig(family, json.dumps(inp, sort_keys=True))


def _parse_run(data: dict) -> RunConfig:
    tol = data.get("tolerances", {})
    base = RunConfig()
    try:
        return RunConfig(int(data.get("horizon", base.horizon)), int(data.get("seed", base.seed)),
                         int(data.get("samples", base.samples)), int(data.get("N", base.N)),
                         int(data.get("K", base.K)),
                         tuple(int(x) for x in data.get("window", base.window)),
                         float(tol.get("sigmas", base.sigmas)),
                         float(tol.get("ks_threshold", base.ks_threshold)),
                         tuple(data.get("probe_function", base.probe_function)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad run section: {exc}") from None


def parse_config(data: dict) -> Config:
    """Validate the shape of a config mapping and freeze it."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    schema = data.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise ConfigError(f"unsupported schema {schema!r}")
    if "sft" not in data:
        raise ConfigError("config needs an 'sft' section")
    s = data["sft"]
    sft = AdjacencyMatrix.from_rows(s["adjacency"], s.get("states"))
    measure = _parse_measure(data["measure"], sft.size) if data.get("measure") is not None else None
    example = _parse_example(data["example"], sft) if data.get("example") is not None else None
    if (measure is None) == (example is None):
        raise ConfigError("exactly one of 'measure' and 'example' is required")
    return Config(sft, measure, example, _parse_run(data.get("run", {})))


def loads(text: str) -> Config:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    return parse_config(data)


def load_config(path: str) -> Config:
    with open(path) as fh:
        return loads(fh.read())


# ---------------------------------------------------------------------------
# building


def build_measure(cfg: Config) -> MarkovMeasure:
    if cfg.example is not None:
        return build_example_measure(cfg.example.example_input(), cfg.example.family)
    m = cfg.measure
    right = None if m.right_tail is None else m.right_tail.build()
    ts = TransitionSequence(np.array(m.left_tail), m.left_cutoff,
                            [(a, b, np.array(mat)) for a, b, mat in m.segments], right)
    return MarkovMeasure(cfg.sft, ts, anchor=None if m.anchor is None else np.array(m.anchor))


def homogeneous_config(adjacency: AdjacencyMatrix, matrix, **run) -> Config:
    d = adjacency.size
    mat = _matrix(matrix, d, "matrix")
    return Config(adjacency, MeasureConfig(mat, 0, (), TailConfig("constant", matrix=mat)),
                  run=replace(RunConfig(), **run))


def two_tailed_config(adjacency: AdjacencyMatrix, left, right, cutoff: int = 0, **run) -> Config:
    d = adjacency.size
    return Config(adjacency, MeasureConfig(_matrix(left, d, "left"), cutoff, (),
                                           TailConfig("constant", matrix=_matrix(right, d, "right"))),
                  run=replace(RunConfig(), **run))


def example_config(family: str, inp: ExampleInput | dict, **run) -> Config:
    data = inp.to_dict() if isinstance(inp, ExampleInput) else dict(inp)
    return Config(family_adjacency(family), example=ExampleConfig(family, json.dumps(data, sort_keys=True)),
                  run=replace(RunConfig(), **run))
