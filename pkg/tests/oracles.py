"""Brute-force reference computations used by the tests.

Nothing here calls the package's own marginal, bridge or window code. A
random measure is kept as raw data (left matrix, cutoff, segments, tail
description) with a plain ``matrix_at`` rule; the package object is
built from the same data separately.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from markov_krieger.measure import MarkovMeasure, TransitionSequence
from markov_krieger.cocycles import PermutationSpec
from markov_krieger.sft import GOLDEN_MEAN, AdjacencyMatrix, AdmissiblePair, enumerate_blocks, primitivity_index
from markov_krieger.tails import AlternatingTail, ConstantTail, Plateau, PlateauTail

FULL2 = AdjacencyMatrix.full(2)


def random_stochastic(rng, adjacency: AdjacencyMatrix, floor: float = 0.05) -> np.ndarray:
    A = adjacency.entries
    out = np.zeros(A.shape)
    for s in range(A.shape[0]):
        idx = np.flatnonzero(A[s])
        w = rng.dirichlet(np.ones(idx.size))
        out[s, idx] = floor + (1 - floor * idx.size) * w
        out[s, idx] /= out[s, idx].sum()
    return out


def stationary(P: np.ndarray) -> np.ndarray:
    d = P.shape[0]
    system = np.vstack([P.T - np.eye(d), np.ones((1, d))])
    rhs = np.zeros(d + 1)
    rhs[-1] = 1.0
    lam = np.linalg.lstsq(system, rhs, rcond=None)[0]
    return lam / lam.sum()


@dataclass
class RawMeasure:
    adjacency: AdjacencyMatrix
    left: np.ndarray
    cutoff: int
    segments: list            # (start, stop, matrix)
    tail_kind: str
    tail: dict = field(default_factory=dict)

    @property
    def right_start(self) -> int:
        return self.segments[-1][1] if self.segments else self.cutoff + 1

    def matrix_at(self, n: int) -> np.ndarray:
        if n <= self.cutoff:
            return self.left
        for a, b, m in self.segments:
            if a <= n < b:
                return m
        off = n - self.right_start
        if self.tail_kind == "constant":
            return self.tail["matrix"]
        if self.tail_kind == "alternating":
            m, pos, length = 0, 0, self.tail["first_length"]
            while pos + length <= off:
                pos += length
                m += 1
                length = self.tail["first_length"] + m * self.tail["increment"]
            mats = self.tail["matrices"]
            return mats[m % len(mats)]
        for a, b, m in self.tail["plateaus"]:
            if a <= n < b:
                return m
        return self.tail["base"]

    def build(self) -> MarkovMeasure:
        if self.tail_kind == "constant":
            tail = ConstantTail(self.tail["matrix"])
        elif self.tail_kind == "alternating":
            tail = AlternatingTail(tuple(self.tail["matrices"]), self.tail["first_length"],
                                   self.tail["increment"])
        else:
            tail = PlateauTail(self.tail["base"],
                               tuple(Plateau(a, b, m) for a, b, m in self.tail["plateaus"]))
        return MarkovMeasure(self.adjacency, TransitionSequence(self.left, self.cutoff,
                                                                self.segments, tail))

    # -- oracles ----------------------------------------------------------
    def marginal(self, n: int) -> np.ndarray:
        pi = stationary(self.left)
        for k in range(self.cutoff + 1, n):
            pi = pi @ self.matrix_at(k)
        return pi

    def word_probability(self, start: int, word) -> float:
        p = float(self.marginal(start)[word[0]])
        for k in range(len(word) - 1):
            p *= float(self.matrix_at(start + k)[word[k], word[k + 1]])
        return p

    def window_tensor(self, start: int, length: int) -> np.ndarray:
        """Joint law of ``length`` consecutive coordinates, by outer products."""
        T = self.marginal(start)
        for k in range(length - 1):
            P = self.matrix_at(start + k)
            T = T[..., None] * P.reshape((1,) * (T.ndim - 1) + P.shape)
        return T


def random_raw_measure(rng, adjacency: AdjacencyMatrix) -> RawMeasure:
    left = random_stochastic(rng, adjacency)
    cutoff = int(rng.integers(-6, 3))
    segments = []
    pos = cutoff + 1
    for _ in range(int(rng.integers(0, 4))):
        length = int(rng.integers(1, 5))
        segments.append((pos, pos + length, random_stochastic(rng, adjacency)))
        pos += length
    kind = ["constant", "alternating", "plateau"][int(rng.integers(0, 3))]
    if kind == "constant":
        tail = {"matrix": random_stochastic(rng, adjacency)}
    elif kind == "alternating":
        tail = {"matrices": [random_stochastic(rng, adjacency) for _ in range(2)],
                "first_length": int(rng.integers(1, 4)), "increment": int(rng.integers(0, 3))}
    else:
        plats, p = [], pos + int(rng.integers(0, 3))
        for _ in range(int(rng.integers(1, 3))):
            length = int(rng.integers(1, 5))
            plats.append((p, p + length, random_stochastic(rng, adjacency)))
            p += length + int(rng.integers(1, 4))
        tail = {"base": random_stochastic(rng, adjacency), "plateaus": plats}
    return RawMeasure(adjacency, left, cutoff, segments, kind, tail)


def multi_cylinder_by_enumeration(raw: RawMeasure, parts) -> float:
    """Sum the window law over every filling of the gaps between cylinders."""
    parts = sorted(parts, key=lambda c: c[0])
    start = parts[0][0]
    stop = max(i + len(b) for i, b in parts)
    T = raw.window_tensor(start, stop - start)
    index = [slice(None)] * (stop - start)
    for i, block in parts:
        for k, s in enumerate(block):
            index[i - start + k] = s
    return float(T[tuple(index)].sum())


def admissible_words(adjacency: AdjacencyMatrix, length: int):
    A = adjacency.entries
    for w in itertools.product(range(adjacency.size), repeat=length):
        if all(A[w[k], w[k + 1]] for k in range(length - 1)):
            yield w


ADJACENCIES = {"fullshift": FULL2, "golden": GOLDEN_MEAN}


def root_expectation_by_enumeration(raw_nu, raw_mu, n, inner):
    """``E_mu(sqrt(m_n / m_{n-1}) | inner word on [-(n-1), n-1])`` from word probabilities."""
    A = raw_mu.adjacency.entries
    m_prev = raw_nu.word_probability(-(n - 1), inner) / raw_mu.word_probability(-(n - 1), inner)
    base = raw_mu.word_probability(-(n - 1), inner)
    total = 0.0
    for s in range(A.shape[0]):
        if not A[s, inner[0]]:
            continue
        for t in range(A.shape[0]):
            if not A[inner[-1], t]:
                continue
            word = (s,) + tuple(inner) + (t,)
            p_mu = raw_mu.word_probability(-n, word)
            m_n = raw_nu.word_probability(-n, word) / p_mu
            total += (p_mu / base) * np.sqrt(m_n / m_prev)
    return total


def random_spec(rng, A, kind="Asymmetric"):
    d = A.size
    while True:
        # some lengths have no two blocks with common endpoints on the Golden Mean
        L = int(rng.integers(3, 6))
        a, b = int(rng.integers(d)), int(rng.integers(d))
        blocks = enumerate_blocks(A, a, b, L)
        if len(blocks) >= 2:
            break
    x, y = rng.choice(len(blocks), size=2, replace=False)
    pair = AdmissiblePair(blocks[x], blocks[y])
    # i < 0 < j and at least L + M apart, so both cells carry mass
    M = primitivity_index(A).exponent
    i = -L - M + 1 - int(rng.integers(0, 3))
    j = 1 + int(rng.integers(0, 3))
    return PermutationSpec(kind, pair, i, j)


def cell_words(A, spec, first, second):
    # words on [i, j + L) with ``first`` at i and ``second`` at j
    L = spec.pair.length
    gap = spec.j - spec.i - L
    E = A.entries
    for mid in itertools.product(range(A.size), repeat=gap):
        w = tuple(first) + mid + tuple(second)
        if all(E[w[k], w[k + 1]] for k in range(len(w) - 1)):
            yield w


def derivative_by_enumeration(raw, spec):
    # every word in the forward cell has the same probability ratio with its image
    B, Bp = tuple(spec.pair.first.symbols), tuple(spec.pair.second.symbols)
    L = len(B)
    ratios = []
    for w in cell_words(raw.adjacency, spec, B, Bp):
        img = Bp + w[L:-L] + B
        ratios.append(raw.word_probability(spec.i, img) / raw.word_probability(spec.i, w))
    return ratios
