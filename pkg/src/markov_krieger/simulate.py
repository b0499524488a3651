"""Sampling of finite windows and Monte Carlo probes.

Every trajectory has its own counter-based stream (Philox keyed by
``SeedSequence([seed, index])``), so results depend only on the seed and
the trajectory index, never on batch sizes. Trajectories are then advanced
together, one coordinate at a time, by inverse-CDF draws.

The probes corroborate the classifier and never certify anything. Mean
comparisons use a 4 sigma band; the CLT probe uses a Kolmogorov distance
threshold of 0.05.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .classifier import tail_behavior
from .cocycles import (
    AdmissibleConfiguration,
    WindowSamples,
    dk_sequence,
    log_sum_moments,
    y_marginal,
    yk_samples,
)
from .errors import DegenerateVariance, InsufficientWindow, TailsEqual, TailsUnknown
from .linalg import matrices_equal, stationary_vector
from .measure import MarkovMeasure

SIGMAS = 4.0
KS_THRESHOLD = 0.05
# mean of the Kolmogorov distribution, the typical size of sqrt(n) * KS under the null
KOLMOGOROV_MEAN = 0.8687
SCHEMA = "markov-krieger/1"

_FORWARD_TAG = 0
_REVERSED_TAG = 1
_SPARSE_TAG = 2


def _stream(seed: int, index: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index, tag])))


def _uniforms(seed: int, count: int, width: int, tag: int, first: int = 0) -> np.ndarray:
    out = np.empty((count, width))
    for t in range(count):
        out[t] = _stream(seed, first + t, tag).random(width)
    return out


def _draw(rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    # rows[t] is the law of the next symbol of trajectory t
    cum = np.cumsum(rows, axis=1)
    idx = (u[:, None] >= cum).sum(axis=1)
    return np.minimum(idx, rows.shape[1] - 1)


# ---------------------------------------------------------------------------
# samplers


@dataclass(frozen=True)
class Trajectory:
    """One sampled word on the window ``[-N, N]``."""

    N: int
    symbols: np.ndarray
    seed: int
    index: int = 0

    def at(self, n: int) -> int:
        if not -self.N <= n <= self.N:
            raise InsufficientWindow(f"coordinate {n} outside [-{self.N}, {self.N}]")
        return int(self.symbols[n + self.N])

    def to_dict(self) -> dict:
        return {"window": [-self.N, self.N], "seed": self.seed, "index": self.index,
                "symbols": self.symbols.tolist()}


def sample_window(mu: MarkovMeasure, start: int, length: int, samples: int, seed: int,
                  first_index: int = 0) -> WindowSamples:
    """Sample ``(X_start, ..., X_{start+length-1})`` for trajectories
    ``first_index, first_index+1, ...``.

    ``X_start`` is drawn from ``pi_start`` and later coordinates forward
    through ``P_n``, which gives the exact finite-dimensional law.
    """
    if length < 1 or samples < 1:
        raise ValueError("need length >= 1 and samples >= 1")
    u = _uniforms(seed, samples, length, _FORWARD_TAG, first_index)
    words = np.empty((samples, length), dtype=np.int64)
    pi = np.asarray(mu.coordinate_distribution(start))
    words[:, 0] = _draw(np.broadcast_to(pi, (samples, pi.size)), u[:, 0])
    for m in range(1, length):
        P = mu.matrix(start + m - 1)
        words[:, m] = _draw(P[words[:, m - 1]], u[:, m])
    return WindowSamples(start, words)


def sample_window_reversed(mu: MarkovMeasure, start: int, length: int, samples: int,
                           seed: int, first_index: int = 0) -> WindowSamples:
    """Same law as :func:`sample_window`, drawn right to left.

    The last coordinate comes from its marginal and each earlier one from
    the reversed kernel ``Phat_n(s, t) = P(X_{n-1} = t | X_n = s)``.
    """
    if length < 1 or samples < 1:
        raise ValueError("need length >= 1 and samples >= 1")
    u = _uniforms(seed, samples, length, _REVERSED_TAG, first_index)
    words = np.empty((samples, length), dtype=np.int64)
    last = start + length - 1
    pi = np.asarray(mu.coordinate_distribution(last))
    words[:, -1] = _draw(np.broadcast_to(pi, (samples, pi.size)), u[:, 0])
    for m in range(1, length):
        n = last - m + 1
        R = mu.reverse_matrix(n)
        words[:, length - 1 - m] = _draw(R[words[:, length - m]], u[:, m])
    return WindowSamples(start, words)


def sample_trajectory(mu: MarkovMeasure, N: int, seed: int, index: int = 0) -> Trajectory:
    """Exact sample of ``(X_{-N}, ..., X_N)`` from stream ``index``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    w = sample_window(mu, -N, 2 * N + 1, 1, seed, first_index=index)
    return Trajectory(N, w.words[0].copy(), seed, index)


class SparseSamples:
    """Samples of selected coordinates only.

    Consecutive requested coordinates are linked through bridges, so the
    joint law of the selected coordinates is exact while the gaps between
    them are never simulated.
    """

    def __init__(self, coords: Sequence[int], words: np.ndarray):
        self.coords = list(coords)
        self.words = words
        self._pos = {c: k for k, c in enumerate(self.coords)}

    def values(self, coords: Sequence[int]) -> np.ndarray:
        try:
            idx = [self._pos[c] for c in coords]
        except KeyError as exc:
            raise InsufficientWindow(f"coordinate {exc.args[0]} was not sampled") from None
        return self.words[:, idx]


def sample_coordinates(mu: MarkovMeasure, coords: Sequence[int], samples: int,
                       seed: int, first_index: int = 0) -> SparseSamples:
    coords = sorted(set(int(c) for c in coords))
    if not coords:
        raise ValueError("no coordinates requested")
    u = _uniforms(seed, samples, len(coords), _SPARSE_TAG, first_index)
    words = np.empty((samples, len(coords)), dtype=np.int64)
    pi = np.asarray(mu.coordinate_distribution(coords[0]))
    words[:, 0] = _draw(np.broadcast_to(pi, (samples, pi.size)), u[:, 0])
    for m in range(1, len(coords)):
        B = mu.bridge(coords[m - 1], coords[m])
        words[:, m] = _draw(B[words[:, m - 1]], u[:, m])
    return SparseSamples(coords, words)


# ---------------------------------------------------------------------------
# reports


@dataclass
class ProbeReport:
    """Outcome of one Monte Carlo statistic.

    ``stderr`` is floored at half a count (half the resolution of one value
    divided by ``samples``) so that it stays positive for degenerate
    indicators.
    """

    statistic: str
    empirical: float
    predicted: float
    stderr: float
    verdict: str
    confidence: str = f"{SIGMAS:g} sigma"
    samples: int = 0
    seed: Optional[int] = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "empirical": self.empirical,
                "predicted": self.predicted, "stderr": self.stderr, "verdict": self.verdict,
                "confidence": self.confidence, "samples": self.samples, "seed": self.seed,
                "details": _plain(self.details)}


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _stderr(values: np.ndarray, resolution: float = 1.0) -> float:
    # resolution is the smallest step of a single value (1/N for an average of N indicators)
    n = len(values)
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return max(se, 0.5 * resolution / max(n, 1))


CSV_FIELDS = ("statistic", "N", "value", "predicted", "se", "verdict", "samples", "seed")


def _report_rows(r: ProbeReport) -> list:
    # one headline row, plus one row per point of any series in the details
    n = r.details.get("N", r.details.get("K", ""))
    rows = [[r.statistic, n if not isinstance(n, (list, tuple)) else "", r.empirical, r.predicted,
             r.stderr, r.verdict, r.samples, r.seed]]
    for point in r.details.get("series", ()):
        rows.append([f"{r.statistic}:{point['name']}", point["N"], point["value"],
                     point.get("predicted", ""), point.get("se", ""), "", r.samples, r.seed])
    return rows


def reports_to_json(reports: Sequence[ProbeReport]) -> dict:
    return {"schema": SCHEMA, "reports": [r.to_dict() for r in reports]}


def reports_to_csv(reports: Sequence[ProbeReport]) -> str:
    """Plot-ready rows: statistic, N, value, predicted value, standard error."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in reports:
        for row in _report_rows(r):
            w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# function tables


def state_indicator(size: int, t0: int) -> np.ndarray:
    """Table of ``f(s, t) = 1[s == t0]``."""
    f = np.zeros((size, size))
    f[t0, :] = 1.0
    return f


def pair_indicator(size: int, s0: int, t0: int) -> np.ndarray:
    f = np.zeros((size, size))
    f[s0, t0] = 1.0
    return f


def _table(mu: MarkovMeasure, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (mu.size, mu.size):
        raise ValueError(f"function table must have shape {(mu.size, mu.size)}")
    return f


def stationary_pair_mean(P, f) -> float:
    """``sum_{s,t} lambda(s) P(s,t) f(s,t)`` for the stationary ``lambda`` of ``P``."""
    P = np.asarray(P, dtype=float)
    lam = stationary_vector(P)
    return float(np.sum(lam[:, None] * P * np.asarray(f, dtype=float)))


def reversed_kernel(P) -> np.ndarray:
    """``Phat(s, t) = lambda(t) P(t, s) / lambda(s)`` for the stationary chain of ``P``."""
    P = np.asarray(P, dtype=float)
    lam = stationary_vector(P)
    return P.T * lam[None, :] / lam[:, None]


# ---------------------------------------------------------------------------
# LLN


def _forward_pairs(words: np.ndarray, f: np.ndarray) -> np.ndarray:
    return f[words[:, :-1], words[:, 1:]]


def _exact_forward_mean(mu: MarkovMeasure, f: np.ndarray, first: int, N: int) -> float:
    # mean over n = first .. first+N-1 of E f(X_n, X_{n+1})
    pi = np.asarray(mu.coordinate_distribution(first), dtype=float)
    total = 0.0
    for n in range(first, first + N):
        P = mu.matrix(n)
        total += float(np.sum(pi[:, None] * P * f))
        pi = pi @ P
    return total / N


def lln_probe(mu: MarkovMeasure, f, N: int = 10_000, samples: int = 200, seed: int = 0,
              side: str = "forward", predicted: Optional[float] = None,
              sigmas: float = SIGMAS) -> ProbeReport:
    """Frequency of a pair function along one side of the chain.

    The forward side averages ``f(X_n, X_{n+1})`` over ``n = 1..N`` and is
    compared with ``sum lambda(s) Q(s,t) f(s,t)`` for the right limit
    ``Q``. The reversed side averages ``f(X_{-n}, X_{-n-1})`` and uses the
    reversed kernel of the left limit. ``predicted`` overrides the limit
    value (negative controls). The band is ``sigmas`` standard errors wide.

    Raises
    ------
    TailsUnknown
        If the limit needed for the prediction is not declared.
    """
    f = _table(mu, f)
    tb = tail_behavior(mu)
    if side == "forward":
        if tb.right is None:
            raise TailsUnknown(f"no declared right limit (tail mode {tb.mode})")
        limit = stationary_pair_mean(tb.right, f)
        w = sample_window(mu, 1, N + 1, samples, seed).words
        vals = _forward_pairs(w, f).mean(axis=1)
        exact = _exact_forward_mean(mu, f, 1, N)
    elif side == "reverse":
        if tb.left is None:
            raise TailsUnknown("no declared left limit")
        limit = stationary_pair_mean(reversed_kernel(tb.left), f)
        # coordinates -N-1 .. -1; pair (X_{-n}, X_{-n-1}) is (words[m+1], words[m])
        w = sample_window(mu, -N - 1, N + 1, samples, seed).words
        vals = f[w[:, 1:], w[:, :-1]].mean(axis=1)
        exact = _exact_forward_mean(mu, f.T, -N - 1, N)
    else:
        raise ValueError("side must be 'forward' or 'reverse'")
    pred = float(limit) if predicted is None else float(predicted)
    emp = float(vals.mean())
    se = _stderr(vals, 1.0 / N)
    verdict = "Pass" if abs(emp - pred) <= sigmas * se else "Fail"
    return ProbeReport(f"lln_{side}", emp, pred, se, verdict, confidence=f"{sigmas:g} sigma",
                       samples=samples, seed=seed, details={"N": N, "limit": limit, "exact_finite_mean": exact,
                                "exact_within_band": abs(emp - exact) <= sigmas * se})


def lln_rate(mu: MarkovMeasure, f, Ns: Sequence[int] = (250, 1000, 4000, 16000),
             samples: int = 100, seed: int = 0) -> ProbeReport:
    """Log-log slope of the RMS error of forward frequencies against ``N``.

    Passes when the slope is within 0.2 of ``-1/2``.
    """
    f = _table(mu, f)
    tb = tail_behavior(mu)
    if tb.right is None:
        raise TailsUnknown(f"no declared right limit (tail mode {tb.mode})")
    limit = stationary_pair_mean(tb.right, f)
    rmse = []
    for N in Ns:
        w = sample_window(mu, 1, N + 1, samples, seed).words
        err = _forward_pairs(w, f).mean(axis=1) - limit
        rmse.append(float(np.sqrt(np.mean(err ** 2))))
    slope, _ = np.polyfit(np.log(Ns), np.log(rmse), 1)
    # spread of the slope over resamples of the error sizes is about 1/sqrt(2 samples) per point
    se = float(1.0 / math.sqrt(2 * samples) / np.std(np.log(Ns)) / math.sqrt(len(Ns)))
    verdict = "Pass" if abs(slope + 0.5) <= 0.2 else "Fail"
    return ProbeReport("lln_rate_slope", float(slope), -0.5, se, verdict, confidence="+-0.2",
                       samples=samples, seed=seed, details={"N": list(Ns), "rmse": rmse,
                                "series": [{"name": "rmse", "N": N, "value": e}
                                           for N, e in zip(Ns, rmse)]})


# ---------------------------------------------------------------------------
# conservativeness obstruction


def conservativeness_probe(mu: MarkovMeasure, f, N: int = 10_000, samples: int = 200,
                           seed: int = 0, sigmas: float = SIGMAS) -> ProbeReport:
    """Compare forward and backward ergodic averages of ``f(X_0, X_1)``.

    ``(1/N) S_N^+ f`` averages ``f(X_n, X_{n+1})`` over ``n = 0..N-1`` and
    tends to ``a``, the stationary mean under the right limit.
    ``(1/N) S_N^- f`` averages ``f(X_{-n}, X_{-n+1})`` over ``n = 1..N``
    and tends to ``b``, the stationary mean under the left limit. Separated
    averages rule out conservativeness. Bands are ``sigmas`` standard errors wide.

    Raises
    ------
    TailsEqual
        If the two limits coincide.
    TailsUnknown
        If either limit is not declared.
    """
    f = _table(mu, f)
    tb = tail_behavior(mu)
    if tb.mode != "ConvergentBoth":
        raise TailsUnknown(f"both limits are needed (tail mode {tb.mode})")
    if matrices_equal(tb.left, tb.right, 1e-12):
        raise TailsEqual("left and right limits coincide")
    a = stationary_pair_mean(tb.right, f)
    b = stationary_pair_mean(tb.left, f)
    w = sample_window(mu, -N, 2 * N + 1, samples, seed).words
    pairs = _forward_pairs(w, f)          # column m is f(X_{m-N}, X_{m-N+1})
    plus = pairs[:, N:2 * N].mean(axis=1)
    minus = pairs[:, 0:N].mean(axis=1)
    mp, mm = float(plus.mean()), float(minus.mean())
    sp, sm = _stderr(plus, 1.0 / N), _stderr(minus, 1.0 / N)
    gap = plus - minus
    separated = (mp - sigmas * sp > mm + sigmas * sm) or (mm - sigmas * sm > mp + sigmas * sp)
    verdict = "ObstructionPresent" if separated else "NoObstruction"
    return ProbeReport("forward_minus_backward", float(gap.mean()), a - b, _stderr(gap, 1.0 / N), verdict,
                       confidence=f"{sigmas:g} sigma", samples=samples, seed=seed,
                       details={"N": N, "forward": mp, "forward_stderr": sp, "predicted_forward": a,
                                "backward": mm, "backward_stderr": sm, "predicted_backward": b,
                                "forward_within_band": abs(mp - a) <= sigmas * sp,
                                "backward_within_band": abs(mm - b) <= sigmas * sm})


# ---------------------------------------------------------------------------
# CLT and drift


def _log_sum_samples(cfg: AdmissibleConfiguration, mu: MarkovMeasure, K: int, samples: int,
                     seed: int) -> np.ndarray:
    src = sample_coordinates(mu, cfg.coordinates(K), samples, seed)
    return yk_samples(cfg, K, src)


def clt_probe(cfg: AdmissibleConfiguration, mu: MarkovMeasure, K: int = 200,
              samples: int = 10_000, seed: int = 0, k0: int = 1,
              threshold: float = KS_THRESHOLD, sigmas: float = SIGMAS) -> ProbeReport:
    """Kolmogorov distance between standardized ``S_K`` and the normal law.

    ``S_K = sum_{k=k0}^{K} D_k Y_k`` is standardized with its exact mean and
    variance from :func:`log_sum_moments`.

    Raises
    ------
    DegenerateVariance
        If every ``D_k`` vanishes or the exact variance is not positive.
    """
    D = np.asarray(dk_sequence(cfg, mu, K).values, dtype=float)
    if not np.any(np.abs(D[k0 - 1:K]) > 0):
        raise DegenerateVariance("all D_k vanish")
    mom = log_sum_moments(cfg, mu, k0, K, D)
    var = mom["variance"]
    if not var > 0:
        raise DegenerateVariance(f"exact variance {var:.3g} is not positive")
    Y = _log_sum_samples(cfg, mu, K, samples, seed)
    S = Y[:, k0 - 1:K] @ D[k0 - 1:K]
    z = (S - mom["mean"]) / math.sqrt(var)
    ks = float(stats.kstest(z, "norm").statistic)
    mean_se = _stderr(S)
    verdict = "NormalityNotRejected" if ks <= threshold else "NormalityRejected"
    return ProbeReport("ks_distance", ks, 0.0, KOLMOGOROV_MEAN / math.sqrt(samples), verdict,
                       confidence=f"KS <= {threshold:g}", samples=samples, seed=seed,
                       details={"K": K, "k0": k0, "exact_mean": float(mom["mean"]), "exact_variance": float(var),
                                "empirical_mean": float(S.mean()),
                                "empirical_variance": float(S.var(ddof=1)),
                                "mean_within_band": abs(S.mean() - mom["mean"]) <= sigmas * mean_se})


def drift_check(cfg: AdmissibleConfiguration, mu: MarkovMeasure,
                Ks: Sequence[int] = (50, 100, 150, 200), samples: int = 10_000,
                seed: int = 0, sigmas: float = SIGMAS) -> ProbeReport:
    """``E S_K`` should be negative and decreasing in ``K``.

    Exact means must decrease strictly. Empirical means, all taken from the
    same trajectories, must be negative and each increment must not be
    significantly positive.
    """
    Ks = sorted(Ks)
    Kmax = Ks[-1]
    D = np.asarray(dk_sequence(cfg, mu, Kmax).values, dtype=float)
    if not np.any(np.abs(D[:Kmax]) > 0):
        raise DegenerateVariance("all D_k vanish")
    terms = [D[k - 1] * y_marginal(cfg, mu, k).mean for k in range(1, Kmax + 1)]
    exact = [float(sum(terms[:K])) for K in Ks]
    Y = _log_sum_samples(cfg, mu, Kmax, samples, seed)
    partial = np.cumsum(Y * D[None, :Kmax], axis=1)
    S = [partial[:, K - 1] for K in Ks]
    emp = [float(s.mean()) for s in S]
    se = [_stderr(s) for s in S]
    exact_ok = exact[0] < 0 and all(b < a for a, b in zip(exact, exact[1:]))
    neg_ok = all(m < sigmas * s for m, s in zip(emp, se)) and emp[-1] < 0
    steps_ok = all(float((b - a).mean()) <= sigmas * _stderr(b - a) for a, b in zip(S, S[1:]))
    verdict = "Pass" if exact_ok and neg_ok and steps_ok else "Fail"
    return ProbeReport("drift_mean_S_K", emp[-1], exact[-1], se[-1], verdict,
                       confidence=f"{sigmas:g} sigma", samples=samples, seed=seed, details={"K": Ks, "exact_means": exact, "empirical_means": emp,
                                           "stderr": se, "exact_decreasing": exact_ok,
                                           "empirical_negative": neg_ok,
                                           "empirical_nonincreasing": steps_ok,
                                           "series": [{"name": "mean_S_K", "N": K, "value": m,
                                                       "predicted": e, "se": v}
                                                      for K, m, e, v in zip(Ks, emp, exact, se)]})


# ---------------------------------------------------------------------------
# divergence of weighted event counts


def divergence_probe(a, events, levels: int = 8, seed: Optional[int] = None,
                     lower_bound: Optional[float] = None, blocks: int = 10,
                     sigmas: float = SIGMAS) -> ProbeReport:
    """Mass of ``{sum_n a_n 1[A_n] > C}`` for growing ``C``.

    Parameters
    ----------
    a : array_like, shape (n,)
        Nonnegative weights with a divergent full series.
    events : array_like of bool, shape (samples, n)
        Sampled indicators of ``A_1, ..., A_n``.
    levels : int
        Number of thresholds ``C``, evenly spaced up to half of the
        expected weighted count at the estimated liminf.
    lower_bound : float, optional
        A proven lower bound on ``liminf P(A_n)``; the estimate is checked
        against it too.

    The liminf of ``P(A_n)`` is estimated by the smallest of ``blocks``
    averaged column frequencies over the second half of the indices. The verdict is ``Consistent`` when
    the mass above every threshold is at least that estimate minus
    ``sigmas`` standard errors.
    """
    a = np.asarray(a, dtype=float)
    E = np.asarray(events, dtype=bool)
    if a.ndim != 1 or E.ndim != 2 or E.shape[1] != a.size:
        raise ValueError("events must have one column per weight")
    if np.any(a < 0):
        raise ValueError("weights must be nonnegative")
    samples = E.shape[0]
    freq = E.mean(axis=0)
    tail = freq[a.size // 2:]
    liminf = float(min(chunk.mean() for chunk in np.array_split(tail, min(blocks, tail.size))))
    liminf_se = max(math.sqrt(liminf * (1 - liminf) / samples), 0.5 / samples)
    totals = E.astype(float) @ a
    top = 0.5 * liminf * float(a.sum())
    Cs = [top * (j + 1) / levels for j in range(levels)]
    mass = [float((totals > C).mean()) for C in Cs]
    ok = liminf > 0 and all(m >= liminf - sigmas * liminf_se for m in mass)
    details = {"thresholds": Cs, "mass_above": mass, "liminf_estimate": liminf,
               "weight_total": float(a.sum())}
    if lower_bound is not None:
        details["lower_bound"] = float(lower_bound)
        details["liminf_above_bound"] = liminf >= lower_bound - sigmas * liminf_se
        ok = ok and details["liminf_above_bound"]
    verdict = "Consistent" if ok else ("Vacuous" if liminf <= 0 else "Inconsistent")
    return ProbeReport("mass_above_largest_C", mass[-1], liminf, liminf_se, verdict,
                       confidence=f"{sigmas:g} sigma", samples=samples, seed=seed,
                       details=details)


def endpoint_events(mu: MarkovMeasure, u0: int, v0: int, n_max: int, samples: int,
                    seed: int = 0) -> np.ndarray:
    """Indicators of ``A_n = {X_{-(n-1)} = u0, X_{n+1} = v0}`` for ``n = 1..n_max``."""
    start = -(n_max - 1)
    w = sample_window(mu, start, 2 * n_max + 1, samples, seed).words
    left = w[:, [-(n - 1) - start for n in range(1, n_max + 1)]] == u0
    right = w[:, [n + 1 - start for n in range(1, n_max + 1)]] == v0
    return left & right
