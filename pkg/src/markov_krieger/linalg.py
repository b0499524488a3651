"""Small dense linear-algebra helpers for stochastic matrices."""

from __future__ import annotations

import numpy as np

from .errors import NotStochastic, SupportMismatch

STOCHASTIC_TOL = 1e-12
PRODUCT_TOL = 1e-10
STATIONARY_TOL = 1e-12


def frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def as_stochastic(matrix, adjacency=None, label: str = "matrix") -> np.ndarray:
    """Validate a row-stochastic matrix and return a read-only float copy.

    Parameters
    ----------
    matrix : array_like
    adjacency : AdjacencyMatrix, optional
        When given, the support must equal the adjacency pattern exactly.
    label : str
        Used in error messages.
    """
    arr = np.array(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NotStochastic(f"{label} must be square", label=label)
    if not np.isfinite(arr).all() or (arr < 0).any():
        raise NotStochastic(f"{label} has negative or non-finite entries", label=label)
    sums = arr.sum(axis=1)
    if np.max(np.abs(sums - 1.0)) > STOCHASTIC_TOL:
        raise NotStochastic(f"{label} rows do not sum to 1", label=label,
                            row_sums=sums.tolist())
    if adjacency is not None:
        if arr.shape != adjacency.entries.shape:
            raise SupportMismatch(f"{label} has the wrong size", label=label)
        support = arr > 0
        if not np.array_equal(support, adjacency.entries.astype(bool)):
            bad = np.argwhere(support != adjacency.entries.astype(bool))[0]
            raise SupportMismatch(f"{label} support differs from the adjacency matrix at ({int(bad[0])}, {int(bad[1])})",
                                  label=label, entry=[int(bad[0]), int(bad[1])])
    return frozen(arr)


def stationary_vector(P: np.ndarray) -> np.ndarray:
    """Left Perron vector of a primitive stochastic matrix, summing to 1.

    Solves ``lam (P - I) = 0`` with one equation replaced by the
    normalisation, then applies a step of iterative refinement.
    """
    P = np.asarray(P, dtype=float)
    d = P.shape[0]
    system = P.T - np.eye(d)
    system[-1, :] = 1.0
    rhs = np.zeros(d)
    rhs[-1] = 1.0
    lam = np.linalg.solve(system, rhs)
    # one refinement step on the same system
    lam = lam + np.linalg.solve(system, rhs - system @ lam)
    lam = np.clip(lam, 0.0, None)
    lam = lam / lam.sum()
    for _ in range(8):
        if np.max(np.abs(lam @ P - lam)) <= STATIONARY_TOL:
            break
        lam = lam @ P
        lam = lam / lam.sum()
    return frozen(lam)


def stationary_residual(lam, P) -> float:
    return float(np.max(np.abs(np.asarray(lam) @ np.asarray(P) - np.asarray(lam))))


def matrix_power(P: np.ndarray, k: int) -> np.ndarray:
    """``P**k`` by repeated squaring; ``k`` may be an arbitrarily large int."""
    if k < 0:
        raise ValueError("negative power")
    d = P.shape[0]
    result = np.eye(d)
    base = np.array(P, dtype=float)
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return result


def vector_power(v: np.ndarray, P: np.ndarray, k: int) -> np.ndarray:
    """``v @ P**k``; stepwise for short runs so the result is a plain forward product."""
    if k <= 32:
        out = np.array(v, dtype=float)
        for _ in range(k):
            out = out @ P
        return out
    return np.asarray(v, dtype=float) @ matrix_power(P, k)


def matrices_equal(a, b, tol: float = 0.0) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    if tol == 0.0:
        return bool(np.array_equal(a, b))
    return bool(np.max(np.abs(a - b)) <= tol)


def matrix_key(a) -> bytes:
    a = np.ascontiguousarray(a, dtype=float)
    return a.tobytes() + bytes(str(a.shape), "ascii")
