"""Dense Cholesky kernels.

Everything here operates on plain ``float64`` ndarrays. Factors are lower
triangular with strictly positive diagonals, so ``L @ L.T`` reconstructs the
source matrix and the squared diagonal entries are the sequential conditional
variances of the corresponding variable ordering.

The factorization is built row by row (:func:`chol_append_row`), which is also
how incremental consumers extend a factor by one variable in O(m^2); composing
the row step p times from an empty factor *is* :func:`cholesky`, by
construction.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionMismatch,
    DowndateBreaksPD,
    NotPositiveDefinite,
    SingularFactor,
)

PIVOT_TOL = 1e-12
SYMMETRY_RTOL = 1e-10


def validate_covariance(S: np.ndarray, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Check that ``S`` is a square, symmetric matrix with positive diagonal.

    Returns ``S`` as a float64 array. Symmetry is relative to the largest
    absolute entry; the positive-definiteness itself is only discovered when
    a factorization is attempted.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {S.shape}")
    scale = float(np.max(np.abs(S))) if S.size else 0.0
    if scale > 0 and float(np.max(np.abs(S - S.T))) > rtol * scale:
        raise DimensionMismatch("matrix is not symmetric within tolerance")
    if S.size and np.any(np.diag(S) <= 0.0):
        raise NotPositiveDefinite("matrix has a non-positive diagonal entry")
    return S


def chol_append_row(
    L: np.ndarray,
    new_cross: np.ndarray,
    new_diag: float,
    pivot_tol: float = PIVOT_TOL,
) -> np.ndarray:
    """Extend an m x m factor to (m+1) x (m+1) by appending one variable.

    ``new_cross`` holds the covariances between the new variable and the m
    already-factored ones (in factor order); ``new_diag`` is its variance.
    The new row is ``w = solve(L, new_cross)`` and the new pivot is
    ``new_diag - w @ w``. Cost O(m^2); the existing block is copied verbatim.
    """
    L = np.asarray(L, dtype=float)
    w = np.asarray(new_cross, dtype=float)
    m = L.shape[0]
    if w.shape != (m,):
        raise DimensionMismatch(f"cross vector has length {w.shape}, factor is {m} x {m}")
    if m:
        w = solve_triangular(L, w, lower=True, check_finite=False)
        d2 = float(new_diag) - float(w @ w)
        scale = max(float(new_diag), float(np.max(np.diag(L)) ** 2))
    else:
        d2 = float(new_diag)
        scale = float(new_diag)
    if d2 <= pivot_tol * scale:
        raise NotPositiveDefinite(
            f"pivot {d2:.3e} at row {m} is below tolerance {pivot_tol * scale:.3e}"
        )
    out = np.zeros((m + 1, m + 1))
    out[:m, :m] = L
    out[m, :m] = w
    out[m, m] = np.sqrt(d2)
    return out


def cholesky(S: np.ndarray, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Lower-triangular Cholesky factor of a symmetric positive definite ``S``.

    Raises :class:`NotPositiveDefinite` when a pivot falls below
    ``pivot_tol`` times the largest diagonal entry. Built by repeated row
    appends, so it shares its arithmetic path with :func:`chol_append_row`.
    """
    S = validate_covariance(S)
    L = np.zeros((0, 0))
    for i in range(S.shape[0]):
        L = chol_append_row(L, S[:i, i], S[i, i], pivot_tol=pivot_tol)
    return L


def dichol(S: np.ndarray, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Diagonal of the Cholesky factor of ``S``, in matrix row order.

    The squared entries are the sequential conditional variances
    ``var(X_j | X_0, ..., X_{j-1})`` for the row order of ``S``. Not sorted.
    """
    return np.diag(cholesky(S, pivot_tol=pivot_tol)).copy()


def chol_downdate_rank1(
    L: np.ndarray,
    v: np.ndarray,
    pivot_tol: float = PIVOT_TOL,
) -> np.ndarray:
    """Factor of ``L @ L.T - v @ v.T`` in O(m^2) via hyperbolic rotations.

    Raises :class:`DowndateBreaksPD` when the downdated matrix is no longer
    positive definite.
    """
    L = np.array(L, dtype=float, copy=True)
    v = np.array(v, dtype=float, copy=True)
    m = L.shape[0]
    if v.shape != (m,):
        raise DimensionMismatch(f"vector has shape {v.shape}, factor is {m} x {m}")
    scale = float(np.max(np.diag(L)) ** 2) if m else 0.0
    for k in range(m):
        d2 = L[k, k] ** 2 - v[k] ** 2
        if d2 <= pivot_tol * scale:
            raise DowndateBreaksPD(
                f"downdate leaves pivot {d2:.3e} at row {k}; matrix would be indefinite"
            )
        r = np.sqrt(d2)
        c = r / L[k, k]
        s = v[k] / L[k, k]
        L[k, k] = r
        if k + 1 < m:
            L[k + 1 :, k] = (L[k + 1 :, k] - s * v[k + 1 :]) / c
            v[k + 1 :] = c * v[k + 1 :] - s * L[k + 1 :, k]
    return L


def downdated_diag_sq(
    L: np.ndarray,
    w: np.ndarray,
) -> np.ndarray | None:
    """Squared diagonal of ``chol(L @ L.T - (L @ w)(L @ w).T)`` without forming it.

    ``w`` must satisfy ``L @ w = v`` for the downdate vector ``v``. Uses the
    closed form ``L~_kk^2 = L_kk^2 * t_k / t_{k-1}`` with
    ``t_k = 1 - sum_{i<=k} w_i^2``. Returns ``None`` when the downdate is not
    positive definite (some ``t_k <= 0``).
    """
    t = 1.0 - np.cumsum(np.asarray(w, dtype=float) ** 2)
    if t.size == 0:
        return np.zeros(0)
    if np.any(t <= 0.0):
        return None
    tprev = np.concatenate(([1.0], t[:-1]))
    return np.diag(L) ** 2 * t / tprev


def triangular_solve(
    L: np.ndarray,
    b: np.ndarray,
    singular_tol: float = PIVOT_TOL,
) -> np.ndarray:
    """Solve ``L @ w = b`` for lower-triangular ``L``.

    Raises :class:`SingularFactor` when a diagonal entry is below
    ``singular_tol`` times the largest diagonal entry.
    """
    L = np.asarray(L, dtype=float)
    b = np.asarray(b, dtype=float)
    m = L.shape[0]
    if b.shape[0] != m:
        raise DimensionMismatch(f"rhs has leading dimension {b.shape[0]}, factor is {m} x {m}")
    if m == 0:
        return b.copy()
    d = np.diag(L)
    if np.min(np.abs(d)) <= singular_tol * float(np.max(np.abs(d))):
        raise SingularFactor("triangular factor has a near-zero diagonal entry")
    return solve_triangular(L, b, lower=True, check_finite=False)


def sample_covariance(X: np.ndarray) -> np.ndarray:
    """Sample covariance of the rows of ``X`` with the 1/n normalization.

    Columns are mean-centered first. The 1/n convention (rather than
    1/(n-1)) matches the chi-square structure the debiasing constants in
    :func:`cholord.ordering.debiased_cholesky` are derived from.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    Xc = X - X.mean(axis=0)
    S = Xc.T @ Xc / n
    return 0.5 * (S + S.T)
