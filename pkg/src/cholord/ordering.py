"""Greedy topological-ordering recovery from a covariance matrix.

The algorithm grows an ordering one variable at a time. At each step it picks
the remaining variable with the smallest conditional variance given the
current prefix (equivalently, the smallest new squared Cholesky diagonal
entry, which minimizes the Euclidean norm of the diagonal), then decides via
a norm comparison whether the chosen variable belongs at the back or in front
of the prefix. Front insertion repairs a bad choice of starting variable.

Implementation notes
--------------------
Appending at the back reuses cached triangular solves: for every remaining
candidate ``j`` we maintain ``w_j = solve(L, S[prefix, j])``, extended by one
entry per iteration, so the candidate argmin costs O(m) per candidate and the
whole run O(p^3). The front test needs only the diagonal of the rank-one
downdated factor, available in closed form from ``w_j`` in O(m). An actual
front insertion rebuilds the factor and the candidate cache in O(p m^2);
those events are counted and reported because a run with many of them is the
slow regime of the algorithm.

Two engines compute the same quantities: a vectorized numpy one and an
optional numba-compiled one (used by default when importable) whose runtime
stays flop-dominated down to small p.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from . import _kernels
from .errors import IndexOutOfRange, NotPositiveDefinite, TooFewSamples, TooLarge
from .linalg import (
    PIVOT_TOL,
    chol_downdate_rank1,
    cholesky,
    downdated_diag_sq,
    sample_covariance,
    validate_covariance,
)
from .sem import Dataset, Ordering

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class OrderStats:
    """Diagnostics for one greedy run."""

    f_value: float
    diag: np.ndarray
    prepends: int
    first: int
    engine: str


def _resolve_engine(engine: str) -> str:
    if engine == "auto":
        return "numba" if _kernels.HAVE_NUMBA else "numpy"
    if engine == "numba" and not _kernels.HAVE_NUMBA:
        raise RuntimeError("numba engine requested but numba is not installed")
    if engine not in ("numpy", "numba"):
        raise ValueError(f"unknown engine {engine!r}")
    return engine


def _greedy_numpy(S: np.ndarray, first: int, tol: float):
    p = S.shape[0]
    diag_S = np.diag(S).copy()
    perm = np.empty(p, dtype=np.int64)
    perm[0] = first
    if diag_S[first] <= tol:
        raise NotPositiveDefinite(f"diagonal entry {first} is below tolerance")
    L = np.zeros((p, p))
    L[0, 0] = np.sqrt(diag_S[first])
    rem = np.array([j for j in range(p) if j != first], dtype=np.int64)
    W = (S[first, rem] / L[0, 0])[None, :] if rem.size else np.zeros((1, 0))
    colsq = W[0] ** 2 if rem.size else np.zeros(0)
    fsq = float(diag_S[first])
    prepends = 0
    m = 1
    while m < p:
        d = diag_S[rem] - colsq
        # smallest variable index wins among candidates tied to relative precision
        dmin = float(np.min(d))
        b = int(np.argmax(d <= dmin + abs(dmin) * TIE_RTOL))
        j = int(rem[b])
        dback = float(d[b])
        if dback <= tol:
            raise NotPositiveDefinite(f"pivot for variable {j} is below tolerance")
        sjj = float(diag_S[j])
        f_back = fsq + dback
        dd = downdated_diag_sq(L[:m, :m], W[:, b] / np.sqrt(sjj))
        f_front = np.inf if dd is None else sjj + float(np.sum(dd))
        keep = np.arange(rem.size) != b
        if f_back <= f_front * (1.0 + TIE_RTOL):  # exact ties append at the back
            row = W[:, b].copy()
            lmm = np.sqrt(dback)
            L[m, :m] = row
            L[m, m] = lmm
            perm[m] = j
            if rem.size > 1:
                new_entries = (S[j, rem] - row @ W) / lmm
                W = np.vstack([W, new_entries[None, :]])[:, keep]
                colsq = (colsq + new_entries**2)[keep]
            rem = rem[keep]
            fsq = f_back
        else:
            prepends += 1
            v = S[perm[:m], j] / np.sqrt(sjj)
            Ldown = chol_downdate_rank1(L[:m, :m], v)
            L[: m + 1, : m + 1] = 0.0
            L[0, 0] = np.sqrt(sjj)
            L[1 : m + 1, 0] = v
            L[1 : m + 1, 1 : m + 1] = Ldown
            perm[: m + 1] = np.concatenate(([j], perm[:m]))
            rem = rem[keep]
            if rem.size:
                W = solve_triangular(
                    L[: m + 1, : m + 1], S[perm[: m + 1]][:, rem], lower=True, check_finite=False
                )
                colsq = np.sum(W**2, axis=0)
            fsq = sjj + float(np.sum(np.diag(Ldown) ** 2))
        m += 1
    return perm, fsq, np.diag(L).copy(), prepends


def _greedy_run(S: np.ndarray, first: int, engine: str, pivot_tol: float):
    tol = pivot_tol * float(np.max(np.diag(S)))
    if engine == "numba":
        perm, status, fsq, diag, prepends = _kernels.greedy_core(S, first, tol)
        if status == 1:
            raise NotPositiveDefinite("input matrix is not positive definite")
        if status == 2:
            raise NotPositiveDefinite("front-insertion downdate lost positive definiteness")
        return perm, float(fsq), diag, int(prepends)
    return _greedy_numpy(S, first, tol)


def greedy_order_with_stats(
    S: np.ndarray,
    first: int | None = None,
    scan_first: bool = False,
    engine: str = "auto",
    pivot_tol: float = PIVOT_TOL,
) -> tuple[Ordering, OrderStats]:
    """Greedy ordering plus diagnostics.

    ``first`` fixes the starting variable (default 0). With ``scan_first``
    every starting variable is tried and the run with the smallest final norm
    wins (ties keep the smallest start); this removes the residual sensitivity
    to the starting choice at p times the cost.
    """
    S = validate_covariance(S)
    S = np.ascontiguousarray(S)
    p = S.shape[0]
    eng = _resolve_engine(engine)
    starts = range(p) if scan_first else [int(first) if first is not None else 0]
    best = None
    for f0 in starts:
        if not (0 <= f0 < p):
            raise IndexOutOfRange(f"first index {f0} out of range for p = {p}")
        perm, fsq, diag, prepends = _greedy_run(S, f0, eng, pivot_tol)
        if best is None or fsq < best[1] * (1.0 - TIE_RTOL):
            best = (perm, fsq, diag, prepends, f0)
    perm, fsq, diag, prepends, f0 = best
    stats = OrderStats(
        f_value=math.sqrt(fsq), diag=diag, prepends=prepends, first=f0, engine=eng
    )
    return Ordering(tuple(int(i) for i in perm)), stats


def greedy_order(
    S: np.ndarray,
    first: int | None = None,
    scan_first: bool = False,
    engine: str = "auto",
    pivot_tol: float = PIVOT_TOL,
) -> Ordering:
    """Topological-ordering estimate for the covariance ``S``. See module docs."""
    return greedy_order_with_stats(S, first, scan_first, engine, pivot_tol)[0]


def exhaustive_order(S: np.ndarray, max_p: int = 9) -> Ordering:
    """Exact argmin of the Cholesky-diagonal norm over all p! permutations.

    Enforces ``p <= max_p``. Ties are broken by the lexicographically
    smallest permutation (within a 1e-12 relative tolerance, so floating
    round-off cannot promote a later permutation over an exact tie).
    """
    import itertools

    S = validate_covariance(S)
    p = S.shape[0]
    if p > max_p:
        raise TooLarge(f"p = {p} exceeds the exhaustive-search limit {max_p}")
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("input matrix is not positive definite") from exc
    best_perm = None
    best_f2 = np.inf
    for perm in itertools.permutations(range(p)):
        idx = np.asarray(perm)
        f2 = float(np.sum(np.diag(np.linalg.cholesky(S[np.ix_(idx, idx)])) ** 2))
        if f2 < best_f2 * (1.0 - TIE_RTOL) or best_perm is None:
            best_perm, best_f2 = perm, f2
    return Ordering(best_perm)


def debias_constants(n: int, p: int, omega: str = "unbiased") -> np.ndarray:
    """Per-column scaling constants for the sample Cholesky factor.

    ``unbiased``: column j (1-based) of the factor of the 1/n sample
    covariance is, up to the true entry, a chi variate with
    ``k = n - j + 1`` degrees of freedom divided by ``sqrt(n)``, so
    multiplying by ``sqrt(n) / E[chi_k]`` with ``E[chi_k] = sqrt(2)
    Gamma((k+1)/2) / Gamma(k/2)`` makes the diagonal exactly unbiased under
    Gaussianity.

    ``literal``: divides column j by ``n - j + 1`` instead. Kept for
    comparison; it is *not* unbiased and fails the recovery checks by
    construction.
    """
    j = np.arange(1, p + 1)
    k = n - j + 1
    if omega == "unbiased":
        log_c = 0.5 * np.log(n) + gammaln(k / 2.0) - 0.5 * np.log(2.0) - gammaln((k + 1) / 2.0)
        return np.exp(log_c)
    if omega == "literal":
        return 1.0 / k
    raise ValueError(f"unknown omega mode {omega!r}")


def debiased_cholesky(data: Dataset | np.ndarray, omega: str = "unbiased") -> np.ndarray:
    """Cholesky factor of the sample covariance with debiased columns.

    Requires ``n > p``. Returns ``chol(S) @ diag(c)`` where ``S`` is the
    mean-centered 1/n sample covariance and ``c`` the constants of
    :func:`debias_constants`.
    """
    X = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    n, p = X.shape
    if n <= p:
        raise TooFewSamples(f"need n > p, got n = {n}, p = {p}")
    L = cholesky(sample_covariance(X))
    return L * debias_constants(n, p, omega)[None, :]


def benchmark_order(
    p_list,
    runs: int = 5,
    seed: int = 0,
    engine: str = "auto",
) -> list[dict]:
    """Median wall time of :func:`greedy_order` on random SPD inputs.

    One deterministic SPD matrix per p (``A A^T / p + I`` with standard
    normal ``A``); the first run is a discarded warm-up so one-time
    compilation does not pollute the timings. Returns one record per p with
    the median seconds, all raw times, the prepend count and the final norm.
    """
    eng = _resolve_engine(engine)
    results = []
    for p in p_list:
        rng = np.random.default_rng([int(seed), int(p)])
        A = rng.standard_normal((p, p))
        S = A @ A.T / p + np.eye(p)
        greedy_order_with_stats(S, engine=eng)  # warm-up
        times = []
        stats = None
        for _ in range(runs):
            t0 = time.perf_counter()
            _, stats = greedy_order_with_stats(S, engine=eng)
            times.append(time.perf_counter() - t0)
        results.append(
            {
                "p": int(p),
                "median_seconds": float(np.median(times)),
                "times": [float(t) for t in times],
                "prepends": stats.prepends,
                "f_value": stats.f_value,
                "engine": eng,
            }
        )
    return results


def loglog_slope(p_values, seconds) -> float:
    """Least-squares slope of log(time) against log(p)."""
    return float(np.polyfit(np.log(np.asarray(p_values, float)), np.log(np.asarray(seconds, float)), 1)[0])
