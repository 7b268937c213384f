"""Sparse lower-triangular precision factors by penalized likelihood.

Estimates a lower-triangular ``T`` with positive diagonal such that
``T' T`` approximates the precision matrix, by minimizing::

    tr(T S T') - 2 log|T| + lam * sum_{j<i} |T_ij|

The objective separates over rows: row i solves ``min_b  b' S_{1:i,1:i} b
- 2 log b_i + lam sum_{j<i} |b_j|`` and is handled by cyclic coordinate
descent with closed-form updates (soft thresholding off the diagonal, a
positive quadratic root on it), so the objective never increases.

Under a linear SEM whose variables are ordered topologically the true ``T``
is ``diag(noise sd)^{-1} (I - B)``: its off-diagonal support *is* the edge
set, which is why hard-thresholding the fitted factor and reading edges off
it recovers the graph. :func:`edges_from_factor` does the same starting from
a factor of the covariance instead (``L = (I - B)^{-1} diag(noise sd)``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import Diverged, EmptyGrid, InvalidRange, SingularFactor
from .linalg import sample_covariance, validate_covariance
from .sem import Dataset, Ordering


@dataclass(frozen=True)
class CscsConfig:
    """Hyperparameters for the penalized fit.

    ``tau`` may be a float or the string ``"auto"``, which resolves to
    :func:`default_tau` once the sample size is known.
    """

    lam: float = 0.0
    tau: float | str = "auto"
    max_sweeps: int = 500
    tol: float = 1e-6
    folds: int = 10
    grid_size: int = 20

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise InvalidRange("lam must be >= 0")
        if self.tol <= 0:
            raise InvalidRange("tol must be > 0")
        if isinstance(self.tau, str) and self.tau != "auto":
            raise InvalidRange(f"tau must be a float or 'auto', got {self.tau!r}")
        if not isinstance(self.tau, str) and self.tau < 0:
            raise InvalidRange("tau must be >= 0")
        if self.folds < 2:
            raise InvalidRange("folds must be >= 2")


def _soft(z: float, gamma: float) -> float:
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


def _solve_row(
    A: np.ndarray, lam: float, beta0: np.ndarray, tol: float, max_sweeps: int
) -> np.ndarray:
    """Cyclic coordinate descent for one row subproblem."""
    i = A.shape[0] - 1
    beta = beta0.copy()
    r = A @ beta
    for _ in range(max_sweeps):
        delta_max = 0.0
        for j in range(i):
            c = r[j] - A[j, j] * beta[j]
            new = _soft(-c, lam / 2.0) / A[j, j]
            d = new - beta[j]
            if d != 0.0:
                r += A[:, j] * d
                beta[j] = new
                delta_max = max(delta_max, abs(d))
        c = r[i] - A[i, i] * beta[i]
        new = (-c + np.sqrt(c * c + 4.0 * A[i, i])) / (2.0 * A[i, i])
        if not np.isfinite(new) or new <= 0.0:
            raise Diverged(f"diagonal update for row {i} is not finite/positive")
        d = new - beta[i]
        if d != 0.0:
            r += A[:, i] * d
            beta[i] = new
            delta_max = max(delta_max, abs(d))
        if delta_max < tol:
            break
    return beta


def cscs_fit(
    S: np.ndarray,
    lam: float,
    tol: float = 1e-6,
    max_sweeps: int = 500,
    warm_start: np.ndarray | None = None,
) -> np.ndarray:
    """Minimize the penalized objective; returns the lower-triangular factor.

    ``S`` must be symmetric with a positive diagonal (positive definiteness
    is not required when ``lam > 0``). Each row stops once its largest
    parameter change in a sweep falls below ``tol`` or after ``max_sweeps``.
    """
    S = validate_covariance(S)
    if lam < 0:
        raise InvalidRange("lam must be >= 0")
    p = S.shape[0]
    T = np.zeros((p, p))
    for i in range(p):
        A = S[: i + 1, : i + 1]
        if warm_start is not None:
            beta0 = np.asarray(warm_start[i, : i + 1], dtype=float).copy()
            if beta0[i] <= 0:
                beta0[i] = 1.0 / np.sqrt(A[i, i])
        else:
            beta0 = np.zeros(i + 1)
            beta0[i] = 1.0 / np.sqrt(A[i, i])
        T[i, : i + 1] = _solve_row(A, lam, beta0, tol, max_sweeps)
    return T


def cscs_objective(T: np.ndarray, S: np.ndarray, lam: float) -> float:
    """Value of the penalized objective at ``T``."""
    quad = float(np.sum((T @ S) * T))
    logdet = float(np.sum(np.log(np.diag(T))))
    l1 = float(np.sum(np.abs(T)) - np.sum(np.abs(np.diag(T))))
    return quad - 2.0 * logdet + lam * l1


def gaussian_loss(T: np.ndarray, S: np.ndarray) -> float:
    """Unpenalized negative Gaussian log-likelihood term (lower is better)."""
    return cscs_objective(T, S, 0.0)


def threshold_factor(T: np.ndarray, tau: float) -> np.ndarray:
    """Zero the off-diagonal entries with ``|T_ij| <= tau``; keep the diagonal."""
    if tau < 0:
        raise InvalidRange("tau must be >= 0")
    out = np.asarray(T, dtype=float).copy()
    off = ~np.eye(out.shape[0], dtype=bool)
    out[off & (np.abs(out) <= tau)] = 0.0
    return out


def default_tau(p: int, n: int, scale: float = 0.5) -> float:
    """Threshold heuristic ``scale * sqrt(log p / n)``."""
    if p <= 1:
        return 0.0
    return scale * np.sqrt(np.log(p) / n)


def default_lambda(p: int, n: int, scale: float = 2.0) -> float:
    """Penalty heuristic ``scale * sqrt(log p / n)``."""
    if p <= 1:
        return 0.0
    return scale * np.sqrt(np.log(p) / n)


def lambda_max(S: np.ndarray) -> float:
    """Smallest penalty that zeroes every off-diagonal row solution."""
    S = np.asarray(S, dtype=float)
    p = S.shape[0]
    out = 0.0
    for i in range(1, p):
        out = max(out, 2.0 * float(np.max(np.abs(S[i, :i]))) / np.sqrt(S[i, i]))
    return out


def lambda_grid(S: np.ndarray, size: int = 20, ratio: float = 0.01) -> np.ndarray:
    """Descending log-spaced grid from ``lambda_max`` down to ``ratio * lambda_max``."""
    lmax = lambda_max(S)
    if lmax <= 0:
        return np.zeros(1)
    return np.logspace(np.log10(lmax), np.log10(ratio * lmax), num=size)


def select_lambda(
    data: Dataset | np.ndarray,
    ordering: Ordering,
    grid=None,
    folds: int = 10,
    seed: int = 0,
    tol: float = 1e-6,
    max_sweeps: int = 500,
) -> float:
    """Pick the penalty by K-fold cross-validated held-out Gaussian loss.

    Rows are shuffled once (seeded), split into ``folds`` contiguous blocks,
    and each candidate penalty is scored by the mean held-out loss
    ``tr(T S_test T') - 2 log|T|``. The grid is scanned in descending order
    with warm starts; ties keep the stronger penalty.
    """
    X = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    Xp = X[:, list(ordering.perm)]
    n = Xp.shape[0]
    if not 2 <= folds <= n:
        raise InvalidRange(f"folds must lie in [2, n], got {folds} with n = {n}")
    if grid is None:
        grid = lambda_grid(sample_covariance(Xp))
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise EmptyGrid("the penalty grid is empty")
    order = np.argsort(grid)[::-1]
    rng = np.random.default_rng(seed)
    idx = rng.permutation(n)
    blocks = np.array_split(idx, folds)
    losses = np.zeros(grid.size)
    for b, test_idx in enumerate(blocks):
        train_idx = np.concatenate([blocks[k] for k in range(folds) if k != b])
        S_train = sample_covariance(Xp[train_idx])
        S_test = sample_covariance(Xp[test_idx])
        warm = None
        for pos in order:
            T = cscs_fit(S_train, float(grid[pos]), tol=tol, max_sweeps=max_sweeps, warm_start=warm)
            warm = T
            losses[pos] += gaussian_loss(T, S_test)
    best = min(order, key=lambda pos: losses[pos])  # scan order = descending lam
    return float(grid[best])


@dataclass(frozen=True)
class EdgeSet:
    """Weighted directed edges plus the ordering they were estimated under."""

    edges: tuple[tuple[int, int, float], ...]
    ordering: Ordering

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "edges", tuple((int(u), int(v), float(w)) for u, v, w in self.edges)
        )
        pos = self.ordering.positions
        for u, v, _ in self.edges:
            if pos[u] >= pos[v]:
                raise InvalidRange(f"edge ({u}, {v}) violates the ordering")

    def directed_pairs(self) -> set[tuple[int, int]]:
        return {(u, v) for u, v, _ in self.edges}


def _edges_from_weights(B_rho: np.ndarray, ordering: Ordering, zero_tol: float) -> EdgeSet:
    p = B_rho.shape[0]
    edges = []
    for i in range(p):
        for j in range(i):
            w = B_rho[i, j]
            if abs(w) > zero_tol:
                edges.append((ordering.perm[j], ordering.perm[i], float(w)))
    return EdgeSet(edges=tuple(edges), ordering=ordering)


def edges_from_factor(
    L: np.ndarray, ordering: Ordering, zero_tol: float = 1e-12
) -> EdgeSet:
    """Edges from a *covariance* factor ``L = (I - B)^{-1} diag(sd)``.

    Inverts the relation as ``B = I - diag(L) L^{-1}``; entry (i, j) of the
    result is the weight of the edge ``ordering.perm[j] -> ordering.perm[i]``.
    Entries with magnitude at most ``zero_tol`` are treated as round-off.
    """
    L = np.asarray(L, dtype=float)
    p = L.shape[0]
    d = np.diag(L)
    if p and np.min(d) <= 1e-12 * max(float(np.max(np.abs(d))), 1e-300):
        raise SingularFactor("factor diagonal is not strictly positive")
    Linv = solve_triangular(L, np.eye(p), lower=True, check_finite=False)
    B_rho = np.eye(p) - d[:, None] * Linv
    return _edges_from_weights(B_rho, ordering, zero_tol)


def edges_from_precision_factor(
    T: np.ndarray, ordering: Ordering, zero_tol: float = 1e-12
) -> EdgeSet:
    """Edges from a *precision* factor ``T = diag(sd)^{-1} (I - B)``.

    Here ``B = I - diag(T)^{-1} T``, so the off-diagonal support of ``T``
    maps one-to-one onto the edge set (with a sign flip and row scaling).
    """
    T = np.asarray(T, dtype=float)
    d = np.diag(T)
    if T.shape[0] and np.min(d) <= 0:
        raise SingularFactor("factor diagonal is not strictly positive")
    B_rho = np.eye(T.shape[0]) - T / d[:, None]
    return _edges_from_weights(B_rho, ordering, zero_tol)


def support_diagnostics(T: np.ndarray, n: int) -> dict:
    """Report the minimum nonzero off-diagonal magnitude against the theory rate.

    Sign-consistent recovery needs the smallest true factor entry to clear a
    multiple of ``sqrt(s log p / n)``; this returns both sides so callers can
    judge whether thresholding is operating in its safe regime.
    """
    T = np.asarray(T, dtype=float)
    p = T.shape[0]
    off = np.tril(T, -1)
    nz = np.abs(off[off != 0.0])
    s = int(nz.size)
    rate = float(np.sqrt(s * np.log(p) / n)) if (s and p > 1) else 0.0
    return {
        "support_size": s,
        "min_abs_offdiag": float(nz.min()) if s else None,
        "rate_s_logp_n": rate,
    }
