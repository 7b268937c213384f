"""Weak majorization: predicates, T-transforms, and the ordering condition.

``weakly_majorizes(x, y)`` implements the exact prefix-sum definition: every
descending-order prefix sum of ``x`` is at most the corresponding prefix sum
of ``y``. ``prefix_check`` is the cheaper sufficient test (single crossing
index); a True result implies weak majorization, never the converse.

``check_majorization`` verifies, for a linear SEM, that the sorted noise
variances are weakly majorized by the sorted conditional-variance vector of
*every* variable ordering. This is the identifiability condition that makes
the greedy ordering of :mod:`cholord.ordering` recover a topological order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, LengthMismatch, NotPositiveDefinite, NotSorted, TooLarge
from .sem import Ordering, WeightedDag, population_covariance

PREFIX_SLACK = 1e-9


def _as_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise LengthMismatch(f"expected a 1-d vector, got shape {x.shape}")
    return x


def weakly_majorizes(x, y, slack: float = PREFIX_SLACK) -> bool:
    """True iff ``x`` is weakly majorized by ``y`` (x is less spread out).

    Both vectors are sorted descending internally; the comparison allows a
    relative slack of ``slack * max(sum x, sum y)`` per prefix so that exact
    ties (which occur by construction for order-equivalent permutations)
    do not flip on round-off.
    """
    x = _as_vector(x)
    y = _as_vector(y)
    if x.shape != y.shape:
        raise LengthMismatch(f"length mismatch: {x.size} vs {y.size}")
    px = np.cumsum(np.sort(x)[::-1])
    py = np.cumsum(np.sort(y)[::-1])
    tol = slack * max(abs(px[-1]), abs(py[-1]), 1e-300)
    return bool(np.all(px <= py + tol))


def prefix_check(x_sorted_desc, y, slack: float = PREFIX_SLACK) -> bool:
    """Single-crossing sufficient test for weak majorization.

    Requires ``x`` sorted descending with positive entries. Returns True iff
    ``sum(x) <= sum(y)`` and there is an index k with ``x_i <= y_i`` for
    ``i <= k`` and ``x_i >= y_i`` after it. True implies
    ``weakly_majorizes(x, y)``; False is inconclusive.
    """
    x = _as_vector(x_sorted_desc)
    y = _as_vector(y)
    if x.shape != y.shape:
        raise LengthMismatch(f"length mismatch: {x.size} vs {y.size}")
    if np.any(np.diff(x) > 0):
        raise NotSorted("x must be sorted descending")
    if np.any(x <= 0):
        raise NotSorted("x must have strictly positive entries")
    tol = slack * max(abs(x.sum()), abs(y.sum()), 1e-300)
    if x.sum() > y.sum() + tol:
        return False
    below = x <= y + tol  # crossing pattern: all True up to some k, then all False
    above = x >= y - tol
    last_below = -1
    for i in range(x.size):
        if below[i]:
            last_below = i
        else:
            break
    return bool(np.all(above[last_below + 1 :]))


@dataclass(frozen=True)
class TTransform:
    """Convex mixture of the identity and the swap of coordinates ``i, j``."""

    i: int
    j: int
    lam: float

    def __post_init__(self) -> None:
        if self.i == self.j:
            raise IndexOutOfRange("indices must differ")
        if not (0.0 <= self.lam <= 1.0):
            raise IndexOutOfRange(f"lambda must lie in [0, 1], got {self.lam}")


def apply_t_transform(t: TTransform, x) -> np.ndarray:
    """Mix coordinates ``i`` and ``j``: the sum is preserved exactly.

    With ``lam = 1`` this is the identity, with ``lam = 0`` the plain swap;
    the output is always weakly majorized by the input.
    """
    x = _as_vector(x)
    if not (0 <= t.i < x.size and 0 <= t.j < x.size):
        raise IndexOutOfRange(f"indices ({t.i}, {t.j}) out of range for length {x.size}")
    out = x.copy()
    out[t.i] = t.lam * x[t.i] + (1.0 - t.lam) * x[t.j]
    out[t.j] = t.lam * x[t.j] + (1.0 - t.lam) * x[t.i]
    return out


def schur_criterion(x) -> float:
    """Euclidean norm, the strictly Schur-convex spread measure used throughout.

    On nonnegative vectors it strictly respects weak majorization: if ``x`` is
    weakly majorized by ``y`` and they differ as multisets, then
    ``schur_criterion(x) < schur_criterion(y)``.
    """
    return float(np.linalg.norm(_as_vector(x)))


@dataclass(frozen=True)
class MajorizationReport:
    holds: bool
    witness: Ordering | None
    checked: int


def _sorted_conditional_variances(Sigma: np.ndarray, perm: tuple[int, ...]) -> np.ndarray:
    # same quantity as dichol(Sigma_perm)**2, via the LAPACK factorization
    # (this runs p! times per check, so the speed matters)
    idx = np.asarray(perm)
    try:
        y = np.diag(np.linalg.cholesky(Sigma[np.ix_(idx, idx)])) ** 2
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("population covariance is not positive definite") from exc
    return np.sort(y)[::-1]


def majorization_table(
    dag: WeightedDag, max_p: int = 8
) -> list[tuple[tuple[int, ...], np.ndarray, bool]]:
    """Sorted conditional-variance vectors for every non-identity ordering.

    Returns ``(perm, y_sorted_desc, majorized)`` rows in lexicographic
    permutation order, where ``majorized`` tests the sorted noise variances
    against ``y`` with :func:`weakly_majorizes`. The identity permutation is
    omitted (its vector is the noise variances themselves).
    """
    if dag.p > max_p:
        raise TooLarge(f"p = {dag.p} exceeds the enumeration limit max_p = {max_p}")
    Sigma = population_covariance(dag)
    x = np.sort(dag.noise_vars)[::-1]
    identity = tuple(range(dag.p))
    rows = []
    for perm in itertools.permutations(range(dag.p)):
        if perm == identity:
            continue
        y = _sorted_conditional_variances(Sigma, perm)
        rows.append((perm, y, weakly_majorizes(x, y)))
    return rows


def check_majorization(dag: WeightedDag, max_p: int = 8) -> MajorizationReport:
    """Test the ordering condition over all permutations, for small p.

    Enumerates permutations lazily and short-circuits on the first ordering
    whose sorted conditional variances fail to weakly majorize the sorted
    noise variances; that ordering is returned as the witness.
    """
    if dag.p > max_p:
        raise TooLarge(f"p = {dag.p} exceeds the enumeration limit max_p = {max_p}")
    Sigma = population_covariance(dag)
    x = np.sort(dag.noise_vars)[::-1]
    checked = 0
    for perm in itertools.permutations(range(dag.p)):
        checked += 1
        y = _sorted_conditional_variances(Sigma, perm)
        if not weakly_majorizes(x, y):
            return MajorizationReport(holds=False, witness=Ordering(perm), checked=checked)
    return MajorizationReport(holds=True, witness=None, checked=checked)
