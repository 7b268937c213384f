"""Cause-effect-or-none decisions for variable pairs.

The rule compares the Euclidean norms of the two conditional-variance
vectors ``x = (var X0, E[var(X1 | X0)])`` and ``y = (var X1,
E[var(X0 | X1)])``. A strictly smaller norm points at the causal direction;
the relative gap ``mu = |f_x - f_y| / max(f_x, f_y)`` below a threshold is
read as "no effect", since exact equality never happens on finite samples.

Note the criterion compares raw variances, so it is deliberately *not*
invariant to rescaling a single column; it is exactly antisymmetric under
swapping the two columns.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateColumnWarning, DimensionMismatch, InvalidRange, TooFewSamples
from .sem import Dataset


@dataclass(frozen=True)
class BivariateDecision:
    verdict: str  # "forward" | "backward" | "none"
    f_x: float
    f_y: float
    mu: float

    def to_json_dict(self) -> dict:
        return {"verdict": self.verdict, "f_x": self.f_x, "f_y": self.f_y, "mu": self.mu}


def _var(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.mean((x - x.mean()) ** 2))


def conditional_variance(
    target,
    given,
    regressor: str = "linear",
    k: int | None = None,
) -> float:
    """Estimate ``E[var(target | given)]`` as the mean squared residual.

    ``linear`` fits least squares with an intercept; ``knn`` predicts each
    point by the mean of its ``k`` nearest neighbors in ``given`` (self
    excluded), ``k = ceil(sqrt(n))`` by default. When ``given`` is
    numerically constant the regression is meaningless: a
    :class:`DegenerateColumnWarning` is issued and ``var(target)`` returned.
    """
    t = np.asarray(target, dtype=float).ravel()
    g = np.asarray(given, dtype=float).ravel()
    if t.size != g.size:
        raise DimensionMismatch("target and given must have equal length")
    n = t.size
    if n < 10:
        raise TooFewSamples(f"need at least 10 samples, got {n}")
    if _var(g) <= 1e-12 * max(float(np.mean(g**2)), 1e-300):
        warnings.warn(
            "conditioning column is numerically constant; returning var(target)",
            DegenerateColumnWarning,
            stacklevel=2,
        )
        return _var(t)
    if regressor == "linear":
        A = np.column_stack([np.ones(n), g])
        coef, *_ = np.linalg.lstsq(A, t, rcond=None)
        resid = t - A @ coef
        return float(np.mean(resid**2))
    if regressor == "knn":
        if k is None:
            k = int(np.ceil(np.sqrt(n)))
        k = min(max(k, 1), n - 1)
        dist = np.abs(g[:, None] - g[None, :])
        np.fill_diagonal(dist, np.inf)
        idx = np.argpartition(dist, k - 1, axis=1)[:, :k]
        pred = t[idx].mean(axis=1)
        return float(np.mean((t - pred) ** 2))
    raise InvalidRange(f"unknown regressor {regressor!r}")


def decide_bivariate(
    data: Dataset | np.ndarray,
    mu_threshold: float = 0.1,
    regressor: str = "linear",
) -> BivariateDecision:
    """Decide forward / backward / none for a two-column sample.

    ``forward`` means column 0 causes column 1. Swapping the columns swaps
    the two norms, flips forward/backward and leaves ``mu`` unchanged.
    """
    X = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[1] != 2:
        raise DimensionMismatch(f"expected exactly 2 columns, got shape {X.shape}")
    x0, x1 = X[:, 0], X[:, 1]
    f_x = float(np.hypot(_var(x0), conditional_variance(x1, x0, regressor)))
    f_y = float(np.hypot(_var(x1), conditional_variance(x0, x1, regressor)))
    top = max(f_x, f_y)
    mu = abs(f_x - f_y) / top if top > 0 else 0.0
    if mu < mu_threshold:
        verdict = "none"
    else:
        verdict = "forward" if f_x < f_y else "backward"
    return BivariateDecision(verdict=verdict, f_x=f_x, f_y=f_y, mu=mu)
