"""Optional compiled kernel for the greedy ordering loop.

The greedy ordering is a sequential O(p^3) algorithm whose per-iteration work
is too fine-grained for vectorization to pay off at small p; the compiled
version keeps the measured runtime flop-dominated across the whole benchmark
range. Importing this module never fails: ``greedy_core`` is ``None`` when
numba is unavailable and callers fall back to the numpy implementation, which
computes the same quantities with the same tie-breaking.

Status codes returned by the kernel: 0 ok, 1 pivot failure (input not
positive definite), 2 downdate failure.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False
    njit = None


def _greedy_core_py(S, first, tol):
    p = S.shape[0]
    perm = np.zeros(p, dtype=np.int64)
    alive = np.ones(p, dtype=np.bool_)
    L = np.zeros((p, p))
    W = np.zeros((p, p))
    colsq = np.zeros(p)
    v = np.zeros(p)
    diag = np.zeros(p)
    prepends = 0

    perm[0] = first
    alive[first] = False
    d0 = S[first, first]
    if d0 <= tol:
        return perm, 1, 0.0, diag, 0
    l00 = np.sqrt(d0)
    L[0, 0] = l00
    for j in range(p):
        if alive[j]:
            W[0, j] = S[first, j] / l00
            colsq[j] = W[0, j] * W[0, j]
    fsq = d0
    m = 1
    while m < p:
        bestval = np.inf
        for j in range(p):
            if alive[j]:
                d = S[j, j] - colsq[j]
                if d < bestval:
                    bestval = d
        best = -1
        thresh = bestval + abs(bestval) * 1e-12
        for j in range(p):  # smallest index among candidates tied to relative precision
            if alive[j] and S[j, j] - colsq[j] <= thresh:
                best = j
                break
        j = best
        dback = S[j, j] - colsq[j]
        if dback <= tol:
            return perm, 1, 0.0, diag, prepends
        sjj = S[j, j]
        fback = fsq + dback
        # Diagonal of the front-inserted factor via the rank-one identity:
        # new diag_k^2 = L_kk^2 * t_k / t_{k-1}, t_k = 1 - sum_{i<=k} w_i^2.
        tprev = 1.0
        ffront = sjj
        for k in range(m):
            wk = W[k, j]
            tk = tprev - wk * wk / sjj
            if tk <= 0.0:
                ffront = np.inf
                break
            ffront += L[k, k] * L[k, k] * tk / tprev
            tprev = tk
        if fback <= ffront * (1.0 + 1e-12):  # exact ties append at the back
            for k in range(m):
                L[m, k] = W[k, j]
            lmm = np.sqrt(dback)
            L[m, m] = lmm
            perm[m] = j
            alive[j] = False
            for c in range(p):
                if alive[c]:
                    acc = S[j, c]
                    for k in range(m):
                        acc -= W[k, j] * W[k, c]
                    wn = acc / lmm
                    W[m, c] = wn
                    colsq[c] += wn * wn
            fsq = fback
            m += 1
        else:
            prepends += 1
            rsjj = np.sqrt(sjj)
            for k in range(m):
                v[k] = S[perm[k], j] / rsjj
            for k in range(m):
                d2 = L[k, k] * L[k, k] - v[k] * v[k]
                if d2 <= tol:
                    return perm, 2, 0.0, diag, prepends
                r = np.sqrt(d2)
                c_ = r / L[k, k]
                s_ = v[k] / L[k, k]
                L[k, k] = r
                for i2 in range(k + 1, m):
                    L[i2, k] = (L[i2, k] - s_ * v[i2]) / c_
                    v[i2] = c_ * v[i2] - s_ * L[i2, k]
            # shift the downdated block to rows/cols 1..m and put j first
            for i2 in range(m - 1, -1, -1):
                for k in range(i2, -1, -1):
                    L[i2 + 1, k + 1] = L[i2, k]
            L[0, 0] = rsjj
            for i2 in range(m):
                L[i2 + 1, 0] = S[perm[i2], j] / rsjj
                L[0, i2 + 1] = 0.0
            for i2 in range(m - 1, -1, -1):
                perm[i2 + 1] = perm[i2]
            perm[0] = j
            alive[j] = False
            m += 1
            fsq = 0.0
            for k in range(m):
                fsq += L[k, k] * L[k, k]
            for c in range(p):
                if alive[c]:
                    acc2 = 0.0
                    for k in range(m):
                        b = S[perm[k], c]
                        for k2 in range(k):
                            b -= L[k, k2] * W[k2, c]
                        wn = b / L[k, k]
                        W[k, c] = wn
                        acc2 += wn * wn
                    colsq[c] = acc2
    for k in range(p):
        diag[k] = L[k, k]
    return perm, 0, fsq, diag, prepends


if HAVE_NUMBA:
    greedy_core = njit(cache=True)(_greedy_core_py)
else:  # pragma: no cover
    greedy_core = None
