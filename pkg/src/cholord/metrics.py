"""Structure-recovery metrics for directed graphs.

All metrics compare directed adjacency only; weights are ignored. The SHD
convention counts a reversed edge as a single edit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cscs import EdgeSet
from .errors import DimensionMismatch, NoEdges
from .sem import Ordering, WeightedDag, population_covariance


@dataclass(frozen=True)
class MetricsReport:
    tpr: float
    tdr: float
    shd: int
    ordering_valid: bool | None = None

    def to_json_dict(self) -> dict:
        return {
            "tpr": self.tpr,
            "tdr": self.tdr,
            "shd": self.shd,
            "ordering_valid": self.ordering_valid,
        }


def is_topological(ordering: Ordering, truth: WeightedDag) -> bool:
    """True iff every true edge goes from an earlier to a later position."""
    if ordering.p != truth.p:
        raise DimensionMismatch("ordering and graph disagree on node count")
    pos = ordering.positions
    return all(pos[u] < pos[v] for u, v, _ in truth.edges)


def _directed_pairs(obj) -> set[tuple[int, int]]:
    if isinstance(obj, EdgeSet):
        return obj.directed_pairs()
    if isinstance(obj, WeightedDag):
        return {(u, v) for u, v, _ in obj.edges}
    return {(int(u), int(v)) for u, v in obj}


def compare_graphs(estimated: EdgeSet, truth: WeightedDag) -> MetricsReport:
    """TPR, TDR and SHD of an estimated edge set against the generating DAG.

    TPR counts correctly directed true edges over true edges (1 when there
    are none); TDR counts them over estimated edges (1 when both sides are
    empty, 0 when only the estimate is). SHD is the number of edge
    insertions, deletions and reversals needed to turn the estimate into the
    truth, a reversal costing 1.
    """
    if isinstance(estimated, EdgeSet) and estimated.ordering.p != truth.p:
        raise DimensionMismatch("edge set and graph disagree on node count")
    est = _directed_pairs(estimated)
    true = _directed_pairs(truth)
    correct = len(est & true)
    tpr = correct / len(true) if true else 1.0
    if est:
        tdr = correct / len(est)
    else:
        tdr = 1.0 if not true else 0.0
    shd = 0
    for i, j in {(min(u, v), max(u, v)) for u, v in est | true}:
        code_est = ((i, j) in est) - ((j, i) in est) * 2  # 1 fwd, -2 bwd, 0 none
        code_true = ((i, j) in true) - ((j, i) in true) * 2
        if code_est != code_true:
            shd += 1
    ordering_valid = (
        is_topological(estimated.ordering, truth) if isinstance(estimated, EdgeSet) else None
    )
    return MetricsReport(tpr=float(tpr), tdr=float(tdr), shd=int(shd), ordering_valid=ordering_valid)


def varsortability(dag: WeightedDag) -> float:
    """Agreement between increasing marginal variance and the causal order.

    Over all ordered node pairs connected by a directed path, the fraction
    whose population marginal variances increase along the path, ties
    counting one half.
    """
    if not dag.edges:
        raise NoEdges("varsortability needs at least one edge")
    p = dag.p
    reach = np.zeros((p, p), dtype=bool)
    for u, v, _ in dag.edges:
        reach[u, v] = True
    for k in range(p):  # transitive closure
        reach |= reach[:, k][:, None] & reach[k, :][None, :]
    variances = np.diag(population_covariance(dag))
    score = 0.0
    count = 0
    for i in range(p):
        for j in range(p):
            if reach[i, j]:
                count += 1
                if variances[i] < variances[j]:
                    score += 1.0
                elif variances[i] == variances[j]:
                    score += 0.5
    return score / count
