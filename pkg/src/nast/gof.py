"""Normalized aggregation matrices and the cubic-trace statistic.

The aggregation matrix centers each node pair's layer-summed adjacency
by its (true or estimated) mean and rescales by the layer-summed
Bernoulli standard deviation times sqrt(n), giving zero-mean entries
with variance 1/n under the model.  The test statistic is
tr(aggregation^3) / sqrt(6); a brute-force sum over node triples serves
as an independent oracle via tr(M^3) = 6 * sum_{a<b<c} M_ab M_bc M_ca
for symmetric zero-diagonal M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .estimate import ProbabilityMatrices
from .model import MultiLayerNetwork

__all__ = [
    "AggregationMatrix",
    "VARIANCE_FLOOR",
    "ideal_aggregation",
    "normalized_aggregation",
    "trace_cubed_statistic",
    "triple_product_trace",
]

# Estimated probabilities are clamped into [floor, 1 - floor] before the
# variance term so a block estimate of exactly 0 or 1 cannot zero the
# denominator.  Numerators always use the raw values.
VARIANCE_FLOOR = 1e-6


@dataclass
class AggregationMatrix:
    """Symmetric zero-diagonal matrix plus its per-pair variance mass.

    ``variance_sums[i, j]`` holds sum_ell P[i, j] (1 - P[i, j]) as used
    in the denominator (None for synthetic matrices built in tests).
    """

    matrix: np.ndarray
    variance_sums: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        M = np.asarray(self.matrix, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("aggregation matrix must be square")
        if not np.array_equal(M, M.T):
            raise ValueError("aggregation matrix must be symmetric")
        if np.diagonal(M).any():
            raise ValueError("aggregation matrix must have zero diagonal")
        self.matrix = M

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])


def _aggregate(
    net: MultiLayerNetwork, P: list[np.ndarray], clamp: bool
) -> tuple[np.ndarray, np.ndarray]:
    n = net.n
    num = np.zeros((n, n))
    var = np.zeros((n, n))
    for A, P_ell in zip(net.layers, P):
        num += A.astype(np.float64) - P_ell
        Pv = np.clip(P_ell, VARIANCE_FLOOR, 1.0 - VARIANCE_FLOOR) if clamp else P_ell
        var += Pv * (1.0 - Pv)
    return num, var


def ideal_aggregation(net: MultiLayerNetwork, trueP: ProbabilityMatrices) -> AggregationMatrix:
    """Normalized aggregation with the true probabilities.

    Off-diagonal entries (A summed over layers, centered) divided by
    sqrt(n * variance mass); diagonal zero.  Raises if any off-diagonal
    pair has zero variance mass.
    """
    if trueP.L != net.L or trueP.n != net.n:
        raise ValueError("probability matrices do not match the network shape")
    num, var = _aggregate(net, trueP.Phat, clamp=False)
    off = ~np.eye(net.n, dtype=bool)
    if (var[off] <= 0.0).any():
        raise ValueError("zero variance mass at an off-diagonal pair; probabilities degenerate")
    M = np.zeros_like(num)
    M[off] = num[off] / np.sqrt(net.n * var[off])
    M = 0.5 * (M + M.T)  # exact symmetry despite independent float paths
    return AggregationMatrix(matrix=M, variance_sums=var)


def normalized_aggregation(net: MultiLayerNetwork, Phat: ProbabilityMatrices) -> AggregationMatrix:
    """Normalized aggregation with plug-in probabilities.

    Same construction with estimates in place of the truth; the
    variance term clamps each estimate into
    [VARIANCE_FLOOR, 1 - VARIANCE_FLOOR] while the numerator stays raw.
    """
    if Phat.L != net.L or Phat.n != net.n:
        raise ValueError("probability matrices do not match the network shape")
    num, var = _aggregate(net, Phat.Phat, clamp=True)
    off = ~np.eye(net.n, dtype=bool)
    M = np.zeros_like(num)
    M[off] = num[off] / np.sqrt(net.n * var[off])
    M = 0.5 * (M + M.T)
    return AggregationMatrix(matrix=M, variance_sums=var)


def trace_cubed_statistic(agg: AggregationMatrix) -> float:
    """T = tr(M^3) / sqrt(6) via one dense product and an elementwise dot."""
    M = agg.matrix
    M2 = M @ M
    return float((M2 * M).sum() / math.sqrt(6.0))


def triple_product_trace(agg: AggregationMatrix) -> float:
    """Brute-force oracle: 6 * sum over unordered triples, over sqrt(6).

    Compensated (exact) summation of the triple products; O(n^3) Python
    loops, intended for small matrices in tests.
    """
    M = agg.matrix
    n = agg.n
    terms = []
    for a in range(n):
        for b in range(a + 1, n):
            Mab = M[a, b]
            if Mab == 0.0:
                continue
            for c in range(b + 1, n):
                terms.append(Mab * M[b, c] * M[c, a])
    return 6.0 * math.fsum(terms) / math.sqrt(6.0)
